#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dzc/resample.hpp"
#include "dzc/sequences.hpp"
#include "dzc/types.hpp"

namespace dzc {

struct RangeEstimate {
    std::int64_t tau_hat = 0;   ///< samples
    double nu_hat = 0.0;        ///< cycles/sample
    double d_hat = 0.0;         ///< meters
    double refinement_mm = 0.0;
    double metric = 0.0;
    std::map<std::string, double> diagnostics;
};

/// d_hat from an integer delay and a refinement in millimeters.
double range_meters(std::int64_t tau_hat, double refinement_mm, const Physical& phys);

// ---------------------------------------------------------------- ML search

struct MlSearchConfig {
    std::vector<int> tau_grid;
    double nu_center = 0.0;
    double nu_halfwidth = 0.5;
    double nu_step = 0.0;
    /// Scan with the time scale tied to the carrier offset (delta = nu * fs / fc).
    bool delta_from_nu = false;
    /// Stream index of received[0]; the template is read from the code at the same indices.
    std::int64_t code_offset = 0;
    Physical phys{};

    /// Full tau grid, halfwidth M/2 and step 1/(4N).
    static MlSearchConfig defaults_for(const SequenceSpec& spec);

    void validate() const;
    /// Half-open grid [center - halfwidth, center + halfwidth).
    std::vector<double> nu_grid() const;
};

/// |sum_k y[k] conj(x[(1 + delta)(k - tau)]) exp(-i 2 pi nu k)| over the received window.
/// A nonzero delta reads the periodic code between samples by trigonometric interpolation.
double ml_metric(std::span<const Complex> received, const SequenceSpec& spec, int tau, double nu,
                 double delta, std::int64_t code_offset = 0);

RangeEstimate ml_estimate(std::span<const Complex> received, const SequenceSpec& spec,
                          const MlSearchConfig& cfg);

/// Reference implementation: one ml_metric call per grid point.
RangeEstimate ml_estimate_direct(std::span<const Complex> received, const SequenceSpec& spec,
                                 const MlSearchConfig& cfg);

struct AmbiguityMap {
    std::vector<int> tau_grid;
    std::vector<double> nu_grid;
    std::vector<double> values;  ///< row-major, tau outer

    double at(std::size_t tau_index, std::size_t nu_index) const {
        return values[tau_index * nu_grid.size() + nu_index];
    }
};

AmbiguityMap ambiguity_map(const SequenceSpec& spec, int true_tau, double true_nu,
                           std::span<const int> tau_grid, std::span<const double> nu_grid);

// ---------------------------------------------------------------- reduced pipeline

enum class PhaseReference {
    Known,      ///< carrier phase already removed; raw per-bin phases are used
    Estimated,  ///< a common phase is fitted and removed before the per-bin division
};

struct PipelineConfig {
    std::size_t segment_length = 0;  ///< N_s, must divide N; 0 means N
    std::size_t window_step = 1;
    std::size_t candidate_window = 200;
    double valid_bin_ratio = 0.5;
    /// Bins with |w| below this (rad/sample) are skipped on top of DC and Nyquist.
    /// Low bins turn phase noise into large delay errors; 0 keeps every bin.
    double min_bin_omega = 0.0;
    /// Doppler estimates implying a faster speed (m/s) are discarded for the previous one.
    double max_speed = 5.0;
    Physical phys{};
    PhaseReference phase_reference = PhaseReference::Estimated;
    ResamplerConfig resampler{};

    void validate(const SequenceSpec& spec) const;
    std::size_t resolved_segment_length(const SequenceSpec& spec) const;
    /// Samples the pipeline keeps free before the first and after the last window.
    std::size_t guard(const SequenceSpec& spec) const;
};

/// Differential correlation of stream[window_start, window_start + N] with the code
/// emitted over the same indices. Needs N + 1 samples from window_start.
RangeEstimate initial_tof_window(std::span<const Complex> stream, const SequenceSpec& spec,
                                 std::size_t window_start, const PipelineConfig& cfg);

struct RangePoint {
    double index = 0.0;  ///< sample index of the estimate
    double d_m = 0.0;
};

/// Time compression implied by the range slope of the series: -(dd/dt) / c.
double estimate_doppler(std::span<const RangePoint> series, const PipelineConfig& cfg);

/// Undo a time compression 1 + delta_hat and the matching carrier offset.
ComplexSequence compensate_doppler(std::span<const Complex> segment, double delta_hat,
                                   const PipelineConfig& cfg);

/// Compensated length-N window starting at window_start, resampled about its center.
ComplexSequence compensate_window(std::span<const Complex> stream, std::size_t window_start,
                                  std::size_t n, double delta_hat, const PipelineConfig& cfg);

struct PhaseRefinement {
    double delta_d_m = 0.0;
    double variance = 0.0;        ///< of the per-bin estimates, samples^2
    std::size_t valid_bins = 0;
    double common_phase = 0.0;
    std::vector<double> per_bin_samples;
};

/// Sub-sample correction of the hypothesis that received_comp is the code window
/// starting at window_start - tau_hat.
PhaseRefinement phase_refine_detail(std::span<const Complex> received_comp, const SequenceSpec& spec,
                                    std::int64_t tau_hat, const PipelineConfig& cfg,
                                    std::int64_t window_start = 0);

double phase_refine(std::span<const Complex> received_comp, const SequenceSpec& spec,
                    std::int64_t tau_hat, const PipelineConfig& cfg, std::int64_t window_start = 0);

struct CandidateSearch {
    std::int64_t corrected_tau = 0;
    int offset = 0;
    double delta_d_m = 0.0;
    double variance = 0.0;
    std::size_t valid_bins = 0;
    std::vector<int> offsets;
    std::vector<double> variances;
};

CandidateSearch min_variance_search(std::span<const Complex> received_comp, const SequenceSpec& spec,
                                    std::int64_t tau_hat, const PipelineConfig& cfg,
                                    std::int64_t window_start = 0);

/// Stateful per-stream runner. Windows start at guard(spec) and advance by window_step.
class RangingPipeline {
public:
    RangingPipeline(const SequenceSpec& spec, const PipelineConfig& cfg);

    std::vector<RangeEstimate> process(std::span<const Complex> stream);

    /// The estimate process() would emit for the window at start, computing only the
    /// windows its Doppler compensation depends on.
    RangeEstimate estimate_at(std::span<const Complex> stream, std::size_t start);

    /// Start sample of each window process() would emit for a stream of this length.
    std::vector<std::size_t> window_starts(std::size_t stream_length) const;

    /// Time compression applied to the last window of the previous process() or estimate_at() call.
    double last_delta() const { return last_delta_; }

private:
    class Tracker;

    RangeEstimate process_window(std::span<const Complex> stream, std::size_t start, double delta_hat) const;

    SequenceSpec spec_;
    PipelineConfig cfg_;
    double last_delta_ = 0.0;
};

std::vector<RangeEstimate> reduced_complexity_pipeline(std::span<const Complex> stream,
                                                       const SequenceSpec& spec,
                                                       const PipelineConfig& cfg);

}  // namespace dzc
