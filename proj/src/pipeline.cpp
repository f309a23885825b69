#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "dzc/correlation.hpp"
#include "dzc/error.hpp"
#include "dzc/estimators.hpp"
#include "fft.hpp"

namespace dzc {

namespace {

constexpr double kMaxDelta = 0.05;
constexpr int kPhaseIterations = 4;

double wrap_phase(double a) {
    // principal value in (-pi, pi]; the arguments here are within a few turns
    constexpr double pi = std::numbers::pi;
    if (std::abs(a) > 8.0 * pi) a = std::remainder(a, 2.0 * pi);
    while (a > pi) a -= 2.0 * pi;
    while (a <= -pi) a += 2.0 * pi;
    return a;
}

Complex rotation(double cycles) {
    return std::polar(1.0, 2.0 * std::numbers::pi * (cycles - std::round(cycles)));
}

// Signed bin frequency in radians/sample, mapped to (-pi, pi].
double bin_omega(std::size_t m, std::size_t n) {
    const auto mi = static_cast<std::int64_t>(m);
    const auto ni = static_cast<std::int64_t>(n);
    const std::int64_t s = (2 * mi > ni) ? mi - ni : mi;
    return 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(n);
}

std::vector<std::size_t> valid_bins(std::span<const Complex> z_spec, double ratio, double min_omega) {
    const std::size_t n = z_spec.size();
    double peak = 0.0;
    for (const Complex& v : z_spec) peak = std::max(peak, std::abs(v));
    std::vector<std::size_t> bins;
    for (std::size_t m = 1; m < n; ++m) {
        if (n % 2 == 0 && 2 * m == n) continue;
        if (std::abs(bin_omega(m, n)) < min_omega) continue;
        if (std::abs(z_spec[m]) >= ratio * peak) bins.push_back(m);
    }
    return bins;
}

// Per-bin delay estimates from cross-spectrum terms C_m = Z_m conj(Y_m) at frequencies omegas.
PhaseRefinement refine_from_cross(std::span<const Complex> cross, std::span<const double> omegas,
                                  PhaseReference reference) {
    if (cross.empty()) throw Error(ErrorCode::Degenerate, "no valid bins in the template spectrum");
    const std::size_t count = cross.size();
    PhaseRefinement out;
    out.valid_bins = count;
    out.per_bin_samples.resize(count);
    std::vector<double> phase(count);
    for (std::size_t i = 0; i < count; ++i) phase[i] = std::arg(cross[i]);

    auto solve = [&](double common) {
        double mean = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            out.per_bin_samples[i] = wrap_phase(phase[i] - common) / omegas[i];
            mean += out.per_bin_samples[i];
        }
        return mean / static_cast<double>(count);
    };

    double delta = 0.0;
    double common = 0.0;
    if (reference == PhaseReference::Known) {
        delta = solve(0.0);
    } else {
        // Fit the common phase against the current delay estimate, then re-solve.
        Complex acc{};
        for (const Complex& c : cross) acc += c;
        common = std::arg(acc);
        delta = solve(common);
        for (int it = 1; it < kPhaseIterations; ++it) {
            acc = {};
            for (std::size_t i = 0; i < count; ++i) acc += cross[i] * std::polar(1.0, -omegas[i] * delta);
            common = std::arg(acc);
            delta = solve(common);
        }
    }
    double var = 0.0;
    for (double v : out.per_bin_samples) var += (v - delta) * (v - delta);
    out.variance = var / static_cast<double>(count);
    out.common_phase = common;
    out.delta_d_m = delta;  // samples until scaled by the caller
    return out;
}

struct CrossSpectrum {
    ComplexSequence cross;
    std::vector<double> omegas;
    std::vector<std::size_t> bins;
};

CrossSpectrum cross_spectrum(std::span<const Complex> z, std::span<const Complex> y, const PipelineConfig& cfg) {
    CrossSpectrum c;
    c.bins = valid_bins(z, cfg.valid_bin_ratio, cfg.min_bin_omega);
    for (std::size_t m : c.bins) {
        c.cross.push_back(z[m] * std::conj(y[m]));
        c.omegas.push_back(bin_omega(m, z.size()));
    }
    return c;
}

ComplexSequence template_window(const SequenceSpec& spec, std::int64_t window_start, std::int64_t tau) {
    return code_stream(spec, window_start - tau, static_cast<std::size_t>(spec.n));
}

void require_window(std::span<const Complex> received, const SequenceSpec& spec) {
    spec.validate();
    if (received.size() != static_cast<std::size_t>(spec.n))
        throw Error(ErrorCode::LengthMismatch, "compensated window must have length N");
}

void require_delta(double delta_hat) {
    if (!std::isfinite(delta_hat) || std::abs(delta_hat) >= kMaxDelta)
        throw Error(ErrorCode::OutOfRange, "|delta_hat| must be below 0.05");
}

void validate_bin_settings(const PipelineConfig& cfg) {
    if (!(cfg.valid_bin_ratio > 0.0 && cfg.valid_bin_ratio <= 1.0))
        throw Error(ErrorCode::Config, "valid_bin_ratio must be in (0, 1]");
    if (!(cfg.min_bin_omega >= 0.0 && cfg.min_bin_omega < std::numbers::pi))
        throw Error(ErrorCode::Config, "min_bin_omega must be in [0, pi)");
}

}  // namespace

void PipelineConfig::validate(const SequenceSpec& spec) const {
    spec.validate();
    phys.validate();
    resampler.validate();
    const auto n = static_cast<std::size_t>(spec.n);
    const std::size_t ns = resolved_segment_length(spec);
    if (n % ns != 0) throw Error(ErrorCode::Config, "segment_length must divide N");
    if (window_step < 1) throw Error(ErrorCode::Config, "window_step must be positive");
    if (candidate_window < 1 || candidate_window >= n) throw Error(ErrorCode::Config, "candidate_window must be in [1, N)");
    validate_bin_settings(*this);
    if (!(max_speed > 0.0)) throw Error(ErrorCode::Config, "max_speed must be positive");
}

std::size_t PipelineConfig::resolved_segment_length(const SequenceSpec& spec) const {
    return segment_length ? segment_length : static_cast<std::size_t>(spec.n);
}

std::size_t PipelineConfig::guard(const SequenceSpec& spec) const {
    return static_cast<std::size_t>(resampler.half_width) +
           static_cast<std::size_t>(std::ceil(kMaxDelta * spec.n)) + 2;
}

RangeEstimate initial_tof_window(std::span<const Complex> stream, const SequenceSpec& spec,
                                 std::size_t window_start, const PipelineConfig& cfg) {
    spec.validate();
    cfg.phys.validate();
    const auto n = static_cast<std::size_t>(spec.n);
    if (window_start + n + 1 > stream.size())
        throw Error(ErrorCode::InsufficientLength, "stream too short for the requested window");

    // The differential product of the emitted code is N-periodic for every window
    // start, so a circular correlation over N products is exact.
    const ComplexSequence code = code_stream(spec, static_cast<std::int64_t>(window_start), n + 1);
    ComplexSequence dt(n), dy(n);
    for (std::size_t k = 0; k < n; ++k) {
        dt[k] = code[k] * std::conj(code[k + 1]);
        dy[k] = stream[window_start + k] * std::conj(stream[window_start + k + 1]);
    }
    const CorrelationResult corr = circular_xcorr(dt, dy);

    RangeEstimate est;
    est.tau_hat = static_cast<std::int64_t>(corr.peak_index);
    est.d_hat = range_meters(est.tau_hat, 0.0, cfg.phys);
    est.metric = corr.peak_magnitude;
    est.diagnostics["window_start"] = static_cast<double>(window_start);
    return est;
}

double estimate_doppler(std::span<const RangePoint> series, const PipelineConfig& cfg) {
    cfg.phys.validate();
    if (series.size() < 2) throw Error(ErrorCode::InsufficientLength, "Doppler estimate needs at least two ranges");
    for (std::size_t i = 1; i < series.size(); ++i)
        if (!(series[i].index > series[i - 1].index))
            throw Error(ErrorCode::InvalidArgument, "range series indices must increase");
    const double seconds = (series.back().index - series.front().index) / cfg.phys.fs;
    const double velocity = (series.back().d_m - series.front().d_m) / seconds;
    // a shrinking range compresses the received waveform
    return -velocity / cfg.phys.c;
}

ComplexSequence compensate_doppler(std::span<const Complex> segment, double delta_hat, const PipelineConfig& cfg) {
    require_delta(delta_hat);
    cfg.phys.validate();
    const double ratio = 1.0 + delta_hat;
    const double nu_hat = cfg.phys.fc * delta_hat / cfg.phys.fs;
    const auto length = static_cast<std::size_t>(std::floor(static_cast<double>(segment.size()) * ratio));
    std::vector<double> positions(length);
    for (std::size_t k = 0; k < length; ++k) positions[k] = static_cast<double>(k) / ratio;
    ComplexSequence out = interpolate(segment, positions, cfg.resampler);
    for (std::size_t k = 0; k < length; ++k) out[k] *= rotation(-nu_hat * positions[k]);
    return out;
}

ComplexSequence compensate_window(std::span<const Complex> stream, std::size_t window_start, std::size_t n,
                                  double delta_hat, const PipelineConfig& cfg) {
    require_delta(delta_hat);
    cfg.phys.validate();
    const double ratio = 1.0 + delta_hat;
    const double nu_hat = cfg.phys.fc * delta_hat / cfg.phys.fs;
    const double h = (static_cast<double>(n) - 1.0) / 2.0;
    const double center = static_cast<double>(window_start) + h;
    std::vector<double> positions(n);
    for (std::size_t j = 0; j < n; ++j) positions[j] = center + (static_cast<double>(j) - h) / ratio;
    if (positions.front() < 0.0 || positions.back() > static_cast<double>(stream.size()) - 1.0)
        throw Error(ErrorCode::InsufficientLength, "stream too short to compensate the window");
    ComplexSequence out = interpolate(stream, positions, cfg.resampler);
    // derotate about the window center so the residual carrier phase belongs to the center delay
    if (nu_hat != 0.0)
        for (std::size_t j = 0; j < n; ++j) out[j] *= rotation(-nu_hat * (positions[j] - center));
    return out;
}

PhaseRefinement phase_refine_detail(std::span<const Complex> received_comp, const SequenceSpec& spec,
                                    std::int64_t tau_hat, const PipelineConfig& cfg, std::int64_t window_start) {
    require_window(received_comp, spec);
    cfg.phys.validate();
    validate_bin_settings(cfg);
    const ComplexSequence z = detail::fft(template_window(spec, window_start, tau_hat));
    const ComplexSequence y = detail::fft(received_comp);
    const CrossSpectrum c = cross_spectrum(z, y, cfg);
    PhaseRefinement r = refine_from_cross(c.cross, c.omegas, cfg.phase_reference);
    r.delta_d_m *= cfg.phys.meters_per_sample();
    return r;
}

double phase_refine(std::span<const Complex> received_comp, const SequenceSpec& spec, std::int64_t tau_hat,
                    const PipelineConfig& cfg, std::int64_t window_start) {
    return phase_refine_detail(received_comp, spec, tau_hat, cfg, window_start).delta_d_m;
}

CandidateSearch min_variance_search(std::span<const Complex> received_comp, const SequenceSpec& spec,
                                    std::int64_t tau_hat, const PipelineConfig& cfg, std::int64_t window_start) {
    require_window(received_comp, spec);
    cfg.validate(spec);
    const bool n_periodic = code_period(spec) == spec.n;
    const ComplexSequence y = detail::fft(received_comp);

    const int width = static_cast<int>(cfg.candidate_window);
    const int first = -(width / 2);

    // For an N-periodic code, shifting the template by one sample multiplies bin m by
    // e^{-i w_m}, so the cross spectrum is stepped instead of recomputed.
    CrossSpectrum ramp;
    std::vector<Complex> step;
    if (n_periodic) {
        const ComplexSequence z = detail::fft(template_window(spec, window_start, tau_hat + first));
        ramp = cross_spectrum(z, y, cfg);
        for (double w : ramp.omegas) step.push_back(std::polar(1.0, -w));
    }

    CandidateSearch out;
    bool have = false;
    PhaseRefinement best;
    for (int offset = first; offset < first + width; ++offset) {
        PhaseRefinement r;
        if (n_periodic) {
            if (offset != first)
                for (std::size_t b = 0; b < step.size(); ++b) ramp.cross[b] *= step[b];
            r = refine_from_cross(ramp.cross, ramp.omegas, cfg.phase_reference);
        } else {
            const ComplexSequence z = detail::fft(template_window(spec, window_start, tau_hat + offset));
            const CrossSpectrum c = cross_spectrum(z, y, cfg);
            r = refine_from_cross(c.cross, c.omegas, cfg.phase_reference);
        }
        out.offsets.push_back(offset);
        out.variances.push_back(r.variance);
        const bool better = !have || r.variance < best.variance ||
                            (r.variance == best.variance &&
                             (std::abs(offset) < std::abs(out.offset) ||
                              (std::abs(offset) == std::abs(out.offset) && offset < out.offset)));
        if (better) {
            have = true;
            best = std::move(r);
            out.offset = offset;
        }
    }
    out.corrected_tau = tau_hat + out.offset;
    out.variance = best.variance;
    out.valid_bins = best.valid_bins;
    out.delta_d_m = best.delta_d_m * cfg.phys.meters_per_sample();
    return out;
}

RangingPipeline::RangingPipeline(const SequenceSpec& spec, const PipelineConfig& cfg) : spec_(spec), cfg_(cfg) {
    cfg_.validate(spec_);
}

std::vector<std::size_t> RangingPipeline::window_starts(std::size_t stream_length) const {
    const std::size_t g = cfg_.guard(spec_);
    const auto n = static_cast<std::size_t>(spec_.n);
    std::vector<std::size_t> starts;
    for (std::size_t s = g; s + n + 1 + g <= stream_length; s += cfg_.window_step) starts.push_back(s);
    return starts;
}

RangeEstimate RangingPipeline::process_window(std::span<const Complex> stream, std::size_t start, double delta_hat) const {
    RangeEstimate init = initial_tof_window(stream, spec_, start, cfg_);
    RangeEstimate est = init;
    est.nu_hat = cfg_.phys.fc * delta_hat / cfg_.phys.fs;
    est.diagnostics["initial_tau"] = static_cast<double>(init.tau_hat);
    est.diagnostics["delta_hat"] = delta_hat;
    const ComplexSequence comp = compensate_window(stream, start, static_cast<std::size_t>(spec_.n), delta_hat, cfg_);
    try {
        const CandidateSearch search =
            min_variance_search(comp, spec_, init.tau_hat, cfg_, static_cast<std::int64_t>(start));
        est.tau_hat = search.corrected_tau;
        est.refinement_mm = search.delta_d_m * 1000.0;
        est.diagnostics["candidate_offset"] = search.offset;
        est.diagnostics["variance"] = search.variance;
        est.diagnostics["valid_bins"] = static_cast<double>(search.valid_bins);
        est.diagnostics["fallback"] = 0.0;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Degenerate) throw;
        est.refinement_mm = 0.0;
        est.diagnostics["fallback"] = 1.0;
    }
    est.d_hat = range_meters(est.tau_hat, est.refinement_mm, cfg_.phys);
    return est;
}

// Windows are grouped into segments of N samples from the guard. Each segment is compensated
// with the time compression measured on the refined ranges of the previous segment, sampled
// every N_s from its first window up to the first window of the next one.
class RangingPipeline::Tracker {
public:
    Tracker(const RangingPipeline& owner, std::span<const Complex> stream)
        : owner_(owner), stream_(stream), g_(owner.cfg_.guard(owner.spec_)),
          n_(static_cast<std::size_t>(owner.spec_.n)), ns_(owner.cfg_.resolved_segment_length(owner.spec_)),
          last_start_(owner.window_starts(stream.size()).back()),
          max_delta_(std::min(kMaxDelta, owner.cfg_.max_speed / owner.cfg_.phys.c)) {}

    std::size_t segment_of(std::size_t start) const { return (start - g_) / n_; }

    RangeEstimate window(std::size_t start) {
        const std::size_t segment = segment_of(start);
        const double delta = delta_for(segment);
        auto it = refined_.find(start);
        RangeEstimate est = it != refined_.end() ? it->second : owner_.process_window(stream_, start, delta);
        est.diagnostics["provisional"] = segment == 0 ? 1.0 : 0.0;
        est.diagnostics["segment"] = static_cast<double>(segment);
        return est;
    }

    double delta_for(std::size_t segment) {
        const double h = (static_cast<double>(n_) - 1.0) / 2.0;
        while (segment_delta_.size() <= segment) {
            const std::size_t prev = segment_delta_.size() - 1;
            const double delta = segment_delta_[prev];
            const std::size_t seg_start = g_ + prev * n_;
            std::vector<RangePoint> series;
            for (std::size_t s = seg_start; s <= seg_start + n_ && s <= last_start_; s += ns_) {
                double d = 0.0;
                if (s < seg_start + n_) {
                    auto it = refined_.find(s);
                    if (it == refined_.end()) it = refined_.emplace(s, owner_.process_window(stream_, s, delta)).first;
                    d = it->second.d_hat;
                } else {
                    // belongs to the next segment, so it is not cached under this compensation
                    d = owner_.process_window(stream_, s, delta).d_hat;
                }
                series.push_back({static_cast<double>(s) + h, d});
            }
            double next = delta;
            if (series.size() >= 2) {
                const double d = estimate_doppler(series, owner_.cfg_);
                if (std::abs(d) <= max_delta_) next = d;
            }
            segment_delta_.push_back(next);
        }
        return segment_delta_[segment];
    }

private:
    const RangingPipeline& owner_;
    std::span<const Complex> stream_;
    std::size_t g_, n_, ns_, last_start_;
    double max_delta_;
    std::map<std::size_t, RangeEstimate> refined_;
    std::vector<double> segment_delta_{0.0};
};

std::vector<RangeEstimate> RangingPipeline::process(std::span<const Complex> stream) {
    const std::vector<std::size_t> starts = window_starts(stream.size());
    if (starts.empty()) throw Error(ErrorCode::InsufficientLength, "stream too short for a single window");
    Tracker tracker(*this, stream);
    std::vector<RangeEstimate> out;
    out.reserve(starts.size());
    for (std::size_t s : starts) out.push_back(tracker.window(s));
    last_delta_ = tracker.delta_for(tracker.segment_of(starts.back()));
    return out;
}

RangeEstimate RangingPipeline::estimate_at(std::span<const Complex> stream, std::size_t start) {
    const std::vector<std::size_t> starts = window_starts(stream.size());
    if (starts.empty()) throw Error(ErrorCode::InsufficientLength, "stream too short for a single window");
    if (start < starts.front() || start > starts.back())
        throw Error(ErrorCode::OutOfRange, "window start outside the processable range");
    Tracker tracker(*this, stream);
    RangeEstimate est = tracker.window(start);
    last_delta_ = tracker.delta_for(tracker.segment_of(start));
    return est;
}

std::vector<RangeEstimate> reduced_complexity_pipeline(std::span<const Complex> stream, const SequenceSpec& spec,
                                                       const PipelineConfig& cfg) {
    RangingPipeline pipeline(spec, cfg);
    return pipeline.process(stream);
}

}  // namespace dzc
