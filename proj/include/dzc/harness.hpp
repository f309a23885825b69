#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dzc/estimators.hpp"
#include "dzc/types.hpp"

namespace dzc {

inline constexpr const char* kCsvVersion = "0.1.0";

enum class Scenario { FixedDoppler, ConstantVelocity, VelocityProfile };
enum class Algorithm { XcorrZc, DiffDzc, MlZc, MlDzc, ReducedDzc };

const char* scenario_name(Scenario s) noexcept;
const char* algorithm_name(Algorithm a) noexcept;
Scenario parse_scenario(const std::string& text);
Algorithm parse_algorithm(const std::string& text);

struct ExperimentConfig {
    Scenario scenario = Scenario::FixedDoppler;
    int n = 21;
    int m = 1;
    double tau = 10.0;         ///< delay at the start of the stream, samples
    double tau_jitter = 0.0;   ///< per-trial uniform offset in [-jitter, jitter]
    double nu = 0.0;           ///< fixed_doppler carrier offset
    double delta = 0.0;        ///< fixed_doppler time compression
    double velocity = 0.0;     ///< m/s, positive closing; cruise speed for velocity_profile
    double ramp_fraction = 0.25;
    bool random_phase = true;
    std::vector<double> snr_grid{0.0};
    int trials = 500;
    std::vector<Algorithm> algorithms{Algorithm::MlDzc};
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
    std::size_t segments = 2;  ///< code lengths of stream ahead of the scored window
    std::optional<double> ml_nu_halfwidth;  ///< default M/2
    std::optional<double> ml_nu_step;       ///< default 1/(4N)
    bool ml_delta_from_nu = false;
    bool record_runtime = false;
    double halflambda_mm = 7.5;
    std::vector<double> thresholds_mm{0.5, 1.0, 1.6, 2.0, 5.0, 7.5};
    PipelineConfig pipeline{};  ///< physical constants and resampler live here

    void validate() const;
    /// Whether the scored window sits at the end of a multi-segment stream.
    bool uses_long_stream() const;
};

struct TrialRecord {
    int trial_id = 0;
    double snr_db = 0.0;
    Algorithm algorithm = Algorithm::MlDzc;
    double true_tau = 0.0;  ///< samples
    double tau_hat = 0.0;   ///< samples, NaN when the estimator failed
    double true_d_m = 0.0;
    double d_hat_m = 0.0;
    double error_mm = 0.0;
    std::int64_t runtime_ns = 0;
    std::string failure;
};

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg);

/// Runs one (trial, snr index) cell, one record per configured algorithm.
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, int trial_id, std::size_t snr_index);

struct SummaryRow {
    Algorithm algorithm = Algorithm::MlDzc;
    double snr_db = 0.0;
    std::size_t count = 0;
    std::size_t failures = 0;
    double mse_samples2 = 0.0;
    double mse_mm2 = 0.0;
    double rmse_mm = 0.0;
    double p_within_halflambda = 0.0;
    std::vector<double> p_within;  ///< one per threshold
};

struct Summary {
    std::vector<double> thresholds_mm;
    double halflambda_mm = 7.5;
    std::vector<SummaryRow> rows;  ///< ordered by algorithm, then snr

    const SummaryRow* find(Algorithm a, double snr_db) const;
};

Summary summarize(const std::vector<TrialRecord>& records, double halflambda_mm = 7.5,
                  const std::vector<double>& thresholds_mm = {});

/// Exactly rounded floating-point sum, independent of order.
double exact_sum(const std::vector<double>& values);

void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records);
void write_summary_csv(std::ostream& os, const Summary& summary);
void write_cdf_csv(std::ostream& os, const Summary& summary);

/// Shortest round-trip decimal text; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double v);

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Runs the experiment and writes records.csv, summary.csv and cdf.csv into out_dir.
Summary run_bench(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace dzc
