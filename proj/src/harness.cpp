#include "dzc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include "dzc/channel.hpp"
#include "dzc/correlation.hpp"
#include "dzc/error.hpp"
#include "rng.hpp"

namespace dzc {

namespace {

struct NameTable {
    const char* scenarios[3] = {"fixed_doppler", "constant_velocity", "velocity_profile"};
    const char* algorithms[5] = {"xcorr_zc", "diff_dzc", "ml_zc", "ml_dzc", "reduced_dzc"};
};
constexpr NameTable kNames{};

bool is_zc(Algorithm a) { return a == Algorithm::XcorrZc || a == Algorithm::MlZc; }

// Everything a trial needs that does not depend on the algorithm.
struct TrialSetup {
    std::size_t stream_length = 0;
    std::size_t window_start = 0;
    double center = 0.0;
    double true_tau = 0.0;
    double nu_center = 0.0;
    double theta = 0.0;
    double tau0 = 0.0;
    std::uint64_t noise_seed = 0;
};

double trapezoid_velocity(const ExperimentConfig& cfg, double t, double span) {
    const double ramp = cfg.ramp_fraction * span;
    if (ramp <= 0.0) return cfg.velocity;
    const double w = std::min({1.0, t / ramp, (span - t) / ramp});
    return cfg.velocity * std::max(0.0, w);
}

MotionProfile motion_for(const ExperimentConfig& cfg, const TrialSetup& setup) {
    MotionProfile motion;
    motion.phys = cfg.pipeline.phys;
    motion.tau0_samples = setup.tau0;
    const double span = static_cast<double>(setup.stream_length);
    const ExperimentConfig copy = cfg;
    motion.velocity_fn = [copy, span](double t) { return trapezoid_velocity(copy, t, span); };
    return motion;
}

// Constant time compression of the fixed-Doppler and constant-velocity scenarios.
double fixed_delta(const ExperimentConfig& cfg) {
    return cfg.scenario == Scenario::FixedDoppler ? cfg.delta : cfg.velocity / cfg.pipeline.phys.c;
}

double fixed_nu(const ExperimentConfig& cfg) {
    if (cfg.scenario == Scenario::FixedDoppler) return cfg.nu;
    return cfg.pipeline.phys.fc * fixed_delta(cfg) / cfg.pipeline.phys.fs;
}

TrialSetup make_setup(const ExperimentConfig& cfg, int trial_id, std::size_t snr_index) {
    const std::uint64_t seed = detail::hash_seed({cfg.base_seed, static_cast<std::uint64_t>(trial_id), snr_index});
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TrialSetup setup;
    const double phase_draw = unit(engine);
    const double jitter_draw = unit(engine);
    setup.theta = cfg.random_phase ? 2.0 * std::numbers::pi * phase_draw : 0.0;
    setup.tau0 = cfg.tau + cfg.tau_jitter * (2.0 * jitter_draw - 1.0);
    setup.noise_seed = detail::hash_seed({seed, 0x6e6f697365ULL});

    const SequenceSpec dzc{cfg.n, cfg.m, CodeKind::DZC};
    const auto n = static_cast<std::size_t>(cfg.n);
    if (cfg.uses_long_stream()) {
        const std::size_t g = cfg.pipeline.guard(dzc);
        setup.stream_length = g + cfg.segments * n + n + 1 + g;
        // window layout only; the search width does not affect it and may not fit a short code
        PipelineConfig layout = cfg.pipeline;
        layout.candidate_window = std::min(layout.candidate_window, n - 1);
        setup.window_start = RangingPipeline(dzc, layout).window_starts(setup.stream_length).back();
    } else {
        setup.stream_length = n + 1;
        setup.window_start = 0;
    }
    setup.center = static_cast<double>(setup.window_start) + (static_cast<double>(n) - 1.0) / 2.0;

    if (cfg.scenario == Scenario::VelocityProfile) {
        const MotionProfile motion = motion_for(cfg, setup);
        const MotionWarp warp(motion, setup.stream_length);
        setup.true_tau = warp.delay(setup.center);
        setup.nu_center = cfg.pipeline.phys.fc * motion.velocity_fn(setup.center) / (cfg.pipeline.phys.c * cfg.pipeline.phys.fs);
    } else {
        const double delta = fixed_delta(cfg);
        setup.true_tau = (1.0 + delta) * setup.tau0 - delta * setup.center;
        setup.nu_center = fixed_nu(cfg);
    }
    return setup;
}

ComplexSequence make_stream(const ExperimentConfig& cfg, const TrialSetup& setup, const SequenceSpec& spec,
                            double snr_db) {
    const ComplexSequence period = code_stream(spec, 0, static_cast<std::size_t>(code_period(spec)));
    ChannelOptions options;
    options.output_length = setup.stream_length;
    options.boundary = Boundary::Periodic;
    options.resampler = cfg.pipeline.resampler;
    if (cfg.scenario == Scenario::VelocityProfile)
        return apply_channel_moving(period, motion_for(cfg, setup), setup.theta, 1.0, snr_db, setup.noise_seed, options);
    ChannelSpec ch;
    ch.tau_samples = setup.tau0;
    ch.delta = fixed_delta(cfg);
    ch.nu = fixed_nu(cfg);
    ch.theta = setup.theta;
    ch.snr_db = snr_db;
    ch.seed = setup.noise_seed;
    return apply_channel_fixed(period, ch, options);
}

RangeEstimate run_algorithm(const ExperimentConfig& cfg, const TrialSetup& setup, Algorithm algo,
                            std::span<const Complex> stream) {
    const SequenceSpec spec{cfg.n, cfg.m, is_zc(algo) ? CodeKind::ZC : CodeKind::DZC};
    const auto n = static_cast<std::size_t>(cfg.n);
    const std::span<const Complex> window = stream.subspan(setup.window_start, n);
    switch (algo) {
        case Algorithm::XcorrZc: {
            const ComplexSequence templ = code_stream(spec, static_cast<std::int64_t>(setup.window_start), n);
            const CorrelationResult r = circular_xcorr(templ, window);
            RangeEstimate est;
            est.tau_hat = static_cast<std::int64_t>(r.peak_index);
            est.metric = r.peak_magnitude;
            est.d_hat = range_meters(est.tau_hat, 0.0, cfg.pipeline.phys);
            return est;
        }
        case Algorithm::DiffDzc:
            return initial_tof_window(stream, spec, setup.window_start, cfg.pipeline);
        case Algorithm::MlZc:
        case Algorithm::MlDzc: {
            MlSearchConfig ml = MlSearchConfig::defaults_for(spec);
            ml.nu_center = setup.nu_center;
            if (cfg.ml_nu_halfwidth) ml.nu_halfwidth = *cfg.ml_nu_halfwidth;
            if (cfg.ml_nu_step) ml.nu_step = *cfg.ml_nu_step;
            ml.delta_from_nu = cfg.ml_delta_from_nu;
            ml.code_offset = static_cast<std::int64_t>(setup.window_start);
            ml.phys = cfg.pipeline.phys;
            return ml_estimate(window, spec, ml);
        }
        case Algorithm::ReducedDzc: {
            RangingPipeline pipeline(spec, cfg.pipeline);
            return pipeline.estimate_at(stream, setup.window_start);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

}  // namespace

const char* scenario_name(Scenario s) noexcept { return kNames.scenarios[static_cast<int>(s)]; }
const char* algorithm_name(Algorithm a) noexcept { return kNames.algorithms[static_cast<int>(a)]; }

Scenario parse_scenario(const std::string& text) {
    for (int i = 0; i < 3; ++i)
        if (text == kNames.scenarios[i]) return static_cast<Scenario>(i);
    throw Error(ErrorCode::Config, "unknown scenario '" + text + "'");
}

Algorithm parse_algorithm(const std::string& text) {
    for (int i = 0; i < 5; ++i)
        if (text == kNames.algorithms[i]) return static_cast<Algorithm>(i);
    throw Error(ErrorCode::Config, "unknown algorithm '" + text + "'");
}

bool ExperimentConfig::uses_long_stream() const {
    if (scenario != Scenario::FixedDoppler) return true;
    for (Algorithm a : algorithms)
        if (a == Algorithm::ReducedDzc) return true;
    return false;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, msg); };
    try {
        SequenceSpec{n, m, CodeKind::DZC}.validate();
        pipeline.phys.validate();
        pipeline.resampler.validate();
        // the remaining pipeline knobs only matter to the pipeline estimator
        if (std::find(algorithms.begin(), algorithms.end(), Algorithm::ReducedDzc) != algorithms.end())
            pipeline.validate(SequenceSpec{n, m, CodeKind::DZC});
    } catch (const Error& e) {
        fail(e.what());
    }
    if (trials < 1) fail("trials must be at least 1");
    if (snr_grid.empty()) fail("snr_db must list at least one value");
    for (double s : snr_grid)
        if (std::isnan(s) || s == -kNoNoise) fail("snr_db values must be numbers or inf");
    if (algorithms.empty()) fail("algorithms must list at least one estimator");
    if (!std::isfinite(tau) || !std::isfinite(tau_jitter) || tau_jitter < 0.0 || tau - tau_jitter < 0.0)
        fail("tau and tau_jitter must keep the delay nonnegative");
    if (tau + tau_jitter >= static_cast<double>(n)) fail("tau + tau_jitter must be below N; delays are estimated modulo N");
    if (!std::isfinite(nu)) fail("nu must be finite");
    if (!(std::abs(delta) < 0.05)) fail("|delta| must be below 0.05");
    if (!(std::abs(velocity) < 0.05 * pipeline.phys.c)) fail("|velocity| must be below 0.05 c");
    if (!(ramp_fraction >= 0.0 && ramp_fraction <= 0.5)) fail("ramp_fraction must be in [0, 0.5]");
    if (threads < 1) fail("threads must be at least 1");
    if (segments < 1) fail("segments must be at least 1");
    if (ml_nu_halfwidth && !(*ml_nu_halfwidth > 0.0)) fail("ml_nu_halfwidth must be positive");
    if (ml_nu_step && !(*ml_nu_step > 0.0)) fail("ml_nu_step must be positive");
    if (!(halflambda_mm > 0.0)) fail("halflambda_mm must be positive");
    for (double t : thresholds_mm)
        if (!(t > 0.0)) fail("thresholds_mm must be positive");
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, int trial_id, std::size_t snr_index) {
    const double snr = cfg.snr_grid.at(snr_index);
    const TrialSetup setup = make_setup(cfg, trial_id, snr_index);
    const double mps = cfg.pipeline.phys.meters_per_sample();

    std::optional<ComplexSequence> zc_stream, dzc_stream;
    std::vector<TrialRecord> out;
    for (Algorithm algo : cfg.algorithms) {
        TrialRecord rec;
        rec.trial_id = trial_id;
        rec.snr_db = snr;
        rec.algorithm = algo;
        rec.true_tau = setup.true_tau;
        rec.true_d_m = setup.true_tau * mps;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto& slot = is_zc(algo) ? zc_stream : dzc_stream;
            if (!slot) slot = make_stream(cfg, setup, {cfg.n, cfg.m, is_zc(algo) ? CodeKind::ZC : CodeKind::DZC}, snr);
            const RangeEstimate est = run_algorithm(cfg, setup, algo, *slot);
            rec.d_hat_m = est.d_hat;
            rec.tau_hat = est.d_hat / mps;
            rec.error_mm = std::abs(rec.d_hat_m - rec.true_d_m) * 1000.0;
        } catch (const Error& e) {
            rec.failure = e.what();
            rec.tau_hat = rec.d_hat_m = rec.error_mm = std::nan("");
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (cfg.record_runtime)
            rec.runtime_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t trials = static_cast<std::size_t>(cfg.trials);
    const std::size_t cells = trials * cfg.snr_grid.size();
    const std::size_t per_cell = cfg.algorithms.size();
    std::vector<TrialRecord> records(cells * per_cell);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t cell = next++; cell < cells; cell = next++) {
            try {
                const std::size_t snr_index = cell / trials;
                const int trial = static_cast<int>(cell % trials);
                std::vector<TrialRecord> recs = run_trial(cfg, trial, snr_index);
                for (std::size_t a = 0; a < per_cell; ++a) records[cell * per_cell + a] = std::move(recs[a]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cells;
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cells)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

Summary run_bench(const ExperimentConfig& cfg, const std::string& out_dir) {
    const std::vector<TrialRecord> records = run_experiment(cfg);
    const Summary summary = summarize(records, cfg.halflambda_mm, cfg.thresholds_mm);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir + "': " + ec.message());
    auto open = [&](const char* name) {
        std::ofstream os(std::filesystem::path(out_dir) / name, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorCode::Io, std::string("cannot write ") + name + " in '" + out_dir + "'");
        return os;
    };
    {
        auto os = open("records.csv");
        write_records_csv(os, records);
    }
    {
        auto os = open("summary.csv");
        write_summary_csv(os, summary);
    }
    {
        auto os = open("cdf.csv");
        write_cdf_csv(os, summary);
    }
    return summary;
}

}  // namespace dzc
