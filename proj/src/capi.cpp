#include "dzc/dzc.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "dzc/channel.hpp"
#include "dzc/correlation.hpp"
#include "dzc/error.hpp"
#include "dzc/estimators.hpp"
#include "dzc/harness.hpp"
#include "dzc/iq_file.hpp"
#include "dzc/sequences.hpp"

struct dzc_signal {
    dzc::ComplexSequence samples;
};

struct dzc_pipeline {
    dzc::SequenceSpec spec;
    dzc::PipelineConfig cfg;
    dzc::RangingPipeline impl;
};

namespace {

constexpr const char* kVersion = "0.1.0";

thread_local std::string last_error;

dzc_status fail(dzc_status status, const std::string& message) {
    last_error = message;
    return status;
}

dzc_status status_of(dzc::ErrorCode code) {
    switch (code) {
        case dzc::ErrorCode::InvalidArgument: return DZC_ERR_INVALID_ARGUMENT;
        case dzc::ErrorCode::LengthMismatch: return DZC_ERR_LENGTH_MISMATCH;
        case dzc::ErrorCode::InsufficientLength: return DZC_ERR_INSUFFICIENT_LENGTH;
        case dzc::ErrorCode::OutOfRange: return DZC_ERR_OUT_OF_RANGE;
        case dzc::ErrorCode::Degenerate: return DZC_ERR_DEGENERATE;
        case dzc::ErrorCode::Io: return DZC_ERR_IO;
        case dzc::ErrorCode::Config: return DZC_ERR_CONFIG;
    }
    return DZC_ERR_INTERNAL;
}

// Runs body, translating exceptions into status codes.
template <class F>
dzc_status guarded(F&& body) {
    try {
        body();
        return DZC_OK;
    } catch (const dzc::Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(DZC_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(DZC_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DZC_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw dzc::Error(dzc::ErrorCode::InvalidArgument, what);
}

dzc::SequenceSpec to_spec(const dzc_code* code) {
    require(code != nullptr, "code must not be NULL");
    require(code->kind == DZC_CODE_ZC || code->kind == DZC_CODE_DZC, "unknown code kind");
    dzc::SequenceSpec spec{code->n, code->m, code->kind == DZC_CODE_ZC ? dzc::CodeKind::ZC : dzc::CodeKind::DZC};
    spec.validate();
    return spec;
}

dzc_code from_spec(const dzc::SequenceSpec& spec) {
    return {spec.n, spec.m, spec.kind == dzc::CodeKind::ZC ? DZC_CODE_ZC : DZC_CODE_DZC};
}

dzc::Physical to_phys(const dzc_physical* phys) {
    if (!phys) return {};
    dzc::Physical p{phys->fs, phys->c, phys->fc};
    p.validate();
    return p;
}

std::span<const dzc::Complex> view(const dzc_signal* s) {
    require(s != nullptr, "signal must not be NULL");
    return s->samples;
}

void emit(dzc::ComplexSequence samples, dzc_signal** out) {
    require(out != nullptr, "output pointer must not be NULL");
    *out = new dzc_signal{std::move(samples)};
}

dzc::ChannelOptions channel_options(const dzc_channel_params& p) {
    require(p.boundary == DZC_BOUNDARY_PERIODIC || p.boundary == DZC_BOUNDARY_LINEAR, "unknown boundary");
    dzc::ChannelOptions o;
    o.output_length = p.output_length;
    o.boundary = p.boundary == DZC_BOUNDARY_PERIODIC ? dzc::Boundary::Periodic : dzc::Boundary::Linear;
    return o;
}

dzc_estimate to_estimate(const dzc::RangeEstimate& e, std::size_t window_start) {
    return {e.tau_hat, e.nu_hat, e.d_hat, e.refinement_mm, e.metric, window_start};
}

dzc::PipelineConfig to_pipeline(const dzc_pipeline_params* p) {
    require(p != nullptr, "pipeline params must not be NULL");
    require(p->phase_reference == DZC_PHASE_KNOWN || p->phase_reference == DZC_PHASE_ESTIMATED,
            "unknown phase reference");
    dzc::PipelineConfig c;
    c.segment_length = p->segment_length;
    c.window_step = p->window_step;
    c.candidate_window = p->candidate_window;
    c.valid_bin_ratio = p->valid_bin_ratio;
    c.min_bin_omega = p->min_bin_omega;
    c.max_speed = p->max_speed;
    c.phase_reference = p->phase_reference == DZC_PHASE_KNOWN ? dzc::PhaseReference::Known
                                                              : dzc::PhaseReference::Estimated;
    c.resampler.half_width = p->resampler_half_width;
    c.resampler.kaiser_beta = p->kaiser_beta;
    c.phys = to_phys(&p->phys);
    return c;
}

}  // namespace

extern "C" {

const char* dzc_version(void) { return kVersion; }

const char* dzc_status_string(dzc_status status) {
    switch (status) {
        case DZC_OK: return "ok";
        case DZC_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case DZC_ERR_LENGTH_MISMATCH: return "length_mismatch";
        case DZC_ERR_INSUFFICIENT_LENGTH: return "insufficient_length";
        case DZC_ERR_OUT_OF_RANGE: return "out_of_range";
        case DZC_ERR_DEGENERATE: return "degenerate";
        case DZC_ERR_IO: return "io";
        case DZC_ERR_CONFIG: return "config";
        case DZC_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* dzc_last_error(void) { return last_error.c_str(); }

dzc_physical dzc_physical_default(void) {
    const dzc::Physical p{};
    return {p.fs, p.c, p.fc};
}

dzc_status dzc_signal_create(const dzc_complex* data, size_t length, dzc_signal** out) {
    return guarded([&] {
        require(data != nullptr || length == 0, "data must not be NULL");
        dzc::ComplexSequence s(length);
        for (size_t k = 0; k < length; ++k) s[k] = {data[k].re, data[k].im};
        emit(std::move(s), out);
    });
}

size_t dzc_signal_length(const dzc_signal* signal) { return signal ? signal->samples.size() : 0; }

const dzc_complex* dzc_signal_data(const dzc_signal* signal) {
    if (!signal || signal->samples.empty()) return nullptr;
    // std::complex<double> is layout compatible with double[2]
    return reinterpret_cast<const dzc_complex*>(signal->samples.data());
}

void dzc_signal_free(dzc_signal* signal) { delete signal; }

dzc_status dzc_code_validate(const dzc_code* code) {
    return guarded([&] { (void)to_spec(code); });
}

dzc_status dzc_code_period(const dzc_code* code, int64_t* period) {
    return guarded([&] {
        require(period != nullptr, "period must not be NULL");
        *period = dzc::code_period(to_spec(code));
    });
}

dzc_status dzc_code_generate(const dzc_code* code, int64_t first, size_t length, dzc_signal** out) {
    return guarded([&] { emit(dzc::code_stream(to_spec(code), first, length), out); });
}

dzc_status dzc_differential_decode(const dzc_signal* x, size_t step, dzc_signal** out) {
    return guarded([&] { emit(dzc::differential_decode(view(x), step), out); });
}

dzc_channel_params dzc_channel_params_default(void) {
    return {0.0, 0.0, 0.0, 0.0, 1.0, dzc::kNoNoise, 0, 0, DZC_BOUNDARY_PERIODIC};
}

dzc_status dzc_channel_fixed(const dzc_signal* x, const dzc_channel_params* params, dzc_signal** out) {
    return guarded([&] {
        require(params != nullptr, "channel params must not be NULL");
        dzc::ChannelSpec ch;
        ch.tau_samples = params->tau;
        ch.delta = params->delta;
        ch.nu = params->nu;
        ch.theta = params->theta;
        ch.alpha = params->alpha;
        ch.snr_db = params->snr_db;
        ch.seed = params->seed;
        emit(dzc::apply_channel_fixed(view(x), ch, channel_options(*params)), out);
    });
}

dzc_status dzc_channel_moving(const dzc_signal* x, const dzc_channel_params* params, dzc_velocity_fn velocity,
                              void* user, const dzc_physical* phys, dzc_signal** out) {
    return guarded([&] {
        require(params != nullptr, "channel params must not be NULL");
        require(velocity != nullptr, "velocity callback must not be NULL");
        dzc::MotionProfile motion;
        motion.velocity_fn = [velocity, user](double t) { return velocity(t, user); };
        motion.phys = to_phys(phys);
        motion.tau0_samples = params->tau;
        emit(dzc::apply_channel_moving(view(x), motion, params->theta, params->alpha, params->snr_db, params->seed,
                                       channel_options(*params)),
             out);
    });
}

dzc_status dzc_correlate(dzc_correlator kind, const dzc_signal* templ, const dzc_signal* received,
                         double* magnitudes, size_t* peak_index, double* peak_magnitude) {
    return guarded([&] {
        require(kind == DZC_CORR_CIRCULAR || kind == DZC_CORR_DIFFERENTIAL, "unknown correlator");
        const dzc::CorrelationResult r = kind == DZC_CORR_CIRCULAR ? dzc::circular_xcorr(view(templ), view(received))
                                                                   : dzc::diff_sliding_corr(view(templ), view(received));
        if (magnitudes)
            for (size_t k = 0; k < r.values.size(); ++k) magnitudes[k] = std::abs(r.values[k]);
        if (peak_index) *peak_index = r.peak_index;
        if (peak_magnitude) *peak_magnitude = r.peak_magnitude;
    });
}

dzc_ml_params dzc_ml_params_default(void) { return {0.0, 0.0, 0.0, 0}; }

dzc_status dzc_estimate_delay(dzc_algorithm algo, const dzc_code* code, const dzc_signal* received, int64_t first,
                              const dzc_physical* phys, const dzc_ml_params* ml, dzc_estimate* out) {
    return guarded([&] {
        require(out != nullptr, "estimate output must not be NULL");
        const dzc::SequenceSpec spec = to_spec(code);
        const dzc::Physical p = to_phys(phys);
        const std::span<const dzc::Complex> y = view(received);
        const auto n = static_cast<std::size_t>(spec.n);
        if (y.size() < n) throw dzc::Error(dzc::ErrorCode::InsufficientLength, "received signal shorter than N");
        const std::span<const dzc::Complex> window = y.first(n);
        dzc::RangeEstimate est;
        switch (algo) {
            case DZC_ALGO_XCORR: {
                const dzc::CorrelationResult r = dzc::circular_xcorr(dzc::code_stream(spec, first, n), window);
                est.tau_hat = static_cast<std::int64_t>(r.peak_index);
                est.metric = r.peak_magnitude;
                est.d_hat = dzc::range_meters(est.tau_hat, 0.0, p);
                break;
            }
            case DZC_ALGO_DIFF: {
                if (y.size() == n) {
                    // no extra sample: treat the window as one circular period
                    const dzc::CorrelationResult r =
                        dzc::diff_sliding_corr(dzc::code_stream(spec, first, n), window);
                    est.tau_hat = static_cast<std::int64_t>(r.peak_index);
                    est.metric = r.peak_magnitude;
                    est.d_hat = dzc::range_meters(est.tau_hat, 0.0, p);
                } else {
                    // the stream-linear form needs the code at the true stream indices
                    dzc::ComplexSequence padded;
                    std::span<const dzc::Complex> stream = y;
                    std::size_t start = 0;
                    if (first != 0) {
                        require(first > 0, "first must be nonnegative for the differential estimator");
                        start = static_cast<std::size_t>(first);
                        padded.assign(start, dzc::Complex{});
                        padded.insert(padded.end(), y.begin(), y.end());
                        stream = padded;
                    }
                    dzc::PipelineConfig cfg;
                    cfg.phys = p;
                    est = dzc::initial_tof_window(stream, spec, start, cfg);
                }
                break;
            }
            case DZC_ALGO_ML: {
                dzc::MlSearchConfig cfg = dzc::MlSearchConfig::defaults_for(spec);
                if (ml) {
                    cfg.nu_center = ml->nu_center;
                    if (ml->nu_halfwidth > 0.0) cfg.nu_halfwidth = ml->nu_halfwidth;
                    if (ml->nu_step > 0.0) cfg.nu_step = ml->nu_step;
                    cfg.delta_from_nu = ml->delta_from_nu != 0;
                }
                cfg.code_offset = first;
                cfg.phys = p;
                est = dzc::ml_estimate(window, spec, cfg);
                break;
            }
            default:
                require(false, "unknown algorithm");
        }
        *out = to_estimate(est, 0);
    });
}

dzc_pipeline_params dzc_pipeline_params_default(void) {
    const dzc::PipelineConfig c{};
    return {c.segment_length,
            c.window_step,
            c.candidate_window,
            c.valid_bin_ratio,
            c.min_bin_omega,
            c.max_speed,
            c.phase_reference == dzc::PhaseReference::Known ? DZC_PHASE_KNOWN : DZC_PHASE_ESTIMATED,
            c.resampler.half_width,
            c.resampler.kaiser_beta,
            {c.phys.fs, c.phys.c, c.phys.fc}};
}

dzc_status dzc_pipeline_create(const dzc_code* code, const dzc_pipeline_params* params, dzc_pipeline** out) {
    return guarded([&] {
        require(out != nullptr, "output pointer must not be NULL");
        const dzc::SequenceSpec spec = to_spec(code);
        if (spec.kind != dzc::CodeKind::DZC)
            throw dzc::Error(dzc::ErrorCode::InvalidArgument, "the pipeline needs a DZC code");
        const dzc::PipelineConfig cfg = to_pipeline(params);
        *out = new dzc_pipeline{spec, cfg, dzc::RangingPipeline(spec, cfg)};
    });
}

void dzc_pipeline_free(dzc_pipeline* pipeline) { delete pipeline; }

dzc_status dzc_pipeline_window_count(const dzc_pipeline* pipeline, size_t stream_length, size_t* count) {
    return guarded([&] {
        require(pipeline != nullptr && count != nullptr, "arguments must not be NULL");
        *count = pipeline->impl.window_starts(stream_length).size();
    });
}

dzc_status dzc_pipeline_process(dzc_pipeline* pipeline, const dzc_signal* stream, dzc_estimate* out, size_t capacity,
                                size_t* count) {
    return guarded([&] {
        require(pipeline != nullptr && count != nullptr, "arguments must not be NULL");
        require(out != nullptr || capacity == 0, "output must not be NULL when capacity > 0");
        const std::span<const dzc::Complex> y = view(stream);
        const std::vector<std::size_t> starts = pipeline->impl.window_starts(y.size());
        const std::vector<dzc::RangeEstimate> est = pipeline->impl.process(y);
        for (size_t i = 0; i < est.size() && i < capacity; ++i) out[i] = to_estimate(est[i], starts[i]);
        *count = est.size();
    });
}

dzc_status dzc_ambiguity(const dzc_code* code, int true_tau, double true_nu, const int* tau_grid, size_t n_tau,
                         const double* nu_grid, size_t n_nu, double* out) {
    return guarded([&] {
        require(tau_grid != nullptr && nu_grid != nullptr && out != nullptr, "grids and output must not be NULL");
        const dzc::AmbiguityMap map =
            dzc::ambiguity_map(to_spec(code), true_tau, true_nu, {tau_grid, n_tau}, {nu_grid, n_nu});
        std::memcpy(out, map.values.data(), map.values.size() * sizeof(double));
    });
}

dzc_status dzc_iq_write(const char* path, const dzc_signal* samples, const dzc_physical* phys, const dzc_code* code) {
    return guarded([&] {
        require(path != nullptr, "path must not be NULL");
        dzc::IqMeta meta;
        meta.phys = to_phys(phys);
        if (code) meta.code = to_spec(code);
        dzc::write_iq(path, view(samples), meta);
    });
}

dzc_status dzc_iq_read(const char* path, dzc_signal** samples, dzc_physical* phys, dzc_code* code, int* has_code) {
    return guarded([&] {
        require(path != nullptr, "path must not be NULL");
        dzc::IqFile file = dzc::read_iq(path);
        if (phys) *phys = {file.meta.phys.fs, file.meta.phys.c, file.meta.phys.fc};
        if (has_code) *has_code = file.meta.code.has_value() ? 1 : 0;
        if (code && file.meta.code) *code = from_spec(*file.meta.code);
        emit(std::move(file.samples), samples);
    });
}

dzc_status dzc_bench_run(const char* config_path, const char* out_dir, unsigned threads, char** summary_csv) {
    return guarded([&] {
        require(config_path != nullptr && out_dir != nullptr, "paths must not be NULL");
        dzc::ExperimentConfig cfg = dzc::load_experiment_config(config_path);
        if (threads > 0) cfg.threads = threads;
        const dzc::Summary summary = dzc::run_bench(cfg, out_dir);
        if (summary_csv) {
            std::ostringstream os;
            dzc::write_summary_csv(os, summary);
            const std::string text = os.str();
            char* copy = new char[text.size() + 1];
            std::memcpy(copy, text.c_str(), text.size() + 1);
            *summary_csv = copy;
        }
    });
}

void dzc_string_free(char* s) { delete[] s; }

}  // extern "C"
