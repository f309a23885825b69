/* C interface to the DZC ranging library.
 *
 * Every call returns a dzc_status. On failure the message for the calling thread is
 * available from dzc_last_error() until the next failing call on that thread. Objects
 * returned through pointer arguments are owned by the caller and released with the
 * matching *_free function.
 */
#ifndef DZC_DZC_H
#define DZC_DZC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DZC_BUILDING_LIBRARY)
#    define DZC_API __declspec(dllexport)
#  else
#    define DZC_API __declspec(dllimport)
#  endif
#else
#  define DZC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dzc_status {
    DZC_OK = 0,
    DZC_ERR_INVALID_ARGUMENT = 1,
    DZC_ERR_LENGTH_MISMATCH = 2,
    DZC_ERR_INSUFFICIENT_LENGTH = 3,
    DZC_ERR_OUT_OF_RANGE = 4,
    DZC_ERR_DEGENERATE = 5,
    DZC_ERR_IO = 6,
    DZC_ERR_CONFIG = 7,
    DZC_ERR_INTERNAL = 8
} dzc_status;

typedef struct dzc_complex {
    double re;
    double im;
} dzc_complex;

typedef enum dzc_code_kind { DZC_CODE_ZC = 0, DZC_CODE_DZC = 1 } dzc_code_kind;

typedef struct dzc_code {
    int n;
    int m;
    dzc_code_kind kind;
} dzc_code;

typedef struct dzc_physical {
    double fs; /* Hz */
    double c;  /* m/s */
    double fc; /* Hz */
} dzc_physical;

/* Owned complex buffer. */
typedef struct dzc_signal dzc_signal;

DZC_API const char* dzc_version(void);
DZC_API const char* dzc_status_string(dzc_status status);
/* Message of the last failing call on this thread, "" if none. */
DZC_API const char* dzc_last_error(void);

DZC_API dzc_physical dzc_physical_default(void);

/* ---- signals */

DZC_API dzc_status dzc_signal_create(const dzc_complex* data, size_t length, dzc_signal** out);
DZC_API size_t dzc_signal_length(const dzc_signal* signal);
/* Valid until the signal is freed. NULL for an empty signal. */
DZC_API const dzc_complex* dzc_signal_data(const dzc_signal* signal);
DZC_API void dzc_signal_free(dzc_signal* signal);

/* ---- codes */

DZC_API dzc_status dzc_code_validate(const dzc_code* code);
/* N for ZC; the repetition period of the emitted stream for DZC. */
DZC_API dzc_status dzc_code_period(const dzc_code* code, int64_t* period);
/* Symbols first .. first + length - 1 of the periodically emitted code. */
DZC_API dzc_status dzc_code_generate(const dzc_code* code, int64_t first, size_t length, dzc_signal** out);
/* out[k] = conj(x[k]) * x[(k + step) mod L]. */
DZC_API dzc_status dzc_differential_decode(const dzc_signal* x, size_t step, dzc_signal** out);

/* ---- channel */

typedef enum dzc_boundary { DZC_BOUNDARY_PERIODIC = 0, DZC_BOUNDARY_LINEAR = 1 } dzc_boundary;

typedef struct dzc_channel_params {
    double tau;    /* samples */
    double delta;  /* time compression */
    double nu;     /* cycles/sample */
    double theta;  /* rad */
    double alpha;
    double snr_db; /* +inf: no noise */
    uint64_t seed;
    size_t output_length; /* 0: input length */
    dzc_boundary boundary;
} dzc_channel_params;

DZC_API dzc_channel_params dzc_channel_params_default(void);
DZC_API dzc_status dzc_channel_fixed(const dzc_signal* x, const dzc_channel_params* params, dzc_signal** out);

/* Radial velocity in m/s (positive closing) at receive sample t. */
typedef double (*dzc_velocity_fn)(double t, void* user);

/* Time-varying delay from a velocity profile; params->tau is the delay at sample 0,
 * delta and nu are ignored. */
DZC_API dzc_status dzc_channel_moving(const dzc_signal* x, const dzc_channel_params* params,
                                      dzc_velocity_fn velocity, void* user, const dzc_physical* phys,
                                      dzc_signal** out);

/* ---- correlation */

typedef enum dzc_correlator { DZC_CORR_CIRCULAR = 0, DZC_CORR_DIFFERENTIAL = 1 } dzc_correlator;

/* Circular (or step-1 differential) correlation of equal-length signals. magnitudes may
 * be NULL; otherwise it receives length entries. */
DZC_API dzc_status dzc_correlate(dzc_correlator kind, const dzc_signal* templ, const dzc_signal* received,
                                 double* magnitudes, size_t* peak_index, double* peak_magnitude);

/* ---- estimators */

typedef struct dzc_estimate {
    int64_t tau_hat;      /* samples */
    double nu_hat;        /* cycles/sample */
    double d_hat_m;
    double refinement_mm;
    double metric;
    size_t window_start;
} dzc_estimate;

/* Received samples are stream indices first .. first + length - 1 of the emitted code.
 * XCORR and ML use the first N samples. DIFF needs N + 1 samples, or exactly N for a
 * circular differential correlation. */
typedef enum dzc_algorithm { DZC_ALGO_XCORR = 0, DZC_ALGO_DIFF = 1, DZC_ALGO_ML = 2 } dzc_algorithm;

typedef struct dzc_ml_params {
    double nu_center;
    double nu_halfwidth; /* <= 0: M/2 */
    double nu_step;      /* <= 0: 1/(4N) */
    int delta_from_nu;
} dzc_ml_params;

DZC_API dzc_ml_params dzc_ml_params_default(void);

/* ml may be NULL for defaults; it is ignored by the other algorithms. */
DZC_API dzc_status dzc_estimate_delay(dzc_algorithm algo, const dzc_code* code, const dzc_signal* received,
                                      int64_t first, const dzc_physical* phys, const dzc_ml_params* ml,
                                      dzc_estimate* out);

typedef enum dzc_phase_reference { DZC_PHASE_KNOWN = 0, DZC_PHASE_ESTIMATED = 1 } dzc_phase_reference;

typedef struct dzc_pipeline_params {
    size_t segment_length; /* 0: N */
    size_t window_step;
    size_t candidate_window;
    double valid_bin_ratio;
    double min_bin_omega;
    double max_speed;
    dzc_phase_reference phase_reference;
    int resampler_half_width;
    double kaiser_beta;
    dzc_physical phys;
} dzc_pipeline_params;

typedef struct dzc_pipeline dzc_pipeline;

DZC_API dzc_pipeline_params dzc_pipeline_params_default(void);
DZC_API dzc_status dzc_pipeline_create(const dzc_code* code, const dzc_pipeline_params* params, dzc_pipeline** out);
DZC_API void dzc_pipeline_free(dzc_pipeline* pipeline);
/* Number of windows dzc_pipeline_process emits for a stream of this length. */
DZC_API dzc_status dzc_pipeline_window_count(const dzc_pipeline* pipeline, size_t stream_length, size_t* count);
/* Writes up to capacity estimates and sets *count to the number of windows. */
DZC_API dzc_status dzc_pipeline_process(dzc_pipeline* pipeline, const dzc_signal* stream, dzc_estimate* out,
                                        size_t capacity, size_t* count);

/* ---- ambiguity */

/* out receives n_tau * n_nu values, tau outer. */
DZC_API dzc_status dzc_ambiguity(const dzc_code* code, int true_tau, double true_nu, const int* tau_grid,
                                 size_t n_tau, const double* nu_grid, size_t n_nu, double* out);

/* ---- IQ files */

/* code may be NULL. */
DZC_API dzc_status dzc_iq_write(const char* path, const dzc_signal* samples, const dzc_physical* phys,
                                const dzc_code* code);
/* phys, code and has_code may be NULL when not wanted. */
DZC_API dzc_status dzc_iq_read(const char* path, dzc_signal** samples, dzc_physical* phys, dzc_code* code,
                               int* has_code);

/* ---- Monte-Carlo bench */

/* Runs the experiment in config_path and writes records.csv, summary.csv and cdf.csv to
 * out_dir. threads > 0 overrides the configured worker count. summary_csv may be NULL;
 * otherwise it receives the summary table, released with dzc_string_free. */
DZC_API dzc_status dzc_bench_run(const char* config_path, const char* out_dir, unsigned threads,
                                 char** summary_csv);
DZC_API void dzc_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DZC_DZC_H */
