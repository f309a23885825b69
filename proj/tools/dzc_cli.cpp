// dzc: command-line front end over the C API.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
// Errors go to stderr as a single line: "dzc: error[<tag>]: <message>".

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dzc/dzc.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
    int exit_code;
    std::string tag;
    std::string message;
};

[[noreturn]] void usage_error(const std::string& message) { throw Failure{kExitUsage, "usage", message}; }

// Input-side problems (bad flags, unreadable inputs) are usage errors; the rest are runtime.
void check(dzc_status status, bool reading_input = false) {
    if (status == DZC_OK) return;
    const bool usage = status == DZC_ERR_INVALID_ARGUMENT || status == DZC_ERR_CONFIG ||
                       (status == DZC_ERR_IO && reading_input);
    throw Failure{usage ? kExitUsage : kExitRuntime, dzc_status_string(status), dzc_last_error()};
}

struct Signal {
    dzc_signal* ptr = nullptr;
    Signal() = default;
    Signal(const Signal&) = delete;
    Signal& operator=(const Signal&) = delete;
    ~Signal() { dzc_signal_free(ptr); }
};

struct Pipeline {
    dzc_pipeline* ptr = nullptr;
    ~Pipeline() { dzc_pipeline_free(ptr); }
};

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_real(const std::string& text, const char* flag) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        usage_error(std::string(flag) + " expects a number, got '" + text + "'");
    return v;
}

dzc_code_kind parse_kind(const std::string& text) {
    if (text == "zc") return DZC_CODE_ZC;
    if (text == "dzc") return DZC_CODE_DZC;
    usage_error("--kind must be zc or dzc");
}

// Physical constants: sidecar values unless a flag overrides them.
struct PhysFlags {
    std::optional<double> fs, fc, c;
    void add(CLI::App* app) {
        app->add_option("--fs", fs, "sample rate, Hz");
        app->add_option("--fc", fc, "carrier frequency, Hz");
        app->add_option("--c", c, "propagation speed, m/s");
    }
    dzc_physical resolve(dzc_physical base) const {
        if (fs) base.fs = *fs;
        if (fc) base.fc = *fc;
        if (c) base.c = *c;
        return base;
    }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Failure{kExitRuntime, "io", "cannot write '" + path + "'"};
    return file;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
    int n = 0, m = 1;
    std::string kind = "dzc";
    std::size_t length = 0;
    long long first = 0;
    std::string out;
    PhysFlags phys;
};

void run_gen(const GenArgs& a) {
    const dzc_code code{a.n, a.m, parse_kind(a.kind)};
    check(dzc_code_validate(&code));
    Signal s;
    check(dzc_code_generate(&code, a.first, a.length ? a.length : static_cast<std::size_t>(a.n), &s.ptr));
    const dzc_physical phys = a.phys.resolve(dzc_physical_default());
    check(dzc_iq_write(a.out.c_str(), s.ptr, &phys, &code));
}

// ---------------------------------------------------------------- simulate

struct SimArgs {
    std::string in, out;
    double tau = 0.0, delta = 0.0, nu = 0.0, theta = 0.0, alpha = 1.0;
    std::string snr = "inf";
    std::uint64_t seed = 0;
    std::size_t length = 0;
    std::string boundary = "periodic";
    std::optional<double> velocity;
};

double constant_velocity(double, void* user) { return *static_cast<const double*>(user); }

void run_simulate(const SimArgs& a) {
    Signal x;
    dzc_physical phys{};
    dzc_code code{};
    int has_code = 0;
    check(dzc_iq_read(a.in.c_str(), &x.ptr, &phys, &code, &has_code), true);

    dzc_channel_params p = dzc_channel_params_default();
    p.tau = a.tau;
    p.delta = a.delta;
    p.nu = a.nu;
    p.theta = a.theta;
    p.alpha = a.alpha;
    p.snr_db = parse_real(a.snr, "--snr");
    p.seed = a.seed;
    p.output_length = a.length;
    if (a.boundary == "periodic") p.boundary = DZC_BOUNDARY_PERIODIC;
    else if (a.boundary == "linear") p.boundary = DZC_BOUNDARY_LINEAR;
    else usage_error("--boundary must be periodic or linear");

    Signal y;
    if (a.velocity) {
        double v = *a.velocity;
        check(dzc_channel_moving(x.ptr, &p, constant_velocity, &v, &phys, &y.ptr));
    } else {
        check(dzc_channel_fixed(x.ptr, &p, &y.ptr));
    }
    check(dzc_iq_write(a.out.c_str(), y.ptr, &phys, has_code ? &code : nullptr));
}

// ---------------------------------------------------------------- estimate

struct EstArgs {
    std::string in, out;
    std::optional<int> n, m;
    std::optional<std::string> kind;
    std::string algo = "diff";
    long long first = 0;
    PhysFlags phys;
    double nu_center = 0.0;
    double nu_halfwidth = 0.0, nu_step = 0.0;
    bool delta_from_nu = false;
    std::size_t window_step = 0, segment_length = 0, candidate_window = 0;
    std::optional<double> min_bin_omega;
};

void run_estimate(const EstArgs& a) {
    Signal y;
    dzc_physical file_phys{};
    dzc_code code{0, 1, DZC_CODE_DZC};
    int has_code = 0;
    check(dzc_iq_read(a.in.c_str(), &y.ptr, &file_phys, &code, &has_code), true);
    if (a.n) code.n = *a.n;
    if (a.m) code.m = *a.m;
    if (a.kind) code.kind = parse_kind(*a.kind);
    if (!has_code && !a.n) usage_error("--n is required when the sidecar names no code");
    check(dzc_code_validate(&code));
    const dzc_physical phys = a.phys.resolve(file_phys);

    std::vector<dzc_estimate> rows;
    if (a.algo == "pipeline") {
        dzc_pipeline_params p = dzc_pipeline_params_default();
        p.phys = phys;
        if (a.window_step) p.window_step = a.window_step;
        if (a.segment_length) p.segment_length = a.segment_length;
        if (a.candidate_window) p.candidate_window = a.candidate_window;
        if (a.min_bin_omega) p.min_bin_omega = *a.min_bin_omega;
        Pipeline pipe;
        check(dzc_pipeline_create(&code, &p, &pipe.ptr));
        std::size_t count = 0;
        check(dzc_pipeline_window_count(pipe.ptr, dzc_signal_length(y.ptr), &count));
        rows.resize(count);
        check(dzc_pipeline_process(pipe.ptr, y.ptr, rows.data(), rows.size(), &count));
    } else {
        dzc_algorithm algo;
        if (a.algo == "diff") algo = DZC_ALGO_DIFF;
        else if (a.algo == "ml") algo = DZC_ALGO_ML;
        else if (a.algo == "xcorr") algo = DZC_ALGO_XCORR;
        else usage_error("--algo must be diff, ml, xcorr or pipeline");
        dzc_ml_params ml = dzc_ml_params_default();
        ml.nu_center = a.nu_center;
        ml.nu_halfwidth = a.nu_halfwidth;
        ml.nu_step = a.nu_step;
        ml.delta_from_nu = a.delta_from_nu ? 1 : 0;
        dzc_estimate est{};
        check(dzc_estimate_delay(algo, &code, y.ptr, a.first, &phys, &ml, &est));
        rows.push_back(est);
    }

    std::ofstream file;
    std::ostream& os = open_output(a.out, file);
    os << "algorithm,window_start,tau_hat,nu_hat,d_hat_m,refinement_mm,metric\n";
    for (const dzc_estimate& e : rows)
        os << a.algo << ',' << e.window_start << ',' << e.tau_hat << ',' << number(e.nu_hat) << ','
           << number(e.d_hat_m) << ',' << number(e.refinement_mm) << ',' << number(e.metric) << '\n';
    if (!os) throw Failure{kExitRuntime, "io", "write failed"};
}

// ---------------------------------------------------------------- ambiguity

struct AmbArgs {
    int n = 0, m = 1;
    std::string kind = "dzc";
    int tau = 0;
    double nu = 0.0;
    std::optional<int> tau_min, tau_max;
    std::optional<double> nu_halfwidth, nu_step;
    std::string out;
};

void run_ambiguity(const AmbArgs& a) {
    const dzc_code code{a.n, a.m, parse_kind(a.kind)};
    check(dzc_code_validate(&code));
    const int lo = a.tau_min.value_or(0);
    const int hi = a.tau_max.value_or(a.n - 1);
    if (hi < lo) usage_error("--tau-max must not be below --tau-min");
    const double half = a.nu_halfwidth.value_or(a.m / 2.0);
    const double step = a.nu_step.value_or(1.0 / (4.0 * a.n));
    if (!(half >= 0.0) || !(step > 0.0)) usage_error("--nu-halfwidth must be >= 0 and --nu-step > 0");

    std::vector<int> taus;
    for (int t = lo; t <= hi; ++t) taus.push_back(t);
    // half-open grid around the true offset; a zero halfwidth gives the single column nu
    std::vector<double> nus;
    const long long count = half > 0.0 ? static_cast<long long>(std::ceil(2.0 * half / step - 1e-9)) : 1;
    for (long long i = 0; i < count; ++i) nus.push_back(a.nu - half + static_cast<double>(i) * step);

    std::vector<double> values(taus.size() * nus.size());
    check(dzc_ambiguity(&code, a.tau, a.nu, taus.data(), taus.size(), nus.data(), nus.size(), values.data()));

    std::ofstream file;
    std::ostream& os = open_output(a.out, file);
    os << "tau";
    for (double v : nus) os << ',' << number(v);
    os << '\n';
    for (std::size_t i = 0; i < taus.size(); ++i) {
        os << taus[i];
        for (std::size_t j = 0; j < nus.size(); ++j) os << ',' << number(values[i * nus.size() + j]);
        os << '\n';
    }
    if (!os) throw Failure{kExitRuntime, "io", "write failed"};
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string config, out_dir;
    unsigned threads = 0;
    bool quiet = false;
};

void run_bench(const BenchArgs& a) {
    char* summary = nullptr;
    const dzc_status st = dzc_bench_run(a.config.c_str(), a.out_dir.c_str(), a.threads, &summary);
    // a config that cannot be read is the caller's mistake
    if (st == DZC_ERR_IO) {
        std::ifstream probe(a.config);
        check(st, !probe.good());
    }
    check(st);
    if (!a.quiet) std::cout << summary;
    dzc_string_free(summary);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DZC ultrasonic ranging toolkit"};
    app.set_version_flag("--version", std::string(dzc_version()));
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "write a code sequence as an IQ file");
    g->add_option("--n", gen.n, "code length N")->required();
    g->add_option("--m", gen.m, "root M, coprime to N");
    g->add_option("--kind", gen.kind, "zc or dzc");
    g->add_option("--length", gen.length, "samples to emit (default N)");
    g->add_option("--first", gen.first, "stream index of the first sample");
    g->add_option("--out", gen.out, "output IQ file")->required();
    gen.phys.add(g);

    SimArgs sim;
    auto* s = app.add_subcommand("simulate", "pass an IQ file through the channel model");
    s->add_option("--in", sim.in, "input IQ file")->required();
    s->add_option("--out", sim.out, "output IQ file")->required();
    s->add_option("--tau", sim.tau, "delay, samples");
    s->add_option("--delta", sim.delta, "time compression");
    s->add_option("--nu", sim.nu, "carrier offset, cycles/sample");
    s->add_option("--theta", sim.theta, "carrier phase, rad");
    s->add_option("--alpha", sim.alpha, "path gain");
    s->add_option("--snr", sim.snr, "per-sample SNR in dB, or inf");
    s->add_option("--seed", sim.seed, "noise seed");
    s->add_option("--length", sim.length, "output samples (default: input length)");
    s->add_option("--boundary", sim.boundary, "periodic or linear");
    s->add_option("--velocity", sim.velocity, "constant radial velocity in m/s, closing positive; replaces --delta/--nu");

    EstArgs est;
    auto* e = app.add_subcommand("estimate", "estimate the delay in an IQ file");
    e->add_option("--in", est.in, "input IQ file")->required();
    e->add_option("--out", est.out, "output CSV (default stdout)");
    e->add_option("--n", est.n, "code length (default from sidecar)");
    e->add_option("--m", est.m, "code root (default from sidecar)");
    e->add_option("--kind", est.kind, "zc or dzc (default from sidecar)");
    e->add_option("--algo", est.algo, "diff, ml, xcorr or pipeline");
    e->add_option("--first", est.first, "stream index of the first sample");
    e->add_option("--nu-center", est.nu_center, "ml: center of the carrier offset grid");
    e->add_option("--nu-halfwidth", est.nu_halfwidth, "ml: grid halfwidth (default M/2)");
    e->add_option("--nu-step", est.nu_step, "ml: grid step (default 1/(4N))");
    e->add_flag("--delta-from-nu", est.delta_from_nu, "ml: tie the time compression to the carrier offset");
    e->add_option("--window-step", est.window_step, "pipeline: samples between windows");
    e->add_option("--segment-length", est.segment_length, "pipeline: Doppler sampling interval, divides N");
    e->add_option("--candidate-window", est.candidate_window, "pipeline: candidate offsets searched");
    e->add_option("--min-bin-omega", est.min_bin_omega, "pipeline: lowest bin frequency used, rad/sample");
    est.phys.add(e);

    AmbArgs amb;
    auto* a = app.add_subcommand("ambiguity", "write the delay/offset ambiguity surface as a CSV matrix");
    a->add_option("--n", amb.n, "code length N")->required();
    a->add_option("--m", amb.m, "root M");
    a->add_option("--kind", amb.kind, "zc or dzc");
    a->add_option("--tau", amb.tau, "true delay, samples");
    a->add_option("--nu", amb.nu, "true carrier offset, cycles/sample");
    a->add_option("--tau-min", amb.tau_min, "first delay row (default 0)");
    a->add_option("--tau-max", amb.tau_max, "last delay row (default N-1)");
    a->add_option("--nu-halfwidth", amb.nu_halfwidth, "offset grid halfwidth (default M/2)");
    a->add_option("--nu-step", amb.nu_step, "offset grid step (default 1/(4N))");
    a->add_option("--out", amb.out, "output CSV (default stdout)");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "run a Monte-Carlo experiment");
    b->add_option("--config", bench.config, "key=value or JSON experiment file")->required();
    b->add_option("--out-dir", bench.out_dir, "directory for records.csv, summary.csv, cdf.csv")->required();
    b->add_option("--threads", bench.threads, "worker threads (default from config)");
    b->add_flag("--quiet", bench.quiet, "do not print the summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForVersion& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        std::cerr << "dzc: error[usage]: " << ex.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*g) run_gen(gen);
        else if (*s) run_simulate(sim);
        else if (*e) run_estimate(est);
        else if (*a) run_ambiguity(amb);
        else if (*b) run_bench(bench);
    } catch (const Failure& f) {
        std::cerr << "dzc: error[" << f.tag << "]: " << f.message << '\n';
        return f.exit_code;
    } catch (const std::exception& ex) {
        std::cerr << "dzc: error[internal]: " << ex.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
