#include <cmath>
#include <numbers>
#include <optional>

#include "dzc/error.hpp"
#include "dzc/estimators.hpp"
#include "fft.hpp"

namespace dzc {

namespace {

Complex rotation(double cycles) {
    return std::polar(1.0, 2.0 * std::numbers::pi * (cycles - std::round(cycles)));
}

void require_window(std::span<const Complex> received, const SequenceSpec& spec) {
    spec.validate();
    if (received.size() != static_cast<std::size_t>(spec.n))
        throw Error(ErrorCode::LengthMismatch, "ML search expects a received window of length N");
}

// x[(1 + delta)(k0 + k - tau)] for k in [0, N).
ComplexSequence shifted_template(const SequenceSpec& spec, int tau, double delta,
                                 const std::optional<PeriodicInterpolator>& periodic, std::int64_t k0) {
    const std::size_t n = static_cast<std::size_t>(spec.n);
    if (delta == 0.0) return code_stream(spec, k0 - static_cast<std::int64_t>(tau), n);
    if (!(std::abs(delta) < 0.05)) throw Error(ErrorCode::OutOfRange, "|delta| must be below 0.05");
    ComplexSequence out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = periodic->at((1.0 + delta) * (static_cast<double>(k0 + static_cast<std::int64_t>(k)) - tau));
    return out;
}

std::optional<PeriodicInterpolator> make_periodic(const SequenceSpec& spec) {
    return PeriodicInterpolator(code_stream(spec, 0, static_cast<std::size_t>(code_period(spec))));
}

double metric_of(std::span<const Complex> y, std::span<const Complex> x, double nu) {
    Complex acc{};
    for (std::size_t k = 0; k < y.size(); ++k) acc += y[k] * std::conj(x[k]) * rotation(-nu * static_cast<double>(k));
    return std::abs(acc);
}

// Integer K with K * step == 1, if any.
std::optional<std::size_t> reciprocal_size(double step) {
    const double k = std::round(1.0 / step);
    if (k >= 1.0 && k <= 1e7 && std::abs(k * step - 1.0) < 1e-12) return static_cast<std::size_t>(k);
    return std::nullopt;
}

struct Best {
    bool set = false;
    int tau = 0;
    double nu = 0.0;
    double value = 0.0;

    void offer(int t, double v, double value_in) {
        if (!set || value_in > value || (value_in == value && (t < tau || (t == tau && v < nu)))) {
            set = true;
            tau = t;
            nu = v;
            value = value_in;
        }
    }
};

RangeEstimate to_estimate(const Best& best, const MlSearchConfig& cfg, std::size_t points) {
    RangeEstimate est;
    est.tau_hat = best.tau;
    est.nu_hat = best.nu;
    est.metric = best.value;
    est.d_hat = range_meters(best.tau, 0.0, cfg.phys);
    est.diagnostics["grid_points"] = static_cast<double>(points);
    est.diagnostics["delta_hat"] = cfg.delta_from_nu ? best.nu * cfg.phys.fs / cfg.phys.fc : 0.0;
    return est;
}

}  // namespace

double range_meters(std::int64_t tau_hat, double refinement_mm, const Physical& phys) {
    return static_cast<double>(tau_hat) * phys.c / phys.fs + refinement_mm / 1000.0;
}

MlSearchConfig MlSearchConfig::defaults_for(const SequenceSpec& spec) {
    spec.validate();
    MlSearchConfig cfg;
    for (int t = 0; t < spec.n; ++t) cfg.tau_grid.push_back(t);
    cfg.nu_halfwidth = spec.m / 2.0;
    cfg.nu_step = 1.0 / (4.0 * spec.n);
    return cfg;
}

void MlSearchConfig::validate() const {
    phys.validate();
    if (tau_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty tau grid");
    if (!(nu_step > 0.0) || !std::isfinite(nu_step)) throw Error(ErrorCode::InvalidArgument, "nu_step must be positive");
    if (!(nu_halfwidth > 0.0) || !std::isfinite(nu_halfwidth)) throw Error(ErrorCode::InvalidArgument, "nu_halfwidth must be positive");
    if (!std::isfinite(nu_center)) throw Error(ErrorCode::InvalidArgument, "nu_center must be finite");
    if (2.0 * nu_halfwidth / nu_step > 1e7) throw Error(ErrorCode::InvalidArgument, "nu grid too large");
}

std::vector<double> MlSearchConfig::nu_grid() const {
    const double lo = nu_center - nu_halfwidth;
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * nu_halfwidth / nu_step - 1e-9));
    std::vector<double> grid(count);
    for (std::size_t j = 0; j < count; ++j) grid[j] = lo + static_cast<double>(j) * nu_step;
    return grid;
}

double ml_metric(std::span<const Complex> received, const SequenceSpec& spec, int tau, double nu, double delta,
                 std::int64_t code_offset) {
    require_window(received, spec);
    if (!std::isfinite(nu) || !std::isfinite(delta)) throw Error(ErrorCode::InvalidArgument, "invalid grid point");
    std::optional<PeriodicInterpolator> periodic;
    if (delta != 0.0) periodic = make_periodic(spec);
    const ComplexSequence x = shifted_template(spec, tau, delta, periodic, code_offset);
    return metric_of(received, x, nu);
}

RangeEstimate ml_estimate(std::span<const Complex> received, const SequenceSpec& spec, const MlSearchConfig& cfg) {
    require_window(received, spec);
    cfg.validate();
    const std::vector<double> nus = cfg.nu_grid();
    const std::size_t n = received.size();
    Best best;

    if (cfg.delta_from_nu) {
        const std::optional<PeriodicInterpolator> periodic = make_periodic(spec);
        for (int tau : cfg.tau_grid)
            for (double nu : nus) {
                const double delta = nu * cfg.phys.fs / cfg.phys.fc;
                best.offer(tau, nu, metric_of(received, shifted_template(spec, tau, delta, periodic, cfg.code_offset), nu));
            }
        return to_estimate(best, cfg, cfg.tau_grid.size() * nus.size());
    }

    const std::optional<std::size_t> fold = reciprocal_size(cfg.nu_step);
    ComplexSequence p(n);
    for (int tau : cfg.tau_grid) {
        const ComplexSequence x = shifted_template(spec, tau, 0.0, std::nullopt, cfg.code_offset);
        for (std::size_t k = 0; k < n; ++k) p[k] = received[k] * std::conj(x[k]);
        if (fold) {
            // sum_k p[k] e^{-i2pi(nu0 + j/K)k} = DFT_K of p[k] e^{-i2pi nu0 k} folded mod K
            const std::size_t kk = *fold;
            ComplexSequence q(kk);
            for (std::size_t k = 0; k < n; ++k) q[k % kk] += p[k] * rotation(-nus.front() * static_cast<double>(k));
            const ComplexSequence spectrum = detail::fft(q);
            for (std::size_t j = 0; j < nus.size(); ++j) best.offer(tau, nus[j], std::abs(spectrum[j % kk]));
        } else {
            for (double nu : nus) best.offer(tau, nu, metric_of(p, ComplexSequence(n, Complex(1.0, 0.0)), nu));
        }
    }
    return to_estimate(best, cfg, cfg.tau_grid.size() * nus.size());
}

RangeEstimate ml_estimate_direct(std::span<const Complex> received, const SequenceSpec& spec,
                                 const MlSearchConfig& cfg) {
    require_window(received, spec);
    cfg.validate();
    const std::vector<double> nus = cfg.nu_grid();
    Best best;
    for (int tau : cfg.tau_grid)
        for (double nu : nus) {
            const double delta = cfg.delta_from_nu ? nu * cfg.phys.fs / cfg.phys.fc : 0.0;
            best.offer(tau, nu, ml_metric(received, spec, tau, nu, delta, cfg.code_offset));
        }
    return to_estimate(best, cfg, cfg.tau_grid.size() * nus.size());
}

AmbiguityMap ambiguity_map(const SequenceSpec& spec, int true_tau, double true_nu,
                           std::span<const int> tau_grid, std::span<const double> nu_grid) {
    spec.validate();
    if (!std::isfinite(true_nu)) throw Error(ErrorCode::InvalidArgument, "true_nu must be finite");
    const std::size_t n = static_cast<std::size_t>(spec.n);
    ComplexSequence received = code_stream(spec, -static_cast<std::int64_t>(true_tau), n);
    for (std::size_t k = 0; k < n; ++k) received[k] *= rotation(true_nu * static_cast<double>(k));

    AmbiguityMap map;
    map.tau_grid.assign(tau_grid.begin(), tau_grid.end());
    map.nu_grid.assign(nu_grid.begin(), nu_grid.end());
    map.values.reserve(tau_grid.size() * nu_grid.size());
    ComplexSequence p(n);
    const ComplexSequence ones(n, Complex(1.0, 0.0));
    for (int tau : tau_grid) {
        const ComplexSequence x = shifted_template(spec, tau, 0.0, std::nullopt, 0);
        for (std::size_t k = 0; k < n; ++k) p[k] = received[k] * std::conj(x[k]);
        for (double nu : nu_grid) map.values.push_back(metric_of(p, ones, nu));
    }
    return map;
}

}  // namespace dzc
