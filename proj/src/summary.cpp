#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "dzc/error.hpp"
#include "dzc/harness.hpp"
#include "text_util.hpp"

namespace dzc {

double exact_sum(const std::vector<double>& values) {
    // Shewchuk's partials with a correctly rounded final step.
    std::vector<double> partials;
    double plain = 0.0;
    for (double x : values) {
        plain += x;
        if (!std::isfinite(x)) continue;
        std::size_t i = 0;
        for (double y : partials) {
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    if (!std::isfinite(plain)) return plain;
    if (partials.empty()) return 0.0;

    std::size_t n = partials.size();
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi) hi = x;
    }
    return hi;
}

const SummaryRow* Summary::find(Algorithm a, double snr_db) const {
    for (const SummaryRow& row : rows)
        if (row.algorithm == a && row.snr_db == snr_db) return &row;
    return nullptr;
}

Summary summarize(const std::vector<TrialRecord>& records, double halflambda_mm,
                  const std::vector<double>& thresholds_mm) {
    if (records.empty()) throw Error(ErrorCode::InvalidArgument, "summarize needs at least one record");
    Summary summary;
    summary.halflambda_mm = halflambda_mm;
    summary.thresholds_mm = thresholds_mm;

    struct Acc {
        std::vector<double> sq_samples, sq_mm;
        std::size_t count = 0, failures = 0, within_half = 0;
        std::vector<std::size_t> within;
    };
    auto key_less = [](const std::pair<int, double>& a, const std::pair<int, double>& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    };
    std::map<std::pair<int, double>, Acc, decltype(key_less)> groups(key_less);
    for (const TrialRecord& r : records) {
        Acc& acc = groups[{static_cast<int>(r.algorithm), r.snr_db}];
        acc.within.resize(thresholds_mm.size(), 0);
        ++acc.count;
        if (!r.failure.empty() || !std::isfinite(r.error_mm)) {
            ++acc.failures;
            continue;
        }
        const double e_samples = r.tau_hat - r.true_tau;
        acc.sq_samples.push_back(e_samples * e_samples);
        acc.sq_mm.push_back(r.error_mm * r.error_mm);
        if (r.error_mm < halflambda_mm) ++acc.within_half;
        for (std::size_t i = 0; i < thresholds_mm.size(); ++i)
            if (r.error_mm < thresholds_mm[i]) ++acc.within[i];
    }

    for (const auto& [key, acc] : groups) {
        SummaryRow row;
        row.algorithm = static_cast<Algorithm>(key.first);
        row.snr_db = key.second;
        row.count = acc.count;
        row.failures = acc.failures;
        const double ok = static_cast<double>(acc.count - acc.failures);
        row.mse_samples2 = ok > 0 ? exact_sum(acc.sq_samples) / ok : std::nan("");
        row.mse_mm2 = ok > 0 ? exact_sum(acc.sq_mm) / ok : std::nan("");
        row.rmse_mm = std::sqrt(row.mse_mm2);
        const double total = static_cast<double>(acc.count);
        row.p_within_halflambda = static_cast<double>(acc.within_half) / total;
        for (std::size_t w : acc.within) row.p_within.push_back(static_cast<double>(w) / total);
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

std::string format_number(double v) { return detail::format_double(v); }

void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << "# dzc-ranging v" << kCsvVersion << '\n'
       << "trial_id,snr_db,algorithm,true_tau,tau_hat,true_d_m,d_hat_m,error_mm,runtime_ns\n";
    for (const TrialRecord& r : records) {
        os << r.trial_id << ',' << format_number(r.snr_db) << ',' << algorithm_name(r.algorithm) << ','
           << format_number(r.true_tau) << ',' << format_number(r.tau_hat) << ',' << format_number(r.true_d_m) << ','
           << format_number(r.d_hat_m) << ',' << format_number(r.error_mm) << ',' << r.runtime_ns << '\n';
    }
}

void write_summary_csv(std::ostream& os, const Summary& summary) {
    os << "# dzc-ranging v" << kCsvVersion << '\n'
       << "algorithm,snr_db,mse_samples2,mse_mm2,rmse_mm,p_within_halflambda\n";
    for (const SummaryRow& r : summary.rows) {
        os << algorithm_name(r.algorithm) << ',' << format_number(r.snr_db) << ',' << format_number(r.mse_samples2)
           << ',' << format_number(r.mse_mm2) << ',' << format_number(r.rmse_mm) << ','
           << format_number(r.p_within_halflambda) << '\n';
    }
}

void write_cdf_csv(std::ostream& os, const Summary& summary) {
    os << "# dzc-ranging v" << kCsvVersion << '\n' << "algorithm,snr_db,threshold_mm,p_within\n";
    for (const SummaryRow& r : summary.rows)
        for (std::size_t i = 0; i < summary.thresholds_mm.size(); ++i)
            os << algorithm_name(r.algorithm) << ',' << format_number(r.snr_db) << ','
               << format_number(summary.thresholds_mm[i]) << ',' << format_number(r.p_within[i]) << '\n';
}

}  // namespace dzc
