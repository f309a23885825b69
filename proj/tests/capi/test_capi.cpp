// Exercises the shared library through the C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "dzc/dzc.h"

namespace {

struct Signal {
    dzc_signal* p = nullptr;
    Signal() = default;
    Signal(const Signal&) = delete;
    Signal& operator=(const Signal&) = delete;
    ~Signal() { dzc_signal_free(p); }
    dzc_signal** out() { return &p; }
    std::size_t size() const { return dzc_signal_length(p); }
    dzc_complex operator[](std::size_t i) const { return dzc_signal_data(p)[i]; }
};

double dist(dzc_complex a, dzc_complex b) { return std::hypot(a.re - b.re, a.im - b.im); }

dzc_status received_for(const dzc_code& code, double tau, std::size_t length, Signal& out) {
    Signal period;
    int64_t p = 0;
    dzc_status s = dzc_code_period(&code, &p);
    if (s != DZC_OK) return s;
    s = dzc_code_generate(&code, 0, static_cast<std::size_t>(p), period.out());
    if (s != DZC_OK) return s;
    dzc_channel_params ch = dzc_channel_params_default();
    ch.tau = tau;
    ch.output_length = length;
    return dzc_channel_fixed(period.p, &ch, out.out());
}

}  // namespace

TEST_CASE("status strings and version") {
    CHECK(std::string(dzc_status_string(DZC_OK)) == "ok");
    CHECK(std::string(dzc_status_string(DZC_ERR_CONFIG)) == "config");
    CHECK(std::string(dzc_status_string(static_cast<dzc_status>(99))) == "unknown");
    CHECK(std::strlen(dzc_version()) > 0);
    const dzc_physical phys = dzc_physical_default();
    CHECK(phys.fs == 192000.0);
    CHECK(phys.c == 345.664);
    CHECK(phys.fc == 20000.0);
}

TEST_CASE("code validation and the coprime message") {
    const dzc_code bad{4, 2, DZC_CODE_DZC};
    CHECK(dzc_code_validate(&bad) == DZC_ERR_INVALID_ARGUMENT);
    CHECK(std::string(dzc_last_error()).find("coprime") != std::string::npos);
    const dzc_code good{511, 1, DZC_CODE_DZC};
    CHECK(dzc_code_validate(&good) == DZC_OK);
    // a success leaves the message of the last failure in place
    CHECK(std::string(dzc_last_error()).find("coprime") != std::string::npos);
    CHECK(dzc_code_validate(nullptr) == DZC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("last error is per thread") {
    const dzc_code bad{4, 2, DZC_CODE_DZC};
    REQUIRE(dzc_code_validate(&bad) != DZC_OK);
    std::string other = "unset";
    std::thread([&] { other = dzc_last_error(); }).join();
    CHECK(other.empty());
    CHECK(!std::string(dzc_last_error()).empty());
}

TEST_CASE("periods and generated codes") {
    int64_t p = 0;
    const dzc_code c7{7, 1, DZC_CODE_DZC}, c9{9, 2, DZC_CODE_DZC}, c8{8, 3, DZC_CODE_DZC}, z8{8, 3, DZC_CODE_ZC};
    REQUIRE(dzc_code_period(&c7, &p) == DZC_OK);
    CHECK(p == 7);
    REQUIRE(dzc_code_period(&c9, &p) == DZC_OK);
    CHECK(p == 27);
    REQUIRE(dzc_code_period(&c8, &p) == DZC_OK);
    CHECK((p == 32 || p == 96));
    REQUIRE(dzc_code_period(&z8, &p) == DZC_OK);
    CHECK(p == 8);

    Signal a, b;
    REQUIRE(dzc_code_generate(&c9, 5, 40, a.out()) == DZC_OK);
    REQUIRE(dzc_code_generate(&c9, 5 + 27, 40, b.out()) == DZC_OK);
    REQUIRE(a.size() == 40);
    for (std::size_t k = 0; k < 40; ++k) {
        CHECK(std::abs(std::hypot(a[k].re, a[k].im) - 1.0) <= 1e-12);
        CHECK(dist(a[k], b[k]) <= 1e-12);
    }
}

TEST_CASE("differential decode of a DZC period gives the ZC code") {
    const dzc_code d{31, 4, DZC_CODE_DZC}, z{31, 4, DZC_CODE_ZC};
    Signal x, decoded, zc;
    REQUIRE(dzc_code_generate(&d, 0, 31, x.out()) == DZC_OK);
    REQUIRE(dzc_differential_decode(x.p, 1, decoded.out()) == DZC_OK);
    REQUIRE(dzc_code_generate(&z, 0, 31, zc.out()) == DZC_OK);
    for (std::size_t k = 0; k < 31; ++k) CHECK(dist(decoded[k], zc[k]) <= 1e-12);
    CHECK(dzc_differential_decode(x.p, 31, decoded.out()) == DZC_ERR_OUT_OF_RANGE);
}

TEST_CASE("signals") {
    const dzc_complex data[] = {{1, 2}, {3, 4}};
    Signal s;
    REQUIRE(dzc_signal_create(data, 2, s.out()) == DZC_OK);
    CHECK(s.size() == 2);
    CHECK(s[1].im == 4.0);
    Signal empty;
    REQUIRE(dzc_signal_create(nullptr, 0, empty.out()) == DZC_OK);
    CHECK(empty.size() == 0);
    CHECK(dzc_signal_data(empty.p) == nullptr);
    Signal bad;
    CHECK(dzc_signal_create(nullptr, 3, bad.out()) == DZC_ERR_INVALID_ARGUMENT);
    CHECK(dzc_signal_create(data, 2, nullptr) == DZC_ERR_INVALID_ARGUMENT);
    dzc_signal_free(nullptr);
}

TEST_CASE("channel and correlation") {
    const dzc_code z{11, 1, DZC_CODE_ZC};
    Signal x, y;
    REQUIRE(dzc_code_generate(&z, 0, 11, x.out()) == DZC_OK);
    dzc_channel_params ch = dzc_channel_params_default();
    CHECK(std::isinf(ch.snr_db));
    CHECK(ch.alpha == 1.0);
    ch.tau = 3;
    REQUIRE(dzc_channel_fixed(x.p, &ch, y.out()) == DZC_OK);
    std::vector<double> mags(11);
    std::size_t peak = 0;
    double peak_mag = 0;
    REQUIRE(dzc_correlate(DZC_CORR_CIRCULAR, x.p, y.p, mags.data(), &peak, &peak_mag) == DZC_OK);
    CHECK(peak == 3);
    CHECK(peak_mag == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(mags[3] == peak_mag);

    Signal short_x;
    REQUIRE(dzc_code_generate(&z, 0, 10, short_x.out()) == DZC_OK);
    CHECK(dzc_correlate(DZC_CORR_CIRCULAR, short_x.p, y.p, nullptr, &peak, nullptr) == DZC_ERR_LENGTH_MISMATCH);

    ch.delta = 0.06;
    Signal bad;
    CHECK(dzc_channel_fixed(x.p, &ch, bad.out()) == DZC_ERR_OUT_OF_RANGE);
}

TEST_CASE("moving channel through a callback") {
    const dzc_code d{127, 1, DZC_CODE_DZC};
    Signal x, still, fixed;
    REQUIRE(dzc_code_generate(&d, 0, 127, x.out()) == DZC_OK);
    dzc_channel_params ch = dzc_channel_params_default();
    ch.tau = 12.5;
    ch.output_length = 300;
    double calls = 0;
    auto zero = [](double, void* user) {
        *static_cast<double*>(user) += 1;
        return 0.0;
    };
    REQUIRE(dzc_channel_moving(x.p, &ch, zero, &calls, nullptr, still.out()) == DZC_OK);
    CHECK(calls > 0);
    REQUIRE(dzc_channel_fixed(x.p, &ch, fixed.out()) == DZC_OK);
    REQUIRE(still.size() == 300);
    for (std::size_t k = 0; k < 300; ++k) CHECK(dist(still[k], fixed[k]) <= 1e-12);
    CHECK(dzc_channel_moving(x.p, &ch, nullptr, nullptr, nullptr, still.out()) == DZC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("delay estimators agree on a noiseless window") {
    const dzc_code d{511, 1, DZC_CODE_DZC};
    const dzc_code z{511, 1, DZC_CODE_ZC};
    const dzc_physical phys = dzc_physical_default();
    Signal y, yz;
    REQUIRE(received_for(d, 60, 511, y) == DZC_OK);
    REQUIRE(received_for(z, 60, 511, yz) == DZC_OK);
    dzc_estimate e{};
    REQUIRE(dzc_estimate_delay(DZC_ALGO_DIFF, &d, y.p, 0, &phys, nullptr, &e) == DZC_OK);
    CHECK(e.tau_hat == 60);
    CHECK(e.d_hat_m == doctest::Approx(60 * phys.c / phys.fs).epsilon(1e-12));
    dzc_ml_params ml = dzc_ml_params_default();
    ml.nu_halfwidth = 8.0 / (4 * 511);  // grid starts at -halfwidth and must hit 0
    REQUIRE(dzc_estimate_delay(DZC_ALGO_ML, &d, y.p, 0, &phys, &ml, &e) == DZC_OK);
    CHECK(e.tau_hat == 60);
    CHECK(e.metric == doctest::Approx(511.0).epsilon(1e-6));
    REQUIRE(dzc_estimate_delay(DZC_ALGO_XCORR, &z, yz.p, 0, &phys, nullptr, &e) == DZC_OK);
    CHECK(e.tau_hat == 60);

    Signal tiny;
    REQUIRE(dzc_code_generate(&d, 0, 100, tiny.out()) == DZC_OK);
    CHECK(dzc_estimate_delay(DZC_ALGO_DIFF, &d, tiny.p, 0, &phys, nullptr, &e) == DZC_ERR_INSUFFICIENT_LENGTH);
}

TEST_CASE("pipeline handle") {
    const dzc_code d{511, 1, DZC_CODE_DZC};
    dzc_pipeline_params params = dzc_pipeline_params_default();
    params.window_step = 97;
    dzc_pipeline* p = nullptr;
    REQUIRE(dzc_pipeline_create(&d, &params, &p) == DZC_OK);
    Signal y;
    REQUIRE(received_for(d, 60.3, 3000, y) == DZC_OK);
    std::size_t count = 0;
    REQUIRE(dzc_pipeline_window_count(p, y.size(), &count) == DZC_OK);
    REQUIRE(count > 0);
    std::vector<dzc_estimate> out(count);
    std::size_t written = 0;
    REQUIRE(dzc_pipeline_process(p, y.p, out.data(), out.size(), &written) == DZC_OK);
    CHECK(written == count);
    const double mps = params.phys.c / params.phys.fs;
    for (const dzc_estimate& e : out) CHECK(std::abs(e.d_hat_m / mps - 60.3) <= 0.05);
    // too small a buffer still reports the window count
    REQUIRE(dzc_pipeline_process(p, y.p, out.data(), 1, &written) == DZC_OK);
    CHECK(written == count);
    dzc_pipeline_free(p);

    const dzc_code z{511, 1, DZC_CODE_ZC};
    CHECK(dzc_pipeline_create(&z, &params, &p) == DZC_ERR_INVALID_ARGUMENT);
    params.segment_length = 100;
    CHECK(dzc_pipeline_create(&d, &params, &p) == DZC_ERR_CONFIG);
    dzc_pipeline_free(nullptr);
}

TEST_CASE("ambiguity through the C API") {
    const dzc_code d{101, 1, DZC_CODE_DZC};
    const int taus[] = {49, 50, 51};
    const double nus[] = {0.0, 0.01};
    double out[6];
    REQUIRE(dzc_ambiguity(&d, 50, 0.01, taus, 3, nus, 2, out) == DZC_OK);
    CHECK(out[1 * 2 + 1] == doctest::Approx(101.0).epsilon(1e-9));
    for (int i = 0; i < 6; ++i)
        if (i != 3) CHECK(out[i] < 0.9 * 101);
    out[0] = -1;
    CHECK(dzc_ambiguity(&d, 50, 0.01, taus, 0, nus, 2, out) == DZC_OK);
    CHECK(out[0] == -1);
    CHECK(dzc_ambiguity(&d, 50, 0.01, nullptr, 3, nus, 2, out) == DZC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("iq files and the bench through the C API") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dzc_capi_tests";
    fs::create_directories(dir);
    const dzc_code d{63, 2, DZC_CODE_DZC};
    Signal x, back;
    REQUIRE(dzc_code_generate(&d, 0, 63, x.out()) == DZC_OK);
    const std::string path = (dir / "x.iq").string();
    const dzc_physical phys = dzc_physical_default();
    REQUIRE(dzc_iq_write(path.c_str(), x.p, &phys, &d) == DZC_OK);
    dzc_code got{};
    int has = 0;
    dzc_physical got_phys{};
    REQUIRE(dzc_iq_read(path.c_str(), back.out(), &got_phys, &got, &has) == DZC_OK);
    CHECK(has == 1);
    CHECK(got.n == 63);
    CHECK(got.m == 2);
    CHECK(got.kind == DZC_CODE_DZC);
    CHECK(got_phys.fs == phys.fs);
    for (std::size_t k = 0; k < 63; ++k) CHECK(dist(back[k], x[k]) <= 1e-6);
    Signal none;
    CHECK(dzc_iq_read((dir / "missing.iq").string().c_str(), none.out(), nullptr, nullptr, nullptr) == DZC_ERR_IO);

    const std::string cfg = (dir / "tiny.cfg").string();
    std::ofstream(cfg) << "n = 21\ntau = 10\nsnr_db = 0, 20\ntrials = 5\nalgorithms = diff_dzc, ml_dzc\n";
    char* first = nullptr;
    char* second = nullptr;
    REQUIRE(dzc_bench_run(cfg.c_str(), (dir / "a").string().c_str(), 2, &first) == DZC_OK);
    REQUIRE(dzc_bench_run(cfg.c_str(), (dir / "b").string().c_str(), 1, &second) == DZC_OK);
    REQUIRE(first != nullptr);
    CHECK(std::string(first) == std::string(second));
    CHECK(std::string(first).rfind("# dzc-ranging v", 0) == 0);
    dzc_string_free(first);
    dzc_string_free(second);
    std::ofstream(cfg) << "bogus = 1\n";
    CHECK(dzc_bench_run(cfg.c_str(), (dir / "c").string().c_str(), 1, nullptr) == DZC_ERR_CONFIG);
    fs::remove_all(dir);
}
