#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

#include "dzc/error.hpp"
#include "dzc/harness.hpp"
#include "text_util.hpp"

namespace dzc {

namespace {

using detail::parse_bool;
using detail::parse_double;
using detail::parse_int;

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const std::string& part : detail::split(s, ',')) out.push_back(parse_double(part));
    return out;
}

int parse_positive_int(const std::string& s) {
    const std::int64_t v = parse_int(s);
    if (v < 1 || v > 1'000'000'000) throw Error(ErrorCode::Config, "expected a positive integer, got '" + s + "'");
    return static_cast<int>(v);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"scenario", [](auto& c, const auto& v) { c.scenario = parse_scenario(v); }},
        {"n", [](auto& c, const auto& v) { c.n = parse_positive_int(v); }},
        {"m", [](auto& c, const auto& v) { c.m = parse_positive_int(v); }},
        {"tau", [](auto& c, const auto& v) { c.tau = parse_double(v); }},
        {"tau_jitter", [](auto& c, const auto& v) { c.tau_jitter = parse_double(v); }},
        {"nu", [](auto& c, const auto& v) { c.nu = parse_double(v); }},
        {"delta", [](auto& c, const auto& v) { c.delta = parse_double(v); }},
        {"velocity", [](auto& c, const auto& v) { c.velocity = parse_double(v); }},
        {"ramp_fraction", [](auto& c, const auto& v) { c.ramp_fraction = parse_double(v); }},
        {"random_phase", [](auto& c, const auto& v) { c.random_phase = parse_bool(v); }},
        {"snr_db", [](auto& c, const auto& v) { c.snr_grid = parse_double_list(v); }},
        {"trials", [](auto& c, const auto& v) { c.trials = parse_positive_int(v); }},
        {"algorithms",
         [](auto& c, const auto& v) {
             c.algorithms.clear();
             for (const std::string& a : detail::split(v, ',')) c.algorithms.push_back(parse_algorithm(a));
         }},
        {"seed", [](auto& c, const auto& v) { c.base_seed = static_cast<std::uint64_t>(parse_int(v)); }},
        {"threads", [](auto& c, const auto& v) { c.threads = static_cast<unsigned>(parse_positive_int(v)); }},
        {"segments", [](auto& c, const auto& v) { c.segments = static_cast<std::size_t>(parse_positive_int(v)); }},
        {"ml_nu_halfwidth", [](auto& c, const auto& v) { c.ml_nu_halfwidth = parse_double(v); }},
        {"ml_nu_step", [](auto& c, const auto& v) { c.ml_nu_step = parse_double(v); }},
        {"ml_delta_from_nu", [](auto& c, const auto& v) { c.ml_delta_from_nu = parse_bool(v); }},
        {"record_runtime", [](auto& c, const auto& v) { c.record_runtime = parse_bool(v); }},
        {"halflambda_mm", [](auto& c, const auto& v) { c.halflambda_mm = parse_double(v); }},
        {"thresholds_mm", [](auto& c, const auto& v) { c.thresholds_mm = parse_double_list(v); }},
        {"fs", [](auto& c, const auto& v) { c.pipeline.phys.fs = parse_double(v); }},
        {"c", [](auto& c, const auto& v) { c.pipeline.phys.c = parse_double(v); }},
        {"fc", [](auto& c, const auto& v) { c.pipeline.phys.fc = parse_double(v); }},
        {"segment_length", [](auto& c, const auto& v) { c.pipeline.segment_length = static_cast<std::size_t>(parse_positive_int(v)); }},
        {"window_step", [](auto& c, const auto& v) { c.pipeline.window_step = static_cast<std::size_t>(parse_positive_int(v)); }},
        {"candidate_window", [](auto& c, const auto& v) { c.pipeline.candidate_window = static_cast<std::size_t>(parse_positive_int(v)); }},
        {"valid_bin_ratio", [](auto& c, const auto& v) { c.pipeline.valid_bin_ratio = parse_double(v); }},
        {"min_bin_omega", [](auto& c, const auto& v) { c.pipeline.min_bin_omega = parse_double(v); }},
        {"max_speed", [](auto& c, const auto& v) { c.pipeline.max_speed = parse_double(v); }},
        {"phase_reference",
         [](auto& c, const auto& v) {
             if (v == "known") c.pipeline.phase_reference = PhaseReference::Known;
             else if (v == "estimated") c.pipeline.phase_reference = PhaseReference::Estimated;
             else throw Error(ErrorCode::Config, "phase_reference must be known or estimated");
         }},
        {"resampler_half_width", [](auto& c, const auto& v) { c.pipeline.resampler.half_width = parse_positive_int(v); }},
        {"kaiser_beta", [](auto& c, const auto& v) { c.pipeline.resampler.kaiser_beta = parse_double(v); }},
    };
    return table;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value, const std::string& where) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw Error(ErrorCode::Config, where + "unknown key '" + key + "'");
    try {
        it->second(cfg, value);
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, where + key + ": " + e.what());
    }
}

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return detail::format_double(v.get<double>());
    throw Error(ErrorCode::Config, "unsupported JSON value " + v.dump());
}

ExperimentConfig parse_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::Config, "JSON config must be an object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        std::string flat;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) flat += (i ? "," : "") + json_scalar(value[i]);
        } else {
            flat = json_scalar(value);
        }
        apply(cfg, key, flat, "");
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    const std::string trimmed = detail::trim(text);
    ExperimentConfig cfg;
    if (!trimmed.empty() && trimmed[0] == '{') {
        cfg = parse_json(trimmed);
    } else {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            const std::string t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
            if (t.empty()) continue;
            const std::string where = "line " + std::to_string(lineno) + ": ";
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::Config, where + "expected key = value");
            apply(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)), where);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::Io, "cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_experiment_config(ss.str());
}

}  // namespace dzc
