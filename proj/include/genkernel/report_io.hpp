#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "genkernel/exponential.hpp"
#include "genkernel/growth.hpp"

namespace genkernel {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// FNV-1a, stable across platforms; identifies the config a report came from
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// round-trip decimal form, '.' separator, no locale
inline std::string num_str(Real v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline Json to_json(const GrowthClass& g) {
    Json j;
    j["class"] = g.str();
    switch (g.tag) {
        case GrowthClass::Moderate: j["tag"] = "moderate"; j["order"] = g.order; break;
        case GrowthClass::Negligible: j["tag"] = "negligible"; j["order"] = g.order; break;
        case GrowthClass::LogScale: j["tag"] = "log_scale"; j["k"] = g.k; break;
        default: j["tag"] = "indeterminate"; break;
    }
    return j;
}

inline Json to_json(const SeminormReport& r) {
    Json j;
    j["epsilon"] = Json::array();
    j["value"] = Json::array();
    j["floor"] = Json::array();
    for (int i = 0; i < r.schedule.size(); ++i) {
        j["epsilon"].push_back(r.schedule[i]);
        j["value"].push_back(r.values[i]);
        j["floor"].push_back(r.floors[i]);
    }
    j["fitted_slope"] = r.fitted_slope;
    j["fit_r2"] = r.fit_r2;
    j["log_fit_coeff"] = r.log_fit_coeff;
    j["log_fit_rel_resid"] = r.log_fit_rel_resid;
    j["positives"] = r.positives;
    j["fit_window"] = r.fit_window;
    j["degenerate"] = r.degenerate;
    return j;
}

inline Json to_json(const IdentityReport& r, const EpsilonSchedule& schedule) {
    Json j;
    j["per_epsilon"] = Json::array();
    for (std::size_t i = 0; i < r.per_eps.size(); ++i) {
        Json row;
        row["epsilon"] = schedule[static_cast<int>(i)];
        row["residual"] = r.per_eps[i];
        j["per_epsilon"].push_back(row);
    }
    j["max_residual"] = r.max_residual;
    if (r.op_residual > 0) j["op_residual"] = r.op_residual;
    if (r.hypothesis_violated) {
        j["hypothesis_violated"] = true;
        j["hypothesis_residual"] = r.hypothesis_residual;
    }
    j["verdict"] = r.pass ? "pass" : "fail";
    return j;
}

inline Json to_json(const ExpSeriesResult& r) {
    Json j;
    j["mode"] = r.mode == ExpMode::CompactSup ? "compact_sup" : "l2";
    j["t_re"] = r.t.real();
    j["t_im"] = r.t.imag();
    j["per_epsilon"] = Json::array();
    for (int i = 0; i < r.schedule.size(); ++i) {
        Json row;
        row["epsilon"] = r.schedule[i];
        row["terms_used"] = r.terms_used[static_cast<std::size_t>(i)];
        row["tail_bound"] = r.tail_bound[static_cast<std::size_t>(i)];
        j["per_epsilon"].push_back(row);
    }
    return j;
}

inline void write_report(const std::string& path, Json body, const std::string& config_hash) {
    Json j;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = config_hash;
    for (auto& [k, v] : body.items()) j[k] = v;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write report file: " + path);
    out << j.dump(2) << "\n";
}

// rows of numeric columns; header first
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<Real>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write csv file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << num_str(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
}

} // namespace genkernel
