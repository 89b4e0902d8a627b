#pragma once

// Result record shared by the probes: parameters, measured value, the bound it
// is compared against, and a verdict.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace powcorr {

enum class Verdict { pass, fail, reported };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::reported: return "reported";
    }
    return "reported";
}

struct ProbeReport {
    std::string quantity;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    double measured = 0.0;
    double bound = 0.0;
    std::string bound_form;  // e.g. "C*log(N)/N^2.9"
    Verdict verdict = Verdict::reported;
    std::vector<nlohmann::ordered_json> rows;  // one object per probed tuple

    bool failed() const { return verdict == Verdict::fail; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["quantity"] = quantity;
        j["parameters"] = parameters;
        j["measured"] = measured;
        j["bound"] = bound;
        j["bound_form"] = bound_form;
        j["verdict"] = to_string(verdict);
        j["rows"] = rows;
        return j;
    }
};

namespace detail {

inline std::string csv_cell(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    return v.dump();
}

}  // namespace detail

/// Rows as CSV; columns come from the first row, the quantity name leads.
inline void write_csv(std::ostream& os, const ProbeReport& r) {
    if (r.rows.empty()) {
        os << "quantity,measured,bound,verdict\n"
           << r.quantity << ',' << detail::csv_cell(r.measured) << ',' << detail::csv_cell(r.bound) << ','
           << to_string(r.verdict) << '\n';
        return;
    }
    os << "quantity";
    for (const auto& [key, _] : r.rows.front().items()) os << ',' << key;
    os << '\n';
    for (const auto& row : r.rows) {
        os << r.quantity;
        for (const auto& [key, _] : r.rows.front().items()) os << ',' << (row.contains(key) ? detail::csv_cell(row[key]) : "");
        os << '\n';
    }
}

}  // namespace powcorr
