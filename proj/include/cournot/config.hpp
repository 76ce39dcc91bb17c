#pragma once

// JSON run configuration. Parsing is strict: unknown keys, wrong types, and
// missing required fields all raise ConfigError with the offending field
// path, so a typo never silently falls back to a default. "inf" (as a
// string) is the spelling for an unbounded alpha_sq.

#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "model.hpp"
#include "statics.hpp"
#include "two_firm.hpp"

namespace cournot {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) config_fail(path, "expected an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) known = known || item.key() == k;
        if (!known) config_fail(path + "." + item.key(), "unknown key");
    }
}

inline const json& require(const json& j, const std::string& path, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) config_fail(path + "." + key, "required key is missing");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) config_fail(path, "expected a number");
    return v.get<double>();
}

inline double as_number_or_inf(const json& v, const std::string& path) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return kInfinity;
        config_fail(path, "expected a number or \"inf\"");
    }
    return as_number(v, path);
}

inline int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) config_fail(path, "expected an integer");
    return v.get<int>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) config_fail(path, "expected a string");
    return v.get<std::string>();
}

}  // namespace detail

struct DynamicsConfig {
    int rounds = 100;
    std::string check = "none";  ///< none | green | no-green
    double tol = 1e-6;
    int max_rounds = 100000;
    double divergence_bound = 0.0;
    std::optional<double> limit_a;     ///< declared stock limit override
    std::optional<double> limit_beta;  ///< declared belief limit override
    std::optional<double> alpha_true;  ///< deterministic response for the trace temperature
    std::string schedule_kind;   ///< constant | a-ramp | beta-ramp
    std::vector<double> start;   ///< per-firm start values for the ramps
    double limit = 0.0;
    double rate = 0.0;
};

struct UtilityConfig {
    std::string kind;  ///< quadratic | crra | log
    double A = 0.0;
    double gamma = 0.0;
    int n = 0;
    double unit_cost = 0.0;
    double tol = 1e-12;
    bool carbon = false;  ///< also report the interior carbon profile
};

struct RunConfig {
    int version = 1;
    EconomyParams economy;
    std::vector<FirmBelief> firms;
    std::optional<GridSpec> two_firm_map;
    std::optional<StaticsOptions> statics;
    std::optional<DynamicsConfig> dynamics;
    std::optional<UtilityConfig> utility;
    std::optional<std::vector<Strategy>> verify;  ///< q, r per firm
};

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::as_int;
    using detail::as_number;
    using detail::as_number_or_inf;
    using detail::as_string;
    using detail::check_keys;
    using detail::config_fail;
    using detail::require;

    check_keys(j, "config",
               {"version", "economy", "firms", "two_firm_map", "statics", "dynamics",
                "utility", "verify"});
    RunConfig cfg;
    cfg.version = as_int(require(j, "config", "version"), "config.version");
    if (cfg.version != 1) config_fail("config.version", "unsupported version");

    {
        const auto& e = require(j, "config", "economy");
        check_keys(e, "config.economy", {"A", "b", "c", "d", "K_ex"});
        cfg.economy.A = as_number(require(e, "config.economy", "A"), "config.economy.A");
        cfg.economy.b = as_number(require(e, "config.economy", "b"), "config.economy.b");
        cfg.economy.c = as_number(require(e, "config.economy", "c"), "config.economy.c");
        cfg.economy.d = as_number(require(e, "config.economy", "d"), "config.economy.d");
        if (e.contains("K_ex")) cfg.economy.K_ex = as_number(e["K_ex"], "config.economy.K_ex");
        try {
            cfg.economy.validate();
        } catch (const std::invalid_argument& err) {
            config_fail("config.economy", err.what());
        }
    }

    if (j.contains("firms")) {
        const auto& arr = j["firms"];
        if (!arr.is_array()) config_fail("config.firms", "expected an array");
        int idx = 0;
        for (const auto& f : arr) {
            const std::string path = "config.firms[" + std::to_string(idx++) + "]";
            check_keys(f, path, {"alpha_sq", "risk_weight"});
            FirmBelief belief;
            belief.alpha_sq = as_number_or_inf(require(f, path, "alpha_sq"), path + ".alpha_sq");
            if (f.contains("risk_weight"))
                belief.risk_weight = as_number(f["risk_weight"], path + ".risk_weight");
            try {
                belief.validate();
            } catch (const std::invalid_argument& err) {
                config_fail(path, err.what());
            }
            cfg.firms.push_back(belief);
        }
    }

    if (j.contains("two_firm_map")) {
        const auto& g = j["two_firm_map"];
        check_keys(g, "config.two_firm_map", {"a1", "a2", "resolution"});
        GridSpec grid;
        const auto range = [&](const char* key, double& lo, double& hi) {
            const auto& r = require(g, "config.two_firm_map", key);
            const std::string path = std::string("config.two_firm_map.") + key;
            if (!r.is_array() || r.size() != 2) config_fail(path, "expected [min, max]");
            lo = as_number(r[0], path + "[0]");
            hi = as_number(r[1], path + "[1]");
        };
        range("a1", grid.a1_min, grid.a1_max);
        range("a2", grid.a2_min, grid.a2_max);
        grid.resolution = as_int(require(g, "config.two_firm_map", "resolution"),
                                 "config.two_firm_map.resolution");
        try {
            grid.validate();
        } catch (const std::invalid_argument& err) {
            config_fail("config.two_firm_map", err.what());
        }
        cfg.two_firm_map = grid;
    }

    if (j.contains("statics")) {
        const auto& s = j["statics"];
        check_keys(s, "config.statics", {"h", "h_min"});
        StaticsOptions opts;
        if (s.contains("h")) opts.h = as_number(s["h"], "config.statics.h");
        if (s.contains("h_min")) opts.h_min = as_number(s["h_min"], "config.statics.h_min");
        if (!(opts.h > 0.0) || !(opts.h_min > 0.0) || opts.h_min > opts.h)
            config_fail("config.statics", "needs 0 < h_min <= h");
        cfg.statics = opts;
    }

    if (j.contains("dynamics")) {
        const auto& d = j["dynamics"];
        check_keys(d, "config.dynamics",
                   {"rounds", "schedule", "check", "tol", "max_rounds", "divergence_bound",
                    "limit_a", "limit_beta", "alpha_true"});
        DynamicsConfig dc;
        dc.rounds = as_int(require(d, "config.dynamics", "rounds"), "config.dynamics.rounds");
        if (dc.rounds < 1) config_fail("config.dynamics.rounds", "must be >= 1");
        if (d.contains("limit_a"))
            dc.limit_a = as_number_or_inf(d["limit_a"], "config.dynamics.limit_a");
        if (d.contains("limit_beta"))
            dc.limit_beta = as_number(d["limit_beta"], "config.dynamics.limit_beta");
        if (d.contains("alpha_true")) {
            dc.alpha_true = as_number(d["alpha_true"], "config.dynamics.alpha_true");
            if (!(*dc.alpha_true > 0.0)) config_fail("config.dynamics.alpha_true", "must be > 0");
        }
        if (d.contains("check")) {
            dc.check = as_string(d["check"], "config.dynamics.check");
            if (dc.check != "none" && dc.check != "green" && dc.check != "no-green")
                config_fail("config.dynamics.check", "expected none, green, or no-green");
        }
        if (d.contains("tol")) dc.tol = as_number(d["tol"], "config.dynamics.tol");
        if (d.contains("max_rounds"))
            dc.max_rounds = as_int(d["max_rounds"], "config.dynamics.max_rounds");
        if (d.contains("divergence_bound"))
            dc.divergence_bound =
                as_number(d["divergence_bound"], "config.dynamics.divergence_bound");

        const auto& s = require(d, "config.dynamics", "schedule");
        dc.schedule_kind = as_string(require(s, "config.dynamics.schedule", "kind"),
                                     "config.dynamics.schedule.kind");
        if (dc.schedule_kind == "constant") {
            check_keys(s, "config.dynamics.schedule", {"kind"});
        } else if (dc.schedule_kind == "a-ramp" || dc.schedule_kind == "beta-ramp") {
            const bool a_ramp = dc.schedule_kind == "a-ramp";
            const char* start_key = a_ramp ? "start_a" : "start_beta";
            const char* limit_key = a_ramp ? "limit_a" : "limit_beta";
            check_keys(s, "config.dynamics.schedule", {"kind", start_key, limit_key, "rate"});
            const auto& st = require(s, "config.dynamics.schedule", start_key);
            const std::string spath = std::string("config.dynamics.schedule.") + start_key;
            if (!st.is_array() || st.empty()) config_fail(spath, "expected a non-empty array");
            for (std::size_t i = 0; i < st.size(); ++i)
                dc.start.push_back(as_number(st[i], spath + "[" + std::to_string(i) + "]"));
            dc.limit = as_number(require(s, "config.dynamics.schedule", limit_key),
                                 std::string("config.dynamics.schedule.") + limit_key);
            dc.rate = as_number(require(s, "config.dynamics.schedule", "rate"),
                                "config.dynamics.schedule.rate");
        } else {
            config_fail("config.dynamics.schedule.kind",
                        "expected constant, a-ramp, or beta-ramp");
        }
        cfg.dynamics = dc;
    }

    if (j.contains("utility")) {
        const auto& u = j["utility"];
        check_keys(u, "config.utility", {"kind", "A", "gamma", "n", "unit_cost", "tol", "carbon"});
        UtilityConfig uc;
        uc.kind = as_string(require(u, "config.utility", "kind"), "config.utility.kind");
        if (uc.kind == "quadratic") {
            uc.A = as_number(require(u, "config.utility", "A"), "config.utility.A");
        } else if (uc.kind == "crra") {
            uc.gamma = as_number(require(u, "config.utility", "gamma"), "config.utility.gamma");
        } else if (uc.kind != "log") {
            config_fail("config.utility.kind", "expected quadratic, crra, or log");
        }
        uc.n = as_int(require(u, "config.utility", "n"), "config.utility.n");
        if (uc.n < 1) config_fail("config.utility.n", "must be >= 1");
        uc.unit_cost =
            as_number(require(u, "config.utility", "unit_cost"), "config.utility.unit_cost");
        if (u.contains("tol")) uc.tol = as_number(u["tol"], "config.utility.tol");
        if (u.contains("carbon")) {
            if (!u["carbon"].is_boolean()) config_fail("config.utility.carbon", "expected a boolean");
            uc.carbon = u["carbon"].get<bool>();
        }
        cfg.utility = uc;
    }

    if (j.contains("verify")) {
        const auto& v = j["verify"];
        check_keys(v, "config.verify", {"strategies"});
        const auto& arr = require(v, "config.verify", "strategies");
        if (!arr.is_array()) config_fail("config.verify.strategies", "expected an array");
        std::vector<Strategy> strategies;
        int idx = 0;
        for (const auto& s : arr) {
            const std::string path = "config.verify.strategies[" + std::to_string(idx++) + "]";
            check_keys(s, path, {"q", "r"});
            const double q = as_number(require(s, path, "q"), path + ".q");
            const double r = as_number(require(s, path, "r"), path + ".r");
            if (!(q >= 0.0)) config_fail(path + ".q", "must be >= 0");
            if (!(r >= 0.0) || !(r <= 1.0)) config_fail(path + ".r", "must lie in [0, 1]");
            strategies.push_back({q, r, r * q});
        }
        cfg.verify = std::move(strategies);
    }

    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace cournot
