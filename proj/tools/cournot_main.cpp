// Command-line front end: every subcommand reads a JSON config, writes a
// CSV table and/or a JSON report, and exits 0 on success, 1 on a config
// problem, 2 on a solver failure, 3 when a declared-limit check's premises
// are broken by the data.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <cournot/config.hpp>
#include <cournot/cournot.hpp>
#include <cournot/csv.hpp>

namespace {

using nlohmann::json;
using namespace cournot;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    long seed = 0;
    double tol = 0.0;   // 0 = module default
    int max_iter = 0;   // 0 = module default
};

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file: " + path);
    return f;
}

std::string sidecar_path(const std::string& out) {
    const auto dot = out.rfind('.');
    if (dot != std::string::npos && out.substr(dot) == ".csv") return out.substr(0, dot) + ".json";
    return out + ".json";
}

json num_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

void dump_json(const std::string& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

const std::vector<FirmBelief>& require_firms(const RunConfig& cfg) {
    if (cfg.firms.empty()) throw ConfigError("config.firms: required by this subcommand");
    return cfg.firms;
}

json firm_row_json(const EconomyParams& p, const FirmBelief& f, int id, const Strategy& s,
                   Color color) {
    return json{{"firm_id", id},
                {"alpha_sq", num_or_inf(f.alpha_sq)},
                {"beta", num_or_inf(f.beta(p))},
                {"a", num_or_inf(f.a(p))},
                {"color", to_string(color)},
                {"q", s.q},
                {"r", s.r},
                {"k", s.k}};
}

json aggregates_json(const Equilibrium& eq) {
    return json{{"Q", eq.Q},
                {"K", eq.K},
                {"residual", eq.residual},
                {"counts",
                 json{{"white", eq.stats.n_white},
                      {"green", eq.stats.n_green},
                      {"orange", eq.stats.n_orange},
                      {"red", eq.stats.n_red}}}};
}

std::string mix_string(const std::vector<Color>& colors) {
    std::string s;
    s.reserve(colors.size());
    for (Color c : colors) s += "WGOR"[int(c)];
    return s;
}

int run_solve(const RunConfig& cfg, const CommonOpts& opts) {
    const auto& firms = require_firms(cfg);
    const Equilibrium eq = solve(cfg.economy, firms);

    if (opts.format == "json") {
        json out{{"meta", json{{"seed", opts.seed}}}, {"aggregates", aggregates_json(eq)}};
        json rows = json::array();
        for (std::size_t i = 0; i < firms.size(); ++i)
            rows.push_back(firm_row_json(cfg.economy, firms[i], int(i), eq.strategies[i],
                                         eq.colors[i]));
        out["firms"] = std::move(rows);
        dump_json(opts.out_path, out);
        return 0;
    }

    auto out = open_out(opts.out_path);
    csv::row(out, "firm_id", "alpha_sq", "beta", "a", "color", "q", "r", "k");
    for (std::size_t i = 0; i < firms.size(); ++i) {
        const auto& f = firms[i];
        const auto& s = eq.strategies[i];
        csv::row(out, int(i), f.alpha_sq, f.beta(cfg.economy), f.a(cfg.economy),
                 to_string(eq.colors[i]), s.q, s.r, s.k);
    }
    dump_json(sidecar_path(opts.out_path),
              json{{"meta", json{{"seed", opts.seed}}}, {"aggregates", aggregates_json(eq)}});
    return 0;
}

int run_two_firm_map(const RunConfig& cfg, const CommonOpts& opts) {
    if (!cfg.two_firm_map) throw ConfigError("config.two_firm_map: required by this subcommand");
    const auto cells = regime_map(cfg.economy, *cfg.two_firm_map);
    auto out = open_out(opts.out_path);
    csv::row(out, "a1", "a2", "regime", "Q", "K", "q1", "q2", "k1", "k2");
    for (const auto& c : cells)
        csv::row(out, c.a1, c.a2, to_string(c.regime), c.Q, c.K, c.q1, c.q2, c.k1, c.k2);
    return 0;
}

int run_statics(const RunConfig& cfg, const CommonOpts& opts) {
    const auto& firms = require_firms(cfg);
    const StaticsOptions so = cfg.statics ? *cfg.statics : StaticsOptions{};
    const StaticsReport rep = statics_report(cfg.economy, firms, so);

    // trend of a quantity when firm j's alpha_sq rises, if the sign table applies
    const auto classification = [&](const std::string& quantity,
                                    const std::string& direction) -> std::string {
        if (!rep.signs || direction.rfind("alpha_sq[", 0) != 0) return "";
        const int jf = std::stoi(direction.substr(9, direction.size() - 10));
        const auto& sg = *rep.signs;
        if (quantity == "K") return to_string(sg.K_total[std::size_t(jf)]);
        if (quantity == "Q") return to_string(sg.Q_total[std::size_t(jf)]);
        const int i = std::stoi(quantity.substr(2, quantity.size() - 3));
        switch (quantity[0]) {
            case 'q': return to_string(sg.q[std::size_t(i)][std::size_t(jf)]);
            case 'k': return to_string(sg.k[std::size_t(i)][std::size_t(jf)]);
            default:  return to_string(sg.r[std::size_t(i)][std::size_t(jf)]);
        }
    };

    auto out = open_out(opts.out_path);
    csv::row(out, "quantity", "direction", "analytic", "finite_difference", "abs_error",
             "rel_error", "classification");
    for (const auto& e : rep.entries) {
        const double abs_err = std::abs(e.analytic - e.fd);
        const double rel_err = abs_err / std::max(1.0, std::abs(e.analytic));
        csv::row(out, e.quantity, e.direction, e.analytic, e.fd, abs_err, rel_err,
                 classification(e.quantity, e.direction));
    }
    dump_json(sidecar_path(opts.out_path),
              json{{"meta", json{{"seed", opts.seed}}},
                   {"aggregates", aggregates_json(rep.eq)},
                   {"mix", mix_string(rep.eq.colors)},
                   {"regime_stable", rep.regime_stable},
                   {"h_used", rep.h_used}});
    return 0;
}

BeliefSchedule schedule_from_config(const RunConfig& cfg, const DynamicsConfig& dc) {
    BeliefSchedule s;
    if (dc.schedule_kind == "constant") {
        const auto& firms = require_firms(cfg);
        s = constant_schedule(firms);
        double max_a = 0.0, min_beta = kInfinity;
        for (const auto& f : firms) {
            max_a = std::max(max_a, f.a(cfg.economy));
            min_beta = std::min(min_beta, f.beta(cfg.economy));
        }
        s.limit_a = max_a;
        s.limit_beta = min_beta;
    } else if (dc.schedule_kind == "a-ramp") {
        s = ramp_a_schedule(cfg.economy, dc.start, dc.limit, dc.rate);
    } else {
        s = ramp_beta_schedule(cfg.economy, dc.start, dc.limit, dc.rate);
    }
    if (dc.limit_a) s.limit_a = dc.limit_a;
    if (dc.limit_beta) s.limit_beta = dc.limit_beta;
    return s;
}

int run_dynamics(const RunConfig& cfg, const CommonOpts& opts) {
    if (!cfg.dynamics) throw ConfigError("config.dynamics: required by this subcommand");
    DynamicsConfig dc = *cfg.dynamics;
    if (opts.tol > 0.0) dc.tol = opts.tol;
    if (opts.max_iter > 0) dc.max_rounds = opts.max_iter;
    const BeliefSchedule schedule = schedule_from_config(cfg, dc);

    int trace_rounds = dc.rounds;
    json verdict_json;
    if (dc.check != "none") {
        const LimitOptions lo{dc.tol, dc.max_rounds, dc.divergence_bound};
        const LimitVerdict v = dc.check == "green"
                                   ? check_limit_green(cfg.economy, schedule, lo)
                                   : check_limit_no_green(cfg.economy, schedule, lo);
        trace_rounds = std::min(trace_rounds, v.rounds);
        verdict_json = json{{"check", dc.check},
                            {"status", to_string(v.status)},
                            {"rounds", v.rounds},
                            {"K_final", v.K_final},
                            {"limit", num_or_inf(v.limit)},
                            {"gap", num_or_inf(v.gap)},
                            {"stayed_below_limit", v.stayed_below_limit},
                            {"strictly_increasing", v.strictly_increasing},
                            {"min_carbon_ok", v.min_carbon_ok},
                            {"alpha_true", num_or_inf(v.alpha_true)},
                            {"limiting_temperature", num_or_inf(v.limiting_temperature)}};
    }

    const DynamicsTrace trace = simulate(cfg.economy, schedule, trace_rounds, dc.alpha_true);
    auto out = open_out(opts.out_path);
    const std::size_t n = trace.rounds.empty() ? 0 : trace.rounds.front().strategies.size();
    std::vector<std::string> cells{"round", "K", "Q"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = std::to_string(i + 1);
        cells.push_back("q" + id);
        cells.push_back("r" + id);
        cells.push_back("k" + id);
    }
    cells.push_back("mix");
    if (dc.alpha_true) cells.push_back("T");
    csv::row_cells(out, cells);
    for (std::size_t m = 0; m < trace.rounds.size(); ++m) {
        cells = {csv::field(int(m + 1)), csv::field(trace.K[m + 1]), csv::field(trace.Q[m])};
        for (const Strategy& s : trace.rounds[m].strategies) {
            cells.push_back(csv::field(s.q));
            cells.push_back(csv::field(s.r));
            cells.push_back(csv::field(s.k));
        }
        cells.push_back(mix_string(trace.rounds[m].colors));
        if (dc.alpha_true) cells.push_back(csv::field(trace.T[m + 1]));
        csv::row_cells(out, cells);
    }

    json side{{"meta", json{{"seed", opts.seed}}}, {"K_initial", cfg.economy.K_ex}};
    if (dc.alpha_true) side["alpha_true"] = *dc.alpha_true;
    if (!verdict_json.is_null()) side["verdict"] = verdict_json;
    dump_json(sidecar_path(opts.out_path), side);
    return 0;
}

int run_utility(const RunConfig& cfg, const CommonOpts& opts) {
    if (!cfg.utility) throw ConfigError("config.utility: required by this subcommand");
    UtilityConfig uc = *cfg.utility;
    if (opts.tol > 0.0) uc.tol = opts.tol;
    const Utility u = uc.kind == "quadratic" ? quadratic_utility(uc.A)
                    : uc.kind == "crra"      ? crra_utility(uc.gamma)
                                             : log_utility();
    SymmetricOptions so;
    so.tol = uc.tol;
    const std::optional<double> q0 = solve_symmetric(u, uc.n, uc.unit_cost, so);

    json out{{"meta", json{{"seed", opts.seed}}},
             {"kind", uc.kind},
             {"n", uc.n},
             {"unit_cost", uc.unit_cost}};
    if (q0) {
        out["q0"] = *q0;
        out["residual"] = symmetric_foc_residual(u, uc.n, uc.unit_cost, *q0);
    } else {
        out["q0"] = nullptr;
    }
    if (uc.carbon) {
        if (!q0) {
            out["carbon"] = nullptr;
        } else {
            const auto& firms = require_firms(cfg);
            if (int(firms.size()) != uc.n)
                throw ConfigError("config.firms: must list exactly utility.n firms for carbon");
            const CarbonProfile cp = interior_carbon_profile(cfg.economy, firms, *q0);
            out["carbon"] = json{{"feasible", cp.feasible},
                                 {"K", cp.K},
                                 {"k", cp.k},
                                 {"r", cp.r},
                                 {"violating", cp.violating}};
        }
    }
    dump_json(opts.out_path, out);
    return 0;
}

int run_verify(const RunConfig& cfg, const CommonOpts& opts) {
    const auto& firms = require_firms(cfg);
    if (!cfg.verify) throw ConfigError("config.verify: required by this subcommand");
    const auto& strategies = *cfg.verify;
    if (strategies.size() != firms.size())
        throw ConfigError("config.verify.strategies: must list one strategy per firm");

    Equilibrium eq;
    eq.strategies = strategies;
    eq.Q = 0.0;
    eq.K = cfg.economy.K_ex;
    for (const auto& s : strategies) {
        eq.Q += s.q;
        eq.K += s.k;
    }
    for (std::size_t i = 0; i < firms.size(); ++i) {
        const Environment env{eq.Q - strategies[i].q, eq.K - strategies[i].k};
        eq.colors.push_back(classify_color(cfg.economy, firms[i], env));
    }
    eq.stats = make_partition_stats(cfg.economy, firms, eq.colors);

    const VerificationReport rep = verify_equilibrium(cfg.economy, firms, eq);
    const double tol = opts.tol > 0.0 ? opts.tol : 1e-9;
    dump_json(opts.out_path, json{{"meta", json{{"seed", opts.seed}}},
                                  {"ok", rep.max_violation() <= tol},
                                  {"tolerance", tol},
                                  {"max_violation", rep.max_violation()},
                                  {"membership", rep.membership},
                                  {"feedback", rep.feedback},
                                  {"aggregation", rep.aggregation},
                                  {"best_response_gap", rep.best_response_gap},
                                  {"price_floor", rep.price_floor},
                                  {"exclusion_ok", rep.exclusion_ok},
                                  {"mix", mix_string(eq.colors)},
                                  {"Q", eq.Q},
                                  {"K", eq.K}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cournot competition with endogenous emission technology"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::function<int()> action;
    RunConfig cfg;

    const auto add_common = [&](CLI::App* sub, bool with_tol, bool with_max_iter) {
        sub->add_option("--config", opts.config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_path, "output file")->required();
        sub->add_option("--seed", opts.seed, "seed recorded in JSON metadata");
        if (with_tol) sub->add_option("--tol", opts.tol, "tolerance override");
        if (with_max_iter) sub->add_option("--max-iter", opts.max_iter, "iteration cap override");
    };

    auto* solve_cmd = app.add_subcommand("solve", "equilibrium of one market");
    add_common(solve_cmd, false, false);
    solve_cmd->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    solve_cmd->callback([&] { action = [&] { return run_solve(cfg, opts); }; });

    auto* map_cmd = app.add_subcommand("two-firm-map", "regime map over a belief grid");
    add_common(map_cmd, false, false);
    map_cmd->callback([&] { action = [&] { return run_two_firm_map(cfg, opts); }; });

    auto* statics_cmd = app.add_subcommand("statics", "derivatives and trends at an equilibrium");
    add_common(statics_cmd, false, false);
    statics_cmd->callback([&] { action = [&] { return run_statics(cfg, opts); }; });

    auto* dyn_cmd = app.add_subcommand("dynamics", "repeated play with carbon carry-over");
    add_common(dyn_cmd, true, true);
    dyn_cmd->callback([&] { action = [&] { return run_dynamics(cfg, opts); }; });

    auto* util_cmd = app.add_subcommand("utility", "symmetric profile under general demand");
    add_common(util_cmd, true, false);
    util_cmd->callback([&] { action = [&] { return run_utility(cfg, opts); }; });

    auto* verify_cmd = app.add_subcommand("verify", "check a proposed strategy profile");
    add_common(verify_cmd, true, false);
    verify_cmd->callback([&] { action = [&] { return run_verify(cfg, opts); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        cfg = load_config(opts.config_path);
        return action();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const HypothesisViolation& e) {
        std::cerr << "hypothesis violation: " << e.what() << '\n';
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
