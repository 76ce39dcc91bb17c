#pragma once

// Comparative statics of no-White equilibria. The aggregates react to three
// kinds of shifts: the summed Red passthrough weight (sum of 1/(1+beta_j)
// over Red firms), the summed Orange indifference stock (sum of a_j over
// Orange firms), and the external carbon stock K_ex. Per-firm strategies
// react through those aggregates plus, for the perturbed firm itself, a
// direct term. Every analytic derivative here can be paired with a
// finite difference of re-solved equilibria; statics_report() does exactly
// that, shrinking the step while a perturbation flips any firm's color.

#include <functional>
#include <map>
#include <string>

#include "solver.hpp"

namespace cournot {

class DirectionUndefined : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct AggregateDir {
    double dK = 0.0;
    double dQ = 0.0;
};

struct AggregatePartials {
    std::optional<AggregateDir> red_weight;    ///< w.r.t. the Red passthrough sum
    std::optional<AggregateDir> orange_stock;  ///< w.r.t. the Orange a-sum
    AggregateDir external;                     ///< w.r.t. K_ex
    double emitted_wrt_external = 0.0;         ///< d(K - K_ex)/dK_ex

    const AggregateDir& wrt_red_weight() const {
        if (!red_weight) throw DirectionUndefined("no Red firms: Red weight direction undefined");
        return *red_weight;
    }
    const AggregateDir& wrt_orange_stock() const {
        if (!orange_stock) throw DirectionUndefined("no Orange firms: Orange stock direction undefined");
        return *orange_stock;
    }
};

namespace detail {

inline void require_no_whites(const Equilibrium& eq, const char* who) {
    if (eq.stats.n_white != 0)
        throw std::invalid_argument(std::string(who) + ": equilibrium has White firms");
}

}  // namespace detail

inline AggregatePartials aggregate_partials(const EconomyParams& p,
                                            const std::vector<FirmBelief>& beliefs,
                                            const Equilibrium& eq) {
    detail::require_no_whites(eq, "aggregate_partials");
    const int n = int(beliefs.size());
    const auto& st = eq.stats;
    const double N = st.denominator();
    const double m1 = double(st.n_mitigating() + 1);
    const double B = st.red_b_sum;

    AggregatePartials out;
    const double dK_dA = (m1 + B) / N;
    const double dQ_dA = (B - double(st.n_red)) / N;
    if (st.n_orange >= 1) out.orange_stock = AggregateDir{dK_dA, dQ_dA};
    out.external = AggregateDir{dK_dA, dQ_dA};
    out.emitted_wrt_external = (m1 + B - N) / N;

    if (st.n_red >= 1) {
        const double bracket = (st.orange_a_sum + p.K_ex) * double(n + 1)
                             + double(st.n_orange + st.n_red + 1) * (p.z() + m1 * p.d);
        out.red_weight = AggregateDir{m1 * bracket / (N * N),
                                      double(st.n_orange + 1) * bracket / (N * N)};
    }
    return out;
}

struct FirmPartialRow {
    double dq = 0.0;
    double dk = 0.0;
    double dr = 0.0;
};

/// Per-firm derivatives, one row vector per perturbable coordinate: a_j for
/// each Orange firm j, the passthrough weight b_j = 1/(1+beta_j) for each
/// Red firm j.
struct FirmPartials {
    std::map<int, std::vector<FirmPartialRow>> wrt_a;  ///< key: Orange firm index
    std::map<int, std::vector<FirmPartialRow>> wrt_b;  ///< key: Red firm index
};

inline FirmPartials firm_partials(const EconomyParams& p,
                                  const std::vector<FirmBelief>& beliefs,
                                  const Equilibrium& eq) {
    detail::require_no_whites(eq, "firm_partials");
    const int n = int(beliefs.size());
    const auto& st = eq.stats;
    const double N = st.denominator();
    const double m1 = double(st.n_mitigating() + 1);
    const AggregatePartials agg = aggregate_partials(p, beliefs, eq);
    const double S = p.A - p.c - eq.Q + eq.K;  // marginal value of a Red firm's own weight

    FirmPartials out;
    for (int j = 0; j < n; ++j) {
        if (eq.colors[j] == Color::Orange) {
            const double dK = agg.wrt_orange_stock().dK;
            const double dQ = agg.wrt_orange_stock().dQ;
            std::vector<FirmPartialRow> rows(n);
            for (int i = 0; i < n; ++i) {
                FirmPartialRow& row = rows[i];
                switch (eq.colors[i]) {
                    case Color::Green:
                        row.dq = -dQ;
                        break;
                    case Color::Orange: {
                        const double own = i == j ? 1.0 : 0.0;
                        row.dq = -dQ;
                        row.dk = own - dK;
                        row.dr = (own + eq.strategies[i].r * dQ - dK) / eq.strategies[i].q;
                        break;
                    }
                    default:
                        row.dq = row.dk = (double(st.n_red) - st.red_b_sum
                                           - (1.0 - beliefs[i].b_coeff(p)) * double(n + 1)) / N;
                }
            }
            out.wrt_a.emplace(j, std::move(rows));
        } else if (eq.colors[j] == Color::Red) {
            const double dK = agg.wrt_red_weight().dK;
            const double dQ = agg.wrt_red_weight().dQ;
            std::vector<FirmPartialRow> rows(n);
            for (int i = 0; i < n; ++i) {
                FirmPartialRow& row = rows[i];
                switch (eq.colors[i]) {
                    case Color::Green:
                        row.dq = -dQ;
                        break;
                    case Color::Orange:
                        row.dq = -dQ;
                        row.dk = -dK;
                        row.dr = (eq.strategies[i].r / m1 - 1.0 / double(st.n_orange + 1))
                               * m1 * dQ / eq.strategies[i].q;
                        break;
                    default: {
                        const double bi = beliefs[i].b_coeff(p);
                        const double cross = -((1.0 - bi) * double(st.n_green)
                                               + double(st.n_orange) + 1.0)
                                             / double(st.n_green + st.n_orange + 1) * dK;
                        row.dq = row.dk = (i == j ? S + cross : cross);
                    }
                }
            }
            out.wrt_b.emplace(j, std::move(rows));
        }
    }
    return out;
}

/// Qualitative direction of a quantity as one firm's belief alpha_sq rises.
enum class Trend { StrictlyIncreasing, StrictlyDecreasing, Unaffected, Ambiguous };

inline const char* to_string(Trend t) noexcept {
    switch (t) {
        case Trend::StrictlyIncreasing: return "strictly-increasing";
        case Trend::StrictlyDecreasing: return "strictly-decreasing";
        case Trend::Unaffected:         return "unaffected";
        default:                        return "ambiguous";
    }
}

struct SignReport {
    std::vector<Trend> K_total;         ///< indexed by perturbed firm
    std::vector<Trend> Q_total;
    std::vector<std::vector<Trend>> q;  ///< [firm i][perturbed firm j]
    std::vector<std::vector<Trend>> k;
    std::vector<std::vector<Trend>> r;
};

/// The qualitative table: how each equilibrium quantity moves as one firm
/// grows more concerned, by the color case analysis alone. The only
/// genuinely ambiguous cell is a Red firm's output against an Orange firm's
/// belief.
inline SignReport sign_report(const EconomyParams& p,
                              const std::vector<FirmBelief>& beliefs,
                              const Equilibrium& eq) {
    detail::require_no_whites(eq, "sign_report");
    const int n = int(beliefs.size());
    for (const auto& b : beliefs)
        if (!(b.alpha_sq > 0.0))
            throw std::invalid_argument("sign_report: requires every alpha_sq > 0");
    (void)p;
    const bool reds = eq.stats.n_red >= 1;

    SignReport rep;
    rep.K_total.resize(n);
    rep.Q_total.resize(n);
    rep.q.assign(n, std::vector<Trend>(n, Trend::Unaffected));
    rep.k.assign(n, std::vector<Trend>(n, Trend::Unaffected));
    rep.r.assign(n, std::vector<Trend>(n, Trend::Unaffected));

    for (int j = 0; j < n; ++j) {
        const Color cj = eq.colors[j];
        rep.K_total[j] = cj == Color::Green ? Trend::Unaffected : Trend::StrictlyDecreasing;
        rep.Q_total[j] = cj == Color::Green ? Trend::Unaffected
                       : cj == Color::Red   ? Trend::StrictlyDecreasing
                       : reds               ? Trend::StrictlyIncreasing
                                            : Trend::Unaffected;
        if (cj == Color::Green) continue;  // a Green firm's belief moves nothing

        for (int i = 0; i < n; ++i) {
            const Color ci = eq.colors[i];

            if (ci == Color::Orange)
                rep.r[i][j] = i == j ? Trend::StrictlyDecreasing : Trend::StrictlyIncreasing;

            if (ci != Color::Green) {
                if (i == j)
                    rep.k[i][j] = Trend::StrictlyDecreasing;
                else if (cj == Color::Orange && ci == Color::Red)
                    rep.k[i][j] = Trend::Ambiguous;
                else
                    rep.k[i][j] = Trend::StrictlyIncreasing;
            }

            if (i == j) {
                rep.q[i][j] = ci == Color::Red ? Trend::StrictlyDecreasing
                            : reds             ? Trend::StrictlyDecreasing
                                               : Trend::Unaffected;
            } else if (cj == Color::Red) {
                rep.q[i][j] = Trend::StrictlyIncreasing;
            } else {  // cj Orange
                rep.q[i][j] = ci == Color::Red ? Trend::Ambiguous
                            : reds             ? Trend::StrictlyDecreasing
                                               : Trend::Unaffected;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Analytic-vs-finite-difference pairing

struct StaticsEntry {
    std::string quantity;    // "K", "Q", "K_net", "q[i]", "k[i]", "r[i]"
    std::string direction;   // "a[j]", "b[j]", "K_ex", "alpha_sq[j]"
    double analytic = 0.0;
    double fd = 0.0;
};

struct StaticsOptions {
    double h = 1e-5;      ///< base relative step
    double h_min = 1e-8;  ///< guard floor when perturbations flip a color
};

struct StaticsReport {
    Equilibrium eq;
    AggregatePartials aggregates;
    FirmPartials firms;
    std::optional<SignReport> signs;  ///< absent when some alpha_sq = 0
    std::vector<StaticsEntry> entries;
    double h_used = 0.0;
    bool regime_stable = true;
};

namespace detail {

using QuantityList = std::vector<std::pair<std::string, double>>;

inline double quantity_value(const Equilibrium& eq, const std::string& name,
                             double kex_of_probe) {
    if (name == "K") return eq.K;
    if (name == "Q") return eq.Q;
    if (name == "K_net") return eq.K - kex_of_probe;
    const int i = std::stoi(name.substr(2, name.size() - 3));
    switch (name[0]) {
        case 'q': return eq.strategies[std::size_t(i)].q;
        case 'k': return eq.strategies[std::size_t(i)].k;
        default:  return eq.strategies[std::size_t(i)].r;
    }
}

// One direction of the report: re-solve at shifted coordinates, insist the
// color assignment is unchanged, then read a difference quotient off the
// probe for every listed quantity. mode 0 is central; +1/-1 are the
// second-order one-sided variants for coordinates pinned to a boundary of
// their domain (alpha_sq = 0, b_j = 1).
struct FdContext {
    const Equilibrium& base;
    StaticsReport& rep;
    double shrink;  ///< smallest allowed fraction of the initial step
};

inline bool probe_direction(FdContext ctx, const std::string& direction, int mode, double h0,
                            const std::function<Equilibrium(double)>& resolve,
                            const std::function<double(double)>& kex_at,
                            const QuantityList& analytic) {
    for (double h = h0; h >= h0 * ctx.shrink; h *= 0.5) {
        const double s1 = mode >= 0 ? h : -h;
        const double s2 = mode == 0 ? -h : (mode > 0 ? 2.0 * h : -2.0 * h);
        Equilibrium e1, e2;
        try {
            e1 = resolve(s1);
            e2 = resolve(s2);
        } catch (const std::exception&) {
            continue;
        }
        if (e1.colors != ctx.base.colors || e2.colors != ctx.base.colors) continue;
        for (const auto& [quantity, value] : analytic) {
            StaticsEntry e;
            e.quantity = quantity;
            e.direction = direction;
            e.analytic = value;
            const double f1 = quantity_value(e1, quantity, kex_at(s1));
            const double f2 = quantity_value(e2, quantity, kex_at(s2));
            if (mode == 0) {
                e.fd = (f1 - f2) / (2.0 * h);
            } else {
                const double f0 = quantity_value(ctx.base, quantity, kex_at(0.0));
                e.fd = double(mode) * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
            }
            ctx.rep.entries.push_back(std::move(e));
        }
        ctx.rep.h_used = std::min(ctx.rep.h_used, h);
        return true;
    }
    return false;
}

}  // namespace detail

/// Solves, computes every analytic partial, and pairs each with a finite
/// difference of re-solved equilibria. A direction whose perturbation still
/// flips a color at the step floor clears regime_stable and contributes no
/// entries.
inline StaticsReport statics_report(const EconomyParams& p,
                                    const std::vector<FirmBelief>& beliefs,
                                    const StaticsOptions& opts = {}) {
    StaticsReport rep;
    rep.eq = solve(p, beliefs);
    detail::require_no_whites(rep.eq, "statics_report");
    const int n = int(beliefs.size());
    rep.aggregates = aggregate_partials(p, beliefs, rep.eq);
    rep.firms = firm_partials(p, beliefs, rep.eq);
    bool all_positive = true;
    for (const auto& b : beliefs) all_positive = all_positive && b.alpha_sq > 0.0;
    if (all_positive) rep.signs = sign_report(p, beliefs, rep.eq);
    rep.h_used = opts.h;

    detail::FdContext ctx{rep.eq, rep, opts.h_min / opts.h};
    const auto no_kex_shift = [&](double) { return p.K_ex; };

    const auto per_firm_rows = [&](const std::vector<FirmPartialRow>& rows) {
        detail::QuantityList out;
        for (int i = 0; i < n; ++i) {
            out.emplace_back("q[" + std::to_string(i) + "]", rows[i].dq);
            out.emplace_back("k[" + std::to_string(i) + "]", rows[i].dk);
            out.emplace_back("r[" + std::to_string(i) + "]", rows[i].dr);
        }
        return out;
    };

    // Orange a_j directions
    for (const auto& [j, rows] : rep.firms.wrt_a) {
        const int fj = j;
        const double aj = beliefs[std::size_t(fj)].a(p);
        auto analytic = per_firm_rows(rows);
        analytic.emplace_back("K", rep.aggregates.wrt_orange_stock().dK);
        analytic.emplace_back("Q", rep.aggregates.wrt_orange_stock().dQ);
        const auto resolve = [&, fj, aj](double s) {
            auto bs = beliefs;
            bs[std::size_t(fj)] = belief_from_a(p, aj + s, beliefs[std::size_t(fj)].risk_weight);
            return solve(p, bs);
        };
        if (!detail::probe_direction(ctx, "a[" + std::to_string(fj) + "]", 0,
                                     opts.h * std::max(1.0, aj), resolve, no_kex_shift, analytic))
            rep.regime_stable = false;
    }

    // Red b_j directions; a firm already at b_j = 1 (alpha_sq = 0) only has
    // the backward side of its domain.
    for (const auto& [j, rows] : rep.firms.wrt_b) {
        const int fj = j;
        const double bj = beliefs[std::size_t(fj)].b_coeff(p);
        auto analytic = per_firm_rows(rows);
        analytic.emplace_back("K", rep.aggregates.wrt_red_weight().dK);
        analytic.emplace_back("Q", rep.aggregates.wrt_red_weight().dQ);
        const auto resolve = [&, fj, bj](double s) {
            auto bs = beliefs;
            bs[std::size_t(fj)] = belief_from_b_coeff(p, bj + s, beliefs[std::size_t(fj)].risk_weight);
            return solve(p, bs);
        };
        const int mode = bj >= 1.0 ? -1 : 0;
        double h0 = opts.h * bj;
        while (mode == 0 && bj + h0 > 1.0 && h0 > opts.h_min) h0 *= 0.5;
        if (!detail::probe_direction(ctx, "b[" + std::to_string(fj) + "]", mode, h0,
                                     resolve, no_kex_shift, analytic))
            rep.regime_stable = false;
    }

    // External carbon direction
    {
        detail::QuantityList analytic{{"K", rep.aggregates.external.dK},
                                      {"Q", rep.aggregates.external.dQ},
                                      {"K_net", rep.aggregates.emitted_wrt_external}};
        const auto resolve = [&](double s) {
            EconomyParams pp = p;
            pp.K_ex += s;
            if (pp.K_ex < 0.0) throw std::invalid_argument("negative K_ex");
            return solve(pp, beliefs);
        };
        const auto kex_at = [&](double s) { return p.K_ex + s; };
        const int mode = p.K_ex == 0.0 ? +1 : 0;
        if (!detail::probe_direction(ctx, "K_ex", mode, opts.h * std::max(1.0, p.K_ex),
                                     resolve, kex_at, analytic))
            rep.regime_stable = false;
    }

    // Belief directions alpha_sq_j; analytic values come through the chain
    // rule, da_j/dalpha_sq = -a_j/alpha_sq (Orange), db_j/dalpha_sq =
    // -w*b_j^2 (Red), zero for Green.
    for (int j = 0; j < n; ++j) {
        const Color cj = rep.eq.colors[j];
        const double alpha = beliefs[std::size_t(j)].alpha_sq;
        const double w = beliefs[std::size_t(j)].risk_weight ? *beliefs[std::size_t(j)].risk_weight
                                                             : p.b;
        detail::QuantityList analytic;
        std::vector<FirmPartialRow> rows(n);
        double chainK = 0.0, chainQ = 0.0;
        if (cj == Color::Orange) {
            const double mult = -beliefs[std::size_t(j)].a(p) / alpha;
            chainK = rep.aggregates.wrt_orange_stock().dK * mult;
            chainQ = rep.aggregates.wrt_orange_stock().dQ * mult;
            const auto& src = rep.firms.wrt_a.at(j);
            for (int i = 0; i < n; ++i)
                rows[i] = {src[i].dq * mult, src[i].dk * mult, src[i].dr * mult};
        } else if (cj == Color::Red) {
            const double bj = beliefs[std::size_t(j)].b_coeff(p);
            const double mult = -w * bj * bj;
            chainK = rep.aggregates.wrt_red_weight().dK * mult;
            chainQ = rep.aggregates.wrt_red_weight().dQ * mult;
            const auto& src = rep.firms.wrt_b.at(j);
            for (int i = 0; i < n; ++i)
                rows[i] = {src[i].dq * mult, src[i].dk * mult, src[i].dr * mult};
        }
        analytic.emplace_back("K", chainK);
        analytic.emplace_back("Q", chainQ);
        for (int i = 0; i < n; ++i) {
            analytic.emplace_back("q[" + std::to_string(i) + "]", rows[i].dq);
            analytic.emplace_back("k[" + std::to_string(i) + "]", rows[i].dk);
            analytic.emplace_back("r[" + std::to_string(i) + "]", rows[i].dr);
        }
        const auto resolve = [&, j, alpha](double s) {
            auto bs = beliefs;
            if (alpha + s < 0.0) throw std::invalid_argument("negative alpha_sq");
            bs[std::size_t(j)].alpha_sq = alpha + s;
            return solve(p, bs);
        };
        const int mode = alpha == 0.0 ? +1 : 0;
        if (!detail::probe_direction(ctx, "alpha_sq[" + std::to_string(j) + "]", mode,
                                     opts.h * (alpha > 0.0 ? alpha : 1.0), resolve,
                                     no_kex_shift, analytic))
            rep.regime_stable = false;
    }

    return rep;
}

}  // namespace cournot
