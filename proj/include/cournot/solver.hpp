#pragma once

// Full-market equilibrium. The unique Nash equilibrium partitions firms into
// four regimes (Color). Two kinds of partitions can occur and each has a
// closed-form solution for the aggregates (Q, K):
//
//   family 1: no inactive firm; firms split Green / Orange / Red in
//             ascending order of a_i (the most concerned mitigate most),
//   family 2: only White and Red firms, split in ascending order of
//             xi_i = (A - c - beta_i*K_ex) / (1 + beta_i).
//
// solve() enumerates every ordered split in both families, keeps the splits
// whose implied (Q, K) satisfy all membership inequalities, and cross-checks
// that all survivors describe the same strategy profile. Ties only happen on
// boundary instances where two adjacent splits coincide.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "model.hpp"

namespace cournot {

/// Counts and coefficient sums of one color assignment.
struct PartitionStats {
    std::vector<Color> colors;
    int n_white = 0;
    int n_green = 0;
    int n_orange = 0;
    int n_red = 0;
    double orange_a_sum = 0.0;  ///< sum of a_i over Orange firms
    double red_b_sum = 0.0;     ///< sum of 1/(1+beta_i) over Red firms

    /// Number of firms producing below full emission.
    int n_mitigating() const noexcept { return n_green + n_orange; }

    /// Common denominator of the aggregate formulas; positive for any
    /// feasible assignment.
    double denominator() const noexcept {
        return double(n_orange + n_red + 1) * double(n_mitigating() + 1)
             - red_b_sum * double(n_green);
    }
};

inline PartitionStats make_partition_stats(const EconomyParams& p,
                                           const std::vector<FirmBelief>& beliefs,
                                           const std::vector<Color>& colors) {
    if (beliefs.size() != colors.size())
        throw std::invalid_argument("make_partition_stats: size mismatch");
    PartitionStats st;
    st.colors = colors;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        switch (colors[i]) {
            case Color::White:  ++st.n_white; break;
            case Color::Green:  ++st.n_green; break;
            case Color::Orange:
                ++st.n_orange;
                st.orange_a_sum += beliefs[i].a(p);
                break;
            default:
                ++st.n_red;
                st.red_b_sum += beliefs[i].b_coeff(p);
        }
    }
    return st;
}

struct Aggregates {
    double Q = 0.0;
    double K = 0.0;
};

/// Closed-form aggregates of a no-White assignment.
inline Aggregates aggregates_for_partition(const EconomyParams& p,
                                           const std::vector<FirmBelief>& beliefs,
                                           const PartitionStats& st) {
    if (st.n_white != 0)
        throw std::invalid_argument("aggregates_for_partition: assignment must have no White firms");
    if (!std::isfinite(st.orange_a_sum))
        throw std::invalid_argument("aggregates_for_partition: Orange firms need finite a_i");
    (void)beliefs;

    const double z = p.z();
    const double m1 = double(st.n_mitigating() + 1);
    const double act1 = double(st.n_orange + st.n_red + 1);
    const double B = st.red_b_sum;
    const double N = st.denominator();
    if (!(N > 0.0)) throw SolverError("aggregates_for_partition: nonpositive denominator");

    const double mitig = st.orange_a_sum + p.K_ex;
    const double K = (B * (p.A - p.c + double(st.n_mitigating()) * p.d) + (B + m1) * mitig) / N;
    const double Q = z + (B * (p.A - p.c + double(st.n_orange) * p.d)
                          - act1 * z + (B - double(st.n_red)) * mitig) / N;
    return {Q, K};
}

/// Aggregates and per-firm quantities of a White/Red split. Firms must come
/// sorted ascending by xi_i; the first n_white of them sit out. `feasible`
/// reports the split's own sanity checks: no Red quantity negative and every
/// White firm content to stay out (xi_i <= Q).
struct WhiteRedSplit {
    bool feasible = false;
    double Q = 0.0;
    double K = 0.0;
    std::vector<double> q;
};

inline double xi_coefficient(const EconomyParams& p, const FirmBelief& belief) noexcept {
    const double bw = belief.b_coeff(p);
    return bw * (p.A - p.c) - (1.0 - bw) * p.K_ex;
}

inline WhiteRedSplit white_red_aggregates(const EconomyParams& p,
                                          const std::vector<FirmBelief>& beliefs,
                                          int n_white) {
    const int n = int(beliefs.size());
    if (n_white < 0 || n_white > n)
        throw std::invalid_argument("white_red_aggregates: n_white out of range");

    std::vector<double> xi(n);
    for (int i = 0; i < n; ++i) xi[i] = xi_coefficient(p, beliefs[i]);
    if (!std::is_sorted(xi.begin(), xi.end()))
        throw std::invalid_argument("white_red_aggregates: firms must be sorted ascending by xi");

    WhiteRedSplit out;
    const int n_red = n - n_white;
    double sum = 0.0;
    for (int i = n_white; i < n; ++i) sum += xi[i];
    out.Q = sum / double(n_red + 1);
    out.K = out.Q + p.K_ex;
    out.q.assign(n, 0.0);
    out.feasible = true;
    for (int i = 0; i < n; ++i) {
        if (i < n_white) {
            if (xi[i] > out.Q) out.feasible = false;
        } else {
            out.q[i] = xi[i] - out.Q;
            if (out.q[i] < 0.0) out.feasible = false;
        }
    }
    return out;
}

struct Equilibrium {
    std::vector<Strategy> strategies;
    std::vector<Color> colors;
    double Q = 0.0;
    double K = 0.0;
    PartitionStats stats;
    double residual = 0.0;  ///< max per-firm best-response gap, diagnostic
};

namespace detail {

// Amount by which firm i's membership inequalities for `color` are violated
// at market aggregates (Q, K); <= 0 means the inequalities hold.
inline double membership_violation(const EconomyParams& p, const FirmBelief& belief,
                                   Color color, double Q, double K) {
    if (!std::isfinite(Q) || !std::isfinite(K)) return kInfinity;
    const double z = p.z();
    const double a = belief.a(p);
    const double bw = belief.b_coeff(p);
    const double wr = bw * (p.A - p.c - Q) - (1.0 - bw) * K;

    switch (color) {
        case Color::White:
            return std::max(wr, z - Q);
        case Color::Green:
            return std::max(a - K, Q - z);
        case Color::Orange:
            return std::max(K - a, (Q - K) - (z - a));
        default:
            return std::max(-wr, (z - a) - (Q - K));
    }
}

// Per-firm strategy implied by `color` at market aggregates (Q, K).
inline Strategy strategy_at(const EconomyParams& p, const FirmBelief& belief,
                            Color color, double Q, double K) {
    const double z = p.z();
    switch (color) {
        case Color::White:
            return Strategy::zero();
        case Color::Green:
            return Strategy::from_qr(z - Q, 0.0);
        case Color::Orange: {
            const double q = z - Q;
            const double k = belief.a(p) - K;
            if (q <= 0.0) return Strategy::zero();
            return Strategy::from_qr(q, k / q);
        }
        default: {
            const double bw = belief.b_coeff(p);
            const double q = bw * (p.A - p.c - Q) - (1.0 - bw) * K;
            return Strategy::from_qr(std::max(q, 0.0), 1.0);
        }
    }
}

struct Candidate {
    std::vector<Color> colors;
    std::vector<Strategy> strategies;
    double Q = 0.0;
    double K = 0.0;
    int n_red = 0, n_white = 0, n_orange = 0;
};

// Validates one color assignment against its own implied aggregates.
inline bool try_candidate(const EconomyParams& p, const std::vector<FirmBelief>& beliefs,
                          const std::vector<Color>& colors, double Q, double K,
                          double tol, Candidate& out) {
    if (!std::isfinite(Q) || !std::isfinite(K)) return false;
    const int n = int(beliefs.size());
    double viol = std::max({-Q, Q - p.A, -K});
    for (int i = 0; i < n && viol <= tol; ++i)
        viol = std::max(viol, membership_violation(p, beliefs[i], colors[i], Q, K));
    if (!(viol <= tol)) return false;

    out.colors = colors;
    out.Q = Q;
    out.K = K;
    out.strategies.resize(n);
    out.n_red = out.n_white = out.n_orange = 0;
    for (int i = 0; i < n; ++i) {
        out.strategies[i] = strategy_at(p, beliefs[i], colors[i], Q, K);
        if (colors[i] == Color::Red) ++out.n_red;
        if (colors[i] == Color::White) ++out.n_white;
        if (colors[i] == Color::Orange) ++out.n_orange;
    }
    return true;
}

inline double membership_scale(const EconomyParams& p, const std::vector<FirmBelief>& beliefs) {
    double s = std::max({1.0, std::fabs(p.z()), p.A - p.c, p.K_ex});
    for (const auto& b : beliefs) {
        const double a = b.a(p);
        if (std::isfinite(a)) s = std::max(s, a);
    }
    return s;
}

inline Equilibrium finish_equilibrium(const EconomyParams& p, const std::vector<FirmBelief>& beliefs,
                                      const Candidate& win) {
    Equilibrium eq;
    eq.strategies = win.strategies;
    eq.colors = win.colors;
    eq.Q = 0.0;
    eq.K = p.K_ex;
    for (const auto& s : eq.strategies) {
        eq.Q += s.q;
        eq.K += s.k;
    }
    eq.stats = make_partition_stats(p, beliefs, eq.colors);
    eq.residual = 0.0;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        Environment env{std::clamp(eq.Q - eq.strategies[i].q, 0.0, p.A),
                        std::max(eq.K - eq.strategies[i].k, 0.0)};
        const Strategy br = best_response(p, beliefs[i], env);
        eq.residual = std::max({eq.residual, std::fabs(br.q - eq.strategies[i].q),
                                std::fabs(br.k - eq.strategies[i].k)});
    }
    return eq;
}

}  // namespace detail

/// Computes the unique equilibrium by ordered enumeration of both partition
/// families. Throws SolverError if no split validates or two validated
/// splits disagree beyond 1e-9 (neither can happen for valid inputs).
inline Equilibrium solve(const EconomyParams& p, const std::vector<FirmBelief>& beliefs) {
    p.validate();
    for (const auto& b : beliefs) b.validate();
    const int n = int(beliefs.size());
    if (n < 1) throw std::invalid_argument("solve: need at least one firm");

    const double tol = 1e-11 * detail::membership_scale(p, beliefs);
    std::vector<detail::Candidate> found;
    detail::Candidate cand;

    // Family 1: Green | Orange | Red in ascending a_i. Firms with beta = 0
    // (a = inf) can only ever sit on the Red side, so splits that would pull
    // one of them into Green or Orange are skipped.
    std::vector<int> by_a(n);
    std::iota(by_a.begin(), by_a.end(), 0);
    std::stable_sort(by_a.begin(), by_a.end(), [&](int i, int j) {
        return beliefs[i].a(p) < beliefs[j].a(p);
    });
    std::vector<Color> colors(n);
    for (int g = 0; g <= n; ++g) {
        if (g > 0 && !std::isfinite(beliefs[by_a[g - 1]].a(p))) break;
        for (int o = 0; o + g <= n; ++o) {
            if (o > 0 && !std::isfinite(beliefs[by_a[g + o - 1]].a(p))) break;
            for (int pos = 0; pos < n; ++pos)
                colors[by_a[pos]] = pos < g ? Color::Green
                                  : pos < g + o ? Color::Orange
                                  : Color::Red;
            const auto st = make_partition_stats(p, beliefs, colors);
            if (!(st.denominator() > 0.0)) continue;
            const Aggregates agg = aggregates_for_partition(p, beliefs, st);
            if (detail::try_candidate(p, beliefs, colors, agg.Q, agg.K, tol, cand))
                found.push_back(cand);
        }
    }

    // Family 2: White | Red in ascending xi_i.
    std::vector<int> by_xi(n);
    std::iota(by_xi.begin(), by_xi.end(), 0);
    std::stable_sort(by_xi.begin(), by_xi.end(), [&](int i, int j) {
        return xi_coefficient(p, beliefs[i]) < xi_coefficient(p, beliefs[j]);
    });
    std::vector<FirmBelief> sorted(n);
    for (int i = 0; i < n; ++i) sorted[i] = beliefs[by_xi[i]];
    for (int w = 0; w <= n; ++w) {
        const WhiteRedSplit split = white_red_aggregates(p, sorted, w);
        for (int i = 0; i < n; ++i)
            colors[by_xi[i]] = i < w ? Color::White : Color::Red;
        if (detail::try_candidate(p, beliefs, colors, split.Q, split.K, tol, cand))
            found.push_back(cand);
    }

    if (found.empty())
        throw SolverError("solve: no color assignment validates; inputs outside the model's domain");

    for (std::size_t i = 1; i < found.size(); ++i)
        for (int f = 0; f < n; ++f) {
            const double dq = std::fabs(found[i].strategies[f].q - found[0].strategies[f].q);
            const double dk = std::fabs(found[i].strategies[f].k - found[0].strategies[f].k);
            if (std::max(dq, dk) > 1e-9)
                throw SolverError("solve: two validated assignments disagree beyond 1e-9");
        }

    // Boundary ties resolve to the assignment with the fewest Red firms
    // (then fewest White, fewest Orange) so the reported labels are
    // deterministic.
    const auto* win = &found[0];
    for (const auto& f : found) {
        const auto key = std::make_tuple(f.n_red, f.n_white, f.n_orange);
        if (key < std::make_tuple(win->n_red, win->n_white, win->n_orange)) win = &f;
    }
    return detail::finish_equilibrium(p, beliefs, *win);
}

/// Damped simultaneous best-response iteration from a caller-supplied start.
/// Each sweep moves every firm a fraction `damping` toward its best response
/// in (q, k) coordinates; stops once the sup-norm change of a sweep drops
/// below tol. Large markets need smaller damping: quantities are strategic
/// substitutes, so a full simultaneous step overshoots when many firms react
/// at once. Non-convergence throws (never silently accepted).
inline Equilibrium iterate_best_response(const EconomyParams& p,
                                         const std::vector<FirmBelief>& beliefs,
                                         const std::vector<Strategy>& start,
                                         double damping = 0.5,
                                         long long max_iter = 1'000'000,
                                         double tol = 1e-12) {
    p.validate();
    for (const auto& b : beliefs) b.validate();
    const int n = int(beliefs.size());
    if (n < 1) throw std::invalid_argument("iterate_best_response: need at least one firm");
    if (int(start.size()) != n) throw std::invalid_argument("iterate_best_response: start size mismatch");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("iterate_best_response: damping must be in (0, 1]");
    const double q_cap = 0.5 * (p.A - p.c);
    for (const auto& s : start) {
        if (!(s.q >= 0.0) || s.q > q_cap + 1e-12)
            throw std::invalid_argument("iterate_best_response: start quantities must lie in [0, (A-c)/2]");
        if (!(s.r >= 0.0) || !(s.r <= 1.0))
            throw std::invalid_argument("iterate_best_response: start mixes must lie in [0, 1]");
    }

    std::vector<double> q(n), k(n), nq(n), nk(n);
    for (int i = 0; i < n; ++i) {
        q[i] = start[i].q;
        k[i] = start[i].k;
    }

    double change = kInfinity;
    long long it = 0;
    for (; it < max_iter && !(change < tol); ++it) {
        double Q = 0.0, K = p.K_ex;
        for (int i = 0; i < n; ++i) {
            Q += q[i];
            K += k[i];
        }
        change = 0.0;
        for (int i = 0; i < n; ++i) {
            Environment env{std::clamp(Q - q[i], 0.0, p.A), std::max(K - k[i], 0.0)};
            const Strategy br = best_response(p, beliefs[i], env);
            nq[i] = q[i] + damping * (br.q - q[i]);
            nk[i] = k[i] + damping * (br.k - k[i]);
            change = std::max({change, std::fabs(nq[i] - q[i]), std::fabs(nk[i] - k[i])});
        }
        q.swap(nq);
        k.swap(nk);
    }
    if (!(change < tol)) {
        std::ostringstream msg;
        msg << "iterate_best_response: no convergence after " << max_iter
            << " sweeps (last sup-norm change " << change << "); reduce damping";
        throw SolverError(msg.str());
    }

    Equilibrium eq;
    eq.strategies.resize(n);
    eq.colors.resize(n);
    eq.Q = 0.0;
    eq.K = p.K_ex;
    for (int i = 0; i < n; ++i) {
        eq.strategies[i] = Strategy{q[i], q[i] > 0.0 ? k[i] / q[i] : 0.0, k[i]};
        eq.Q += q[i];
        eq.K += k[i];
    }
    eq.residual = 0.0;
    for (int i = 0; i < n; ++i) {
        Environment env{std::clamp(eq.Q - q[i], 0.0, p.A), std::max(eq.K - k[i], 0.0)};
        eq.colors[i] = classify_color(p, beliefs[i], env);
        const Strategy br = best_response(p, beliefs[i], env);
        eq.residual = std::max({eq.residual, std::fabs(br.q - q[i]), std::fabs(br.k - k[i])});
    }
    eq.stats = make_partition_stats(p, beliefs, eq.colors);
    return eq;
}

/// Max violation per diagnostic category for a claimed equilibrium.
struct VerificationReport {
    double membership = 0.0;        ///< regime inequalities at each firm's own environment
    double feedback = 0.0;          ///< per-firm strategy vs its regime's closed form
    double aggregation = 0.0;       ///< Q/K sums, k = r*q, Red carbon = Red quantity
    double best_response_gap = 0.0; ///< distance of each strategy from the true best response
    double price_floor = 0.0;       ///< amount by which Q reaches A
    bool exclusion_ok = true;       ///< White firms never coexist with Green/Orange

    double max_violation() const noexcept {
        return std::max({membership, feedback, aggregation, best_response_gap, price_floor,
                         exclusion_ok ? 0.0 : 1.0});
    }
};

inline VerificationReport verify_equilibrium(const EconomyParams& p,
                                             const std::vector<FirmBelief>& beliefs,
                                             const Equilibrium& eq) {
    const int n = int(beliefs.size());
    if (int(eq.strategies.size()) != n || int(eq.colors.size()) != n)
        throw std::invalid_argument("verify_equilibrium: size mismatch");

    VerificationReport rep;
    double Q = 0.0, K = p.K_ex, red_q = 0.0, red_k = 0.0;
    for (int i = 0; i < n; ++i) {
        Q += eq.strategies[i].q;
        K += eq.strategies[i].k;
        rep.aggregation = std::max(rep.aggregation,
                                   std::fabs(eq.strategies[i].k - eq.strategies[i].r * eq.strategies[i].q));
        if (eq.colors[i] == Color::Red) {
            red_q += eq.strategies[i].q;
            red_k += eq.strategies[i].k;
        }
    }
    rep.aggregation = std::max({rep.aggregation, std::fabs(Q - eq.Q), std::fabs(K - eq.K),
                                std::fabs(red_q - red_k)});
    rep.price_floor = std::max(0.0, Q - p.A);

    bool any_white = false, any_mitigating = false;
    for (int i = 0; i < n; ++i) {
        rep.membership = std::max(rep.membership,
                                  detail::membership_violation(p, beliefs[i], eq.colors[i], Q, K));
        const Strategy want = detail::strategy_at(p, beliefs[i], eq.colors[i], Q, K);
        rep.feedback = std::max({rep.feedback, std::fabs(want.q - eq.strategies[i].q),
                                 std::fabs(want.k - eq.strategies[i].k)});
        Environment env{std::clamp(Q - eq.strategies[i].q, 0.0, p.A),
                        std::max(K - eq.strategies[i].k, 0.0)};
        const Strategy br = best_response(p, beliefs[i], env);
        rep.best_response_gap = std::max({rep.best_response_gap,
                                          std::fabs(br.q - eq.strategies[i].q),
                                          std::fabs(br.k - eq.strategies[i].k)});
        if (eq.colors[i] == Color::White) any_white = true;
        if (eq.colors[i] == Color::Green || eq.colors[i] == Color::Orange) any_mitigating = true;
    }
    rep.exclusion_ok = !(any_white && any_mitigating);
    return rep;
}

}  // namespace cournot
