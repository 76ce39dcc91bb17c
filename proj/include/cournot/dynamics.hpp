#pragma once

// Repeated play with carbon carry-over: each round's equilibrium stock
// becomes the next round's pre-existing stock while beliefs follow a
// schedule. Two limit checks cover the interesting parameter ranges:
// with c + d < A the stock climbs to the common bound of the firms'
// indifference stocks; with c < A <= c + d nobody ever abates fully and
// the stock climbs to (A - c) / beta instead.

#include <functional>

#include "solver.hpp"

namespace cournot {

/// A schedule handed a round that breaks a limit check's premises.
class HypothesisViolation : public std::runtime_error {
public:
    HypothesisViolation(int round, const std::string& what)
        : std::runtime_error("round " + std::to_string(round) + ": " + what), round(round) {}
    int round;
};

/// Beliefs per (1-based) round, plus the limits they approach when known.
/// limit_a is the least upper bound of the indifference stocks (may be
/// infinite when some firm never worries); limit_beta is the greatest
/// lower bound of the tax sensitivities (may be zero).
struct BeliefSchedule {
    std::function<std::vector<FirmBelief>(int)> at;
    std::optional<double> limit_a;
    std::optional<double> limit_beta;
};

inline BeliefSchedule constant_schedule(std::vector<FirmBelief> beliefs) {
    BeliefSchedule s;
    s.at = [beliefs = std::move(beliefs)](int) { return beliefs; };
    return s;
}

/// a_i(m) = limit - (limit - start_i) * rate^(m-1): indifference stocks
/// rising geometrically toward a common bound, never exceeding it.
inline BeliefSchedule ramp_a_schedule(const EconomyParams& p, std::vector<double> start_a,
                                      double limit_a, double rate) {
    if (!(limit_a > 0.0) || !std::isfinite(limit_a))
        throw std::invalid_argument("ramp_a_schedule: limit must be finite and positive");
    if (!(rate >= 0.0) || !(rate < 1.0))
        throw std::invalid_argument("ramp_a_schedule: rate must lie in [0, 1)");
    for (double a0 : start_a)
        if (!(a0 > 0.0) || a0 > limit_a)
            throw std::invalid_argument("ramp_a_schedule: starts must lie in (0, limit]");
    BeliefSchedule s;
    s.limit_a = limit_a;
    s.at = [p, start = std::move(start_a), limit_a, rate](int round) {
        std::vector<FirmBelief> beliefs;
        beliefs.reserve(start.size());
        const double shrink = std::pow(rate, round - 1);
        for (double a0 : start)
            beliefs.push_back(belief_from_a(p, limit_a - (limit_a - a0) * shrink));
        return beliefs;
    };
    return s;
}

/// beta_i(m) = limit + (start_i - limit) * rate^(m-1): tax sensitivities
/// falling geometrically toward a common floor, never dropping under it.
inline BeliefSchedule ramp_beta_schedule(const EconomyParams& p, std::vector<double> start_beta,
                                         double limit_beta, double rate) {
    if (!(limit_beta > 0.0) || !std::isfinite(limit_beta))
        throw std::invalid_argument("ramp_beta_schedule: limit must be finite and positive");
    if (!(rate >= 0.0) || !(rate < 1.0))
        throw std::invalid_argument("ramp_beta_schedule: rate must lie in [0, 1)");
    for (double b0 : start_beta)
        if (!std::isfinite(b0) || b0 < limit_beta)
            throw std::invalid_argument("ramp_beta_schedule: starts must lie in [limit, inf)");
    BeliefSchedule s;
    s.limit_beta = limit_beta;
    s.at = [p, start = std::move(start_beta), limit_beta, rate](int round) {
        std::vector<FirmBelief> beliefs;
        beliefs.reserve(start.size());
        const double shrink = std::pow(rate, round - 1);
        for (double b0 : start) {
            FirmBelief f;
            f.alpha_sq = (limit_beta + (b0 - limit_beta) * shrink) / p.b;
            beliefs.push_back(f);
        }
        return beliefs;
    };
    return s;
}

struct DynamicsTrace {
    std::vector<double> K;             ///< K[0] = initial stock, K[m] after round m
    std::vector<double> Q;             ///< Q[m-1] = round-m output
    std::vector<Equilibrium> rounds;
    std::optional<double> alpha_true;  ///< deterministic response behind T, when given
    std::vector<double> T;             ///< T[m] = alpha_true * K[m]; empty otherwise
};

inline DynamicsTrace simulate(const EconomyParams& p, const BeliefSchedule& schedule, int rounds,
                              std::optional<double> alpha_true = {}) {
    p.validate();
    if (rounds < 0) throw std::invalid_argument("simulate: negative round count");
    if (!schedule.at) throw std::invalid_argument("simulate: schedule has no belief rule");
    DynamicsTrace trace;
    trace.K.reserve(std::size_t(rounds) + 1);
    trace.K.push_back(p.K_ex);
    trace.alpha_true = alpha_true;
    EconomyParams round_p = p;
    for (int m = 1; m <= rounds; ++m) {
        round_p.K_ex = trace.K.back();
        try {
            Equilibrium eq = solve(round_p, schedule.at(m));
            trace.K.push_back(eq.K);
            trace.Q.push_back(eq.Q);
            trace.rounds.push_back(std::move(eq));
        } catch (const SolverError& e) {
            throw SolverError("round " + std::to_string(m) + ": " + e.what());
        }
    }
    if (alpha_true) {
        trace.T.reserve(trace.K.size());
        for (double K : trace.K) trace.T.push_back(*alpha_true * K);
    }
    return trace;
}

enum class LimitStatus { Converged, MaxRounds, Diverged };

inline const char* to_string(LimitStatus s) noexcept {
    switch (s) {
        case LimitStatus::Converged: return "converged";
        case LimitStatus::MaxRounds: return "max-rounds";
        default:                     return "diverged";
    }
}

struct LimitOptions {
    double tol = 1e-6;
    int max_rounds = 100000;
    double divergence_bound = 0.0;  ///< 0 picks a bound from the problem scale
};

struct LimitVerdict {
    LimitStatus status = LimitStatus::MaxRounds;
    int rounds = 0;
    double K_final = 0.0;
    double limit = 0.0;               ///< predicted stock limit (may be infinite)
    double gap = 0.0;                 ///< |K_final - limit|
    bool stayed_below_limit = true;   ///< see the per-check notes
    bool strictly_increasing = true;  ///< strict whenever a round could add carbon
    bool min_carbon_ok = true;        ///< per-firm floor k_i >= lambda_i (a_i - K_minus)
    double alpha_true = 0.0;          ///< response making the limit an indifference stock
    double limiting_temperature = 0.0;///< alpha_true * limit
};

namespace detail {

inline double default_divergence_bound(const EconomyParams& p, double limit) {
    return 1e6 * std::max({1.0, p.A - p.c, p.K_ex, std::isfinite(limit) ? limit : 1.0});
}

// A mitigating firm's lowest possible carbon: half its abatement margin
// at the pre-round stock, lambda * (a - K_minus) for lambda =
// beta / (2 (1 + beta)), written to stay finite for beta in {0, inf}.
inline double abatement_margin(const EconomyParams& p, const FirmBelief& f, double K_minus) {
    const double bw = f.b_coeff(p);
    return (bw * p.d - (1.0 - bw) * K_minus) / 2.0;
}

// Rounds with Q < z must grant every firm its abatement margin.
inline bool min_carbon_floor_holds(const EconomyParams& p, const std::vector<FirmBelief>& beliefs,
                                   const Equilibrium& eq) {
    if (!(eq.Q < p.z())) return true;
    const double slack = 1e-9 * std::max({1.0, p.A - p.c, eq.K});
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        const double K_minus = eq.K - eq.strategies[i].k;
        if (eq.strategies[i].k + slack < abatement_margin(p, beliefs[i], K_minus)) return false;
    }
    return true;
}

}  // namespace detail

/// Stock limit when full abatement is profitable (c + d < A) and the
/// schedule's indifference stocks stay at or under a declared bound:
/// the stock climbs toward that bound, never passing it. An infinite
/// bound (some firm never worries) makes the stock grow without limit,
/// reported as diverged once it passes the divergence bound.
/// stayed_below_limit here means K_m <= limit (+tol slack) throughout.
inline LimitVerdict check_limit_green(const EconomyParams& p, const BeliefSchedule& schedule,
                                      const LimitOptions& opts = {}) {
    p.validate();
    if (!(p.c + p.d < p.A))
        throw std::invalid_argument("check_limit_green: needs c + d < A");
    if (!schedule.limit_a || std::isnan(*schedule.limit_a) || *schedule.limit_a < 0.0)
        throw std::invalid_argument("check_limit_green: schedule must declare limit_a >= 0");
    if (!schedule.at) throw std::invalid_argument("check_limit_green: schedule has no belief rule");

    LimitVerdict v;
    v.limit = *schedule.limit_a;
    v.alpha_true = std::sqrt(p.d / (p.b * v.limit));
    v.limiting_temperature = p.d / (p.b * v.alpha_true);
    const double bound = opts.divergence_bound > 0.0 ? opts.divergence_bound
                                                     : detail::default_divergence_bound(p, v.limit);
    const double slack = std::isfinite(v.limit) ? opts.tol * std::max(1.0, v.limit) : 0.0;

    EconomyParams round_p = p;
    double K = p.K_ex;
    for (int m = 1; m <= opts.max_rounds; ++m) {
        const std::vector<FirmBelief> beliefs = schedule.at(m);
        double max_a = 0.0;
        for (const auto& f : beliefs) {
            const double a = f.a(p);
            if (a > v.limit * (1.0 + 1e-12))
                throw HypothesisViolation(m, "indifference stock exceeds the declared limit");
            max_a = std::max(max_a, a);
        }
        round_p.K_ex = K;
        const Equilibrium eq = solve(round_p, beliefs);
        if (eq.K < K - slack) v.strictly_increasing = false;      // stock never falls
        if (max_a > K + slack && !(eq.K > K)) v.strictly_increasing = false;
        if (!detail::min_carbon_floor_holds(p, beliefs, eq)) v.min_carbon_ok = false;
        K = eq.K;
        v.rounds = m;
        v.K_final = K;
        if (K > v.limit + slack) v.stayed_below_limit = false;
        if (K > bound) {
            v.status = LimitStatus::Diverged;
            v.gap = std::abs(K - v.limit);
            return v;
        }
        if (std::abs(K - v.limit) <= slack && std::isfinite(v.limit)) {
            v.status = LimitStatus::Converged;
            v.gap = std::abs(K - v.limit);
            return v;
        }
    }
    v.status = LimitStatus::MaxRounds;
    v.gap = std::abs(K - v.limit);
    return v;
}

/// Stock limit when full abatement never pays (c < A <= c + d): nobody is
/// ever green or orange, the stock climbs while anyone still produces, and
/// the limit is (A - c) / beta for the declared sensitivity floor. Every
/// firm must stay at least as concerned as the floor; a zero floor (some
/// firm never worries) makes the stock diverge. stayed_below_limit here
/// means the strict per-round bound K_m < (A - c) / min_j beta_j on every
/// producing round.
inline LimitVerdict check_limit_no_green(const EconomyParams& p, const BeliefSchedule& schedule,
                                         const LimitOptions& opts = {}) {
    p.validate();
    if (!(p.c < p.A) || !(p.A <= p.c + p.d))
        throw std::invalid_argument("check_limit_no_green: needs c < A <= c + d");
    if (!schedule.limit_beta || std::isnan(*schedule.limit_beta) || *schedule.limit_beta < 0.0)
        throw std::invalid_argument("check_limit_no_green: schedule must declare limit_beta >= 0");
    if (!schedule.at)
        throw std::invalid_argument("check_limit_no_green: schedule has no belief rule");

    LimitVerdict v;
    const double beta_floor = *schedule.limit_beta;
    v.limit = (p.A - p.c) / beta_floor;
    v.alpha_true = std::sqrt(beta_floor / p.b);
    v.limiting_temperature = (p.A - p.c) / std::sqrt(p.b * beta_floor);
    const double bound = opts.divergence_bound > 0.0 ? opts.divergence_bound
                                                     : detail::default_divergence_bound(p, v.limit);
    const double slack = std::isfinite(v.limit) ? opts.tol * std::max(1.0, v.limit) : 0.0;

    EconomyParams round_p = p;
    double K = p.K_ex;
    for (int m = 1; m <= opts.max_rounds; ++m) {
        const std::vector<FirmBelief> beliefs = schedule.at(m);
        double min_beta = kInfinity;
        for (const auto& f : beliefs) min_beta = std::min(min_beta, f.beta(p));
        if (min_beta < beta_floor * (1.0 - 1e-12))
            throw HypothesisViolation(m, "a belief drops below the declared sensitivity floor");
        round_p.K_ex = K;
        const Equilibrium eq = solve(round_p, beliefs);
        if (eq.stats.n_green + eq.stats.n_orange > 0)
            throw HypothesisViolation(m, "full abatement occurred despite A <= c + d");
        if (eq.Q > 0.0) {
            if (!(eq.K > K)) v.strictly_increasing = false;  // producing rounds add stock
            if (!(eq.K < (p.A - p.c) / min_beta)) v.stayed_below_limit = false;
        } else if (eq.K != K) {
            v.strictly_increasing = false;                   // idle rounds leave it untouched
        }
        K = eq.K;
        v.rounds = m;
        v.K_final = K;
        if (K > bound) {
            v.status = LimitStatus::Diverged;
            v.gap = std::abs(K - v.limit);
            return v;
        }
        if (std::abs(K - v.limit) <= slack && std::isfinite(v.limit)) {
            v.status = LimitStatus::Converged;
            v.gap = std::abs(K - v.limit);
            return v;
        }
    }
    v.status = LimitStatus::MaxRounds;
    v.gap = std::abs(K - v.limit);
    return v;
}

}  // namespace cournot
