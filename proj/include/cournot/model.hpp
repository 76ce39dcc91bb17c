#pragma once

// Single-firm layer: market constants, climate beliefs, and the closed-form
// best response of one firm against the aggregates chosen by everyone else.
//
// A firm picks a quantity q and a technology mix r in [0,1]; r is the share
// of production run on the dirty process, so its carbon output is k = r*q.
// The expected tax on a unit of carbon is linear in total carbon, with slope
// beta = b * E[alpha^2] under the firm's belief about the climate response
// alpha. Everything downstream is driven by two per-firm coefficients:
//
//   beta_i = b_i * alpha_i^2          (tax sensitivity)
//   a_i    = d / beta_i               (indifference carbon stock)
//
// beta_i = 0 is kept as the symbolic convention a_i = +inf, beta_i*a_i = d;
// beta_i = +inf (an infinitely concerned firm) gives a_i = 0. All formulas
// below are arranged so neither convention ever produces 0 * inf.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace cournot {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Market and tax constants shared by all firms.
struct EconomyParams {
    double A = 0.0;     ///< demand intercept (price at zero supply)
    double b = 0.0;     ///< tax slope per unit carbon per unit squared response
    double c = 0.0;     ///< unit cost of the emitting technology
    double d = 0.0;     ///< unit cost premium of the clean technology
    double K_ex = 0.0;  ///< pre-existing carbon stock

    /// Demand headroom of a clean producer. z <= 0 means clean production
    /// can never break even.
    double z() const noexcept { return A - c - d; }

    void validate() const {
        if (!(A > 0.0) || !std::isfinite(A)) throw std::invalid_argument("economy.A must be finite and > 0");
        if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("economy.b must be finite and >= 0");
        if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("economy.c must be finite and > 0");
        if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("economy.d must be finite and > 0");
        if (!(K_ex >= 0.0) || !std::isfinite(K_ex)) throw std::invalid_argument("economy.K_ex must be finite and >= 0");
    }
};

/// One firm's belief about the squared climate response, plus an optional
/// per-firm risk weight that replaces the economy-wide b.
struct FirmBelief {
    double alpha_sq = 0.0;                ///< E[alpha^2]; +inf = infinitely concerned
    std::optional<double> risk_weight{};  ///< overrides EconomyParams::b when set

    double beta(const EconomyParams& p) const noexcept {
        const double w = risk_weight ? *risk_weight : p.b;
        if (w == 0.0 || alpha_sq == 0.0) return 0.0;
        return w * alpha_sq;
    }

    /// Indifference stock a = d/beta; +inf when beta = 0, 0 when beta = +inf.
    double a(const EconomyParams& p) const noexcept {
        const double be = beta(p);
        return be > 0.0 ? p.d / be : kInfinity;
    }

    /// 1/(1+beta), the demand-passthrough weight of a fully dirty producer.
    double b_coeff(const EconomyParams& p) const noexcept {
        return 1.0 / (1.0 + beta(p));
    }

    void validate() const {
        if (!(alpha_sq >= 0.0)) throw std::invalid_argument("firm.alpha_sq must be >= 0");
        if (risk_weight && (!(*risk_weight >= 0.0) || !std::isfinite(*risk_weight)))
            throw std::invalid_argument("firm.risk_weight must be finite and >= 0");
    }
};

/// Aggregates chosen by the other firms.
struct Environment {
    double Q_minus = 0.0;  ///< total quantity of the others
    double K_minus = 0.0;  ///< carbon stock excluding this firm (includes K_ex)

    void validate(const EconomyParams& p) const {
        if (!(Q_minus >= 0.0) || !(Q_minus <= p.A))
            throw std::invalid_argument("environment.Q_minus must lie in [0, A]");
        if (!(K_minus >= 0.0)) throw std::invalid_argument("environment.K_minus must be >= 0");
    }
};

/// Quantity, dirty share and carbon of one firm; k = r*q always.
struct Strategy {
    double q = 0.0;
    double r = 0.0;
    double k = 0.0;

    static Strategy zero() noexcept { return {}; }

    static Strategy from_qr(double q, double r) noexcept {
        if (q <= 0.0) return {};
        return {q, r, r * q};
    }
};

/// Best-response regime of a firm given the others' aggregates.
enum class Color { White, Green, Orange, Red };

inline const char* to_string(Color c) noexcept {
    switch (c) {
        case Color::White:  return "white";
        case Color::Green:  return "green";
        case Color::Orange: return "orange";
        default:            return "red";
    }
}

namespace detail {

// Scaled white/red discriminant (z - Q_minus + beta*(a - K_minus)) / (1+beta).
// The division folds the beta = 0 (beta*a = d) and beta = inf (a = 0)
// conventions into ordinary arithmetic:
//   bw*(A - c - Q_minus) - (1-bw)*K_minus,   bw = 1/(1+beta).
inline double white_red_margin(const EconomyParams& p, double bw, const Environment& env) noexcept {
    return bw * (p.A - p.c - env.Q_minus) - (1.0 - bw) * env.K_minus;
}

}  // namespace detail

/// Which of the four regimes the firm's best response falls into:
///   White  - stays out of the market,
///   Green  - produces fully clean (r = 0),
///   Orange - produces with an interior technology mix,
///   Red    - produces fully dirty (r = 1).
inline Color classify_color(const EconomyParams& p, const FirmBelief& belief, const Environment& env) {
    p.validate();
    belief.validate();
    env.validate(p);

    const double z = p.z();
    const double a = belief.a(p);
    const double wr = detail::white_red_margin(p, belief.b_coeff(p), env);

    if (wr <= 0.0 && env.Q_minus >= z) return Color::White;
    if (env.K_minus >= a && env.Q_minus < z) return Color::Green;
    if (env.K_minus < a && env.Q_minus - env.K_minus < z - a) return Color::Orange;
    return Color::Red;
}

/// Unique profit-maximizing strategy against the given environment.
inline Strategy best_response(const EconomyParams& p, const FirmBelief& belief, const Environment& env) {
    const Color color = classify_color(p, belief, env);
    const double z = p.z();

    switch (color) {
        case Color::White:
            return Strategy::zero();
        case Color::Green:
            return Strategy::from_qr(0.5 * (z - env.Q_minus), 0.0);
        case Color::Orange: {
            const double q = 0.5 * (z - env.Q_minus);
            const double k = 0.5 * (belief.a(p) - env.K_minus);
            return {q, k / q, k};
        }
        default: {
            const double q = 0.5 * detail::white_red_margin(p, belief.b_coeff(p), env);
            return Strategy::from_qr(std::max(q, 0.0), 1.0);
        }
    }
}

/// Belief whose indifference stock equals `a` (alpha_sq = d / (w * a)).
inline FirmBelief belief_from_a(const EconomyParams& p, double a,
                                std::optional<double> risk_weight = {}) {
    const double w = risk_weight ? *risk_weight : p.b;
    if (!(w > 0.0)) throw std::invalid_argument("belief_from_a: needs a positive risk weight");
    if (!(a > 0.0)) throw std::invalid_argument("belief_from_a: a must be > 0");
    FirmBelief f;
    f.alpha_sq = std::isfinite(a) ? p.d / (w * a) : 0.0;
    f.risk_weight = risk_weight;
    return f;
}

/// Belief whose demand-passthrough weight 1/(1+beta) equals `bw`.
inline FirmBelief belief_from_b_coeff(const EconomyParams& p, double bw,
                                      std::optional<double> risk_weight = {}) {
    const double w = risk_weight ? *risk_weight : p.b;
    if (!(w > 0.0)) throw std::invalid_argument("belief_from_b_coeff: needs a positive risk weight");
    if (!(bw > 0.0) || !(bw <= 1.0))
        throw std::invalid_argument("belief_from_b_coeff: coefficient must lie in (0, 1]");
    FirmBelief f;
    f.alpha_sq = (1.0 / bw - 1.0) / w;
    f.risk_weight = risk_weight;
    return f;
}

/// Expected one-shot profit of playing s against env. Only valid while the
/// price stays nonnegative; q + Q_minus beyond A is rejected, not clipped.
inline double expected_profit(const EconomyParams& p, const FirmBelief& belief,
                              const Environment& env, const Strategy& s) {
    p.validate();
    belief.validate();
    env.validate(p);
    if (!(s.q >= 0.0) || !(s.r >= 0.0) || !(s.r <= 1.0))
        throw std::invalid_argument("strategy requires q >= 0 and r in [0, 1]");
    if (s.q + env.Q_minus > p.A)
        throw std::domain_error("expected_profit: q + Q_minus exceeds A (price would be negative)");

    const double revenue = (p.A - s.q - env.Q_minus) * s.q;
    const double tax = s.k == 0.0 ? 0.0 : belief.beta(p) * (s.k + env.K_minus) * s.k;
    const double cost = (p.c + p.d - p.d * s.r) * s.q;
    return revenue - tax - cost;
}

}  // namespace cournot
