#pragma once

// Duopoly specialization without pre-existing carbon (K_ex = 0). With two
// firms the equilibrium regime is determined by where (a_1, a_2) falls
// relative to a handful of lines and one hyperbola, and every regime has a
// short closed form. Labels are canonical for a_1 <= a_2; inputs arriving in
// the other order are solved mirrored and swapped back.

#include <array>

#include "solver.hpp"

namespace cournot {

enum class TwoFirmRegime {
    GreenGreen,
    OrangeOrange,
    GreenOrange,
    RedRed,
    GreenRed,
    OrangeRed,
    WhiteRed,
    AllWhite,
};

inline const char* to_string(TwoFirmRegime r) noexcept {
    switch (r) {
        case TwoFirmRegime::GreenGreen:   return "green-green";
        case TwoFirmRegime::OrangeOrange: return "orange-orange";
        case TwoFirmRegime::GreenOrange:  return "green-orange";
        case TwoFirmRegime::RedRed:       return "red-red";
        case TwoFirmRegime::GreenRed:     return "green-red";
        case TwoFirmRegime::OrangeRed:    return "orange-red";
        case TwoFirmRegime::WhiteRed:     return "white-red";
        default:                          return "all-white";
    }
}

namespace detail {

// a_1 threshold below which firm 1 exits against a fully dirty firm 2;
// equals d*a_2/(a_2 + 2d), i.e. 2*xi_1 <= xi_2 in belief coordinates.
inline double exit_threshold(double d, double a2) noexcept {
    return std::isfinite(a2) ? d * a2 / (a2 + 2.0 * d) : d;
}

// a_1 boundary between the Green-Red and Orange-Red regimes.
inline double green_red_upper(double z, double d, double a2) noexcept {
    return std::isfinite(a2) ? (z + 2.0 * d) * a2 / (3.0 * a2 + 4.0 * d)
                             : (z + 2.0 * d) / 3.0;
}

// (d - z) * a_2 >= 2zd, the condition for an exit region to exist at this
// a_2 (only possible when z <= d).
inline bool exit_region_reachable(double z, double d, double a2) noexcept {
    return std::isfinite(a2) ? (d - z) * a2 >= 2.0 * z * d : d > z;
}

}  // namespace detail

/// Regime of the duopoly with firms sorted so a_1 <= a_2. Points on shared
/// boundaries take the first matching label in the order OrangeOrange,
/// GreenOrange, OrangeRed, GreenRed, RedRed, WhiteRed; the one-point
/// GreenGreen corner a_1 = a_2 = 0 is matched ahead of them.
inline TwoFirmRegime classify_two_firm(const EconomyParams& p,
                                       const FirmBelief& f1, const FirmBelief& f2) {
    p.validate();
    f1.validate();
    f2.validate();
    if (p.K_ex != 0.0)
        throw std::invalid_argument("classify_two_firm: requires K_ex = 0");
    const double a1 = f1.a(p);
    const double a2 = f2.a(p);
    if (a1 > a2) throw std::invalid_argument("classify_two_firm: firms must be sorted with a_1 <= a_2");

    if (p.A <= p.c) return TwoFirmRegime::AllWhite;
    const double z = p.z();
    const double d = p.d;

    if (z <= 0.0) {
        // Clean production cannot break even; either both firms run dirty or
        // the more concerned one exits.
        return a1 >= detail::exit_threshold(d, a2) ? TwoFirmRegime::RedRed
                                                   : TwoFirmRegime::WhiteRed;
    }

    if (a1 == 0.0 && a2 == 0.0) return TwoFirmRegime::GreenGreen;
    if (std::isfinite(a2) && a1 >= 0.5 * a2 && a2 <= 0.5 * (z + a1))
        return TwoFirmRegime::OrangeOrange;
    if (std::isfinite(a2) && a1 <= 0.5 * a2 && a2 <= 2.0 * z / 3.0)
        return TwoFirmRegime::GreenOrange;
    const double gru = detail::green_red_upper(z, d, a2);
    if (std::isfinite(a1) && a1 >= gru && a1 <= z && a2 >= 0.5 * (z + a1))
        return TwoFirmRegime::OrangeRed;
    if (a1 <= gru && a2 >= 2.0 * z / 3.0 && !(!std::isfinite(a2) ? d > z : (d - z) * a2 > 2.0 * z * d))
        return TwoFirmRegime::GreenRed;
    if (a1 >= z && a1 >= detail::exit_threshold(d, a2))
        return TwoFirmRegime::RedRed;
    if (detail::exit_region_reachable(z, d, a2) && a1 <= detail::exit_threshold(d, a2))
        return TwoFirmRegime::WhiteRed;
    throw SolverError("classify_two_firm: no regime matched (unexpected gap)");
}

namespace detail {

// Closed form per regime in sorted order; strategies[0] is the firm with
// the smaller a.
inline Equilibrium two_firm_closed_form(const EconomyParams& p,
                                        const FirmBelief& f1, const FirmBelief& f2,
                                        TwoFirmRegime regime) {
    const double z = p.z();
    const double d = p.d;
    const double a1 = f1.a(p);
    const double a2 = f2.a(p);
    const double t1 = f1.b_coeff(p);
    const double t2 = f2.b_coeff(p);
    const double beta2 = f2.beta(p);

    std::array<Strategy, 2> s{};
    std::array<Color, 2> col{};
    switch (regime) {
        case TwoFirmRegime::AllWhite:
            col = {Color::White, Color::White};
            break;
        case TwoFirmRegime::GreenGreen:
            col = {Color::Green, Color::Green};
            s[0] = s[1] = Strategy::from_qr(z / 3.0, 0.0);
            break;
        case TwoFirmRegime::OrangeOrange: {
            col = {Color::Orange, Color::Orange};
            const double q = z / 3.0;
            s[0] = Strategy::from_qr(q, (2.0 * a1 - a2) / 3.0 / q);
            s[1] = Strategy::from_qr(q, (2.0 * a2 - a1) / 3.0 / q);
            break;
        }
        case TwoFirmRegime::GreenOrange: {
            col = {Color::Green, Color::Orange};
            const double q = z / 3.0;
            s[0] = Strategy::from_qr(q, 0.0);
            s[1] = Strategy::from_qr(q, 0.5 * a2 / q);
            break;
        }
        case TwoFirmRegime::RedRed: {
            col = {Color::Red, Color::Red};
            const double base = (p.A - p.c) / 3.0;
            s[0] = Strategy::from_qr(std::max(base * (2.0 * t1 - t2), 0.0), 1.0);
            s[1] = Strategy::from_qr(std::max(base * (2.0 * t2 - t1), 0.0), 1.0);
            break;
        }
        case TwoFirmRegime::GreenRed: {
            col = {Color::Green, Color::Red};
            const double den = 3.0 + 4.0 * beta2;
            s[0] = Strategy::from_qr(std::max(((1.0 + 2.0 * beta2) * z - d) / den, 0.0), 0.0);
            s[1] = Strategy::from_qr((z + 2.0 * d) / den, 1.0);
            break;
        }
        case TwoFirmRegime::OrangeRed: {
            col = {Color::Orange, Color::Red};
            const double skew = std::isfinite(a2) ? d * a1 / (2.0 * a2) : 0.0;
            const double Q = (p.A - p.c - skew - 0.5 * z) / (3.0 * (1.0 + beta2)) + 0.5 * z;
            const double q1 = z - Q;
            const double k1 = 0.5 * (a1 + z) - Q;
            s[0] = Strategy::from_qr(q1, k1 / q1);
            s[1] = Strategy::from_qr(std::max(2.0 * Q - z, 0.0), 1.0);
            break;
        }
        default: {  // WhiteRed
            col = {Color::White, Color::Red};
            s[1] = Strategy::from_qr(std::max(0.5 * t2 * (p.A - p.c), 0.0), 1.0);
            break;
        }
    }

    Equilibrium eq;
    eq.strategies = {s[0], s[1]};
    eq.colors = {col[0], col[1]};
    eq.Q = s[0].q + s[1].q;
    eq.K = p.K_ex + s[0].k + s[1].k;
    return eq;
}

}  // namespace detail

/// Closed-form duopoly equilibrium; accepts firms in either order and
/// returns strategies in the order given (swapping beliefs swaps strategies
/// exactly).
inline Equilibrium two_firm_equilibrium(const EconomyParams& p,
                                        const FirmBelief& f1, const FirmBelief& f2) {
    const bool swapped = f1.a(p) > f2.a(p);
    const FirmBelief& lo = swapped ? f2 : f1;
    const FirmBelief& hi = swapped ? f1 : f2;
    const TwoFirmRegime regime = classify_two_firm(p, lo, hi);
    Equilibrium eq = detail::two_firm_closed_form(p, lo, hi, regime);
    if (swapped) {
        std::swap(eq.strategies[0], eq.strategies[1]);
        std::swap(eq.colors[0], eq.colors[1]);
    }
    const std::vector<FirmBelief> beliefs{f1, f2};
    eq.stats = make_partition_stats(p, beliefs, eq.colors);
    eq.residual = 0.0;
    for (int i = 0; i < 2; ++i) {
        Environment env{std::clamp(eq.Q - eq.strategies[i].q, 0.0, p.A),
                        std::max(eq.K - eq.strategies[i].k, 0.0)};
        const Strategy br = best_response(p, beliefs[i], env);
        eq.residual = std::max({eq.residual, std::fabs(br.q - eq.strategies[i].q),
                                std::fabs(br.k - eq.strategies[i].k)});
    }
    return eq;
}

struct RegimeCell {
    double a1 = 0.0;
    double a2 = 0.0;
    TwoFirmRegime regime = TwoFirmRegime::AllWhite;
    double Q = 0.0, K = 0.0;
    double q1 = 0.0, q2 = 0.0, k1 = 0.0, k2 = 0.0;
};

struct GridSpec {
    double a1_min = 0.0, a1_max = 0.0;
    double a2_min = 0.0, a2_max = 0.0;
    int resolution = 2;

    void validate() const {
        if (resolution < 2) throw std::invalid_argument("grid.resolution must be >= 2");
        if (!(a1_min > 0.0) || !(a1_max > a1_min))
            throw std::invalid_argument("grid a1 range must satisfy 0 < min < max");
        if (!(a2_min > 0.0) || !(a2_max > a2_min))
            throw std::invalid_argument("grid a2 range must satisfy 0 < min < max");
    }
};

/// Regime label and equilibrium summary over a rectangular (a_1, a_2) grid.
/// Cells are emitted row-major in a_1, then a_2.
inline std::vector<RegimeCell> regime_map(const EconomyParams& p, const GridSpec& grid) {
    p.validate();
    grid.validate();
    if (p.K_ex != 0.0) throw std::invalid_argument("regime_map: requires K_ex = 0");
    if (!(p.b > 0.0)) throw std::invalid_argument("regime_map: requires b > 0 to place beliefs");

    const int res = grid.resolution;
    std::vector<RegimeCell> cells(std::size_t(res) * res);
    for (int i = 0; i < res; ++i) {
        const double a1 = grid.a1_min + (grid.a1_max - grid.a1_min) * i / double(res - 1);
        for (int j = 0; j < res; ++j) {
            const double a2 = grid.a2_min + (grid.a2_max - grid.a2_min) * j / double(res - 1);
            const FirmBelief f1 = belief_from_a(p, a1);
            const FirmBelief f2 = belief_from_a(p, a2);
            const Equilibrium eq = two_firm_equilibrium(p, f1, f2);
            RegimeCell& cell = cells[std::size_t(i) * res + j];
            cell.a1 = a1;
            cell.a2 = a2;
            cell.regime = a1 <= a2 ? classify_two_firm(p, f1, f2) : classify_two_firm(p, f2, f1);
            cell.Q = eq.Q;
            cell.K = eq.K;
            cell.q1 = eq.strategies[0].q;
            cell.q2 = eq.strategies[1].q;
            cell.k1 = eq.strategies[0].k;
            cell.k2 = eq.strategies[1].k;
        }
    }
    return cells;
}

}  // namespace cournot
