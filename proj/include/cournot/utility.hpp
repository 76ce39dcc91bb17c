#pragma once

// General inverse demand P(Q) = u'(Q) for a representative consumer. The
// output side of a symmetric full-abatement profile solves one scalar FOC;
// the carbon side is unchanged from the linear model because a firm's
// technology mix never feeds back into the output FOC. Quadratic u
// reproduces the linear demand model exactly, which gives the cross-check
// against the closed-form solver.

#include <functional>
#include <string>
#include <vector>

#include "model.hpp"

namespace cournot {

/// Consumer utility through its first three derivatives.
struct Utility {
    std::function<double(double)> marginal;   ///< u'(x), the inverse demand
    std::function<double(double)> curvature;  ///< u''(x)
    std::function<double(double)> third;      ///< u'''(x)
    std::string name;
};

inline Utility quadratic_utility(double A) {
    if (!(A > 0.0) || !std::isfinite(A))
        throw std::invalid_argument("quadratic_utility: A must be finite and > 0");
    Utility u;
    u.marginal = [A](double x) { return std::max(A - x, 0.0); };
    u.curvature = [A](double x) { return x < A ? -1.0 : 0.0; };
    u.third = [](double) { return 0.0; };
    u.name = "quadratic";
    return u;
}

inline Utility crra_utility(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("crra_utility: gamma must be finite and > 0");
    Utility u;
    u.marginal = [gamma](double x) { return std::pow(x, -gamma); };
    u.curvature = [gamma](double x) { return -gamma * std::pow(x, -gamma - 1.0); };
    u.third = [gamma](double x) { return gamma * (gamma + 1.0) * std::pow(x, -gamma - 2.0); };
    u.name = "crra";
    return u;
}

inline Utility log_utility() {
    Utility u = crra_utility(1.0);
    u.name = "log";
    return u;
}

/// Relative curvature -x u''(x) / u'(x) of demand at consumption x. A
/// symmetric interior equilibrium needs it below the firm count near zero.
inline double relative_curvature(const Utility& u, double x) {
    return -x * u.curvature(x) / u.marginal(x);
}

/// Stationarity gap of the symmetric full-abatement profile at per-firm
/// output x, against a clean unit cost (c + d in the linear model).
inline double symmetric_foc_residual(const Utility& u, int n, double unit_cost, double x) {
    return u.curvature(double(n) * x) * x + u.marginal(double(n) * x) - unit_cost;
}

struct SymmetricOptions {
    double tol = 1e-12;    ///< accepted |FOC residual|, relative to unit cost
    double x_min = 1e-12;  ///< left end of the bracket search
    double x_max = 1e12;   ///< growth cap of the bracket search
};

/// Per-firm output of the symmetric full-abatement profile, if one exists:
/// the root of the FOC, bracketed by doubling and closed by bisection with
/// a Newton polish. A nonpositive residual already at x_min means the
/// stationarity value never exceeds the clean cost; when demand is at least
/// as curved as the firm count near zero that is a legitimate no-solution
/// verdict (nullopt, e.g. isoelastic with gamma >= n), otherwise the demand
/// level itself cannot cover the cost and the call fails. A residual that
/// is not strictly decreasing across the bracket is a structural failure.
inline std::optional<double> solve_symmetric(const Utility& u, int n, double unit_cost,
                                             const SymmetricOptions& opts = {}) {
    if (n < 1) throw std::invalid_argument("solve_symmetric: needs n >= 1");
    if (!(unit_cost > 0.0) || !std::isfinite(unit_cost))
        throw std::invalid_argument("solve_symmetric: unit cost must be finite and > 0");
    if (!u.marginal || !u.curvature)
        throw std::invalid_argument("solve_symmetric: utility lacks derivative callables");

    const auto g = [&](double x) { return symmetric_foc_residual(u, n, unit_cost, x); };
    const auto slope = [&](double x) {
        return u.third ? double(n) * u.third(double(n) * x) * x + double(n + 1) * u.curvature(double(n) * x)
                       : 0.0;
    };

    double lo = opts.x_min;
    double g_lo = g(lo);
    if (!std::isfinite(g_lo) && g_lo > 0.0) g_lo = 1.0;  // u'(0+) = inf is a valid left end
    if (!(g_lo > 0.0)) {
        // Probe upward until the curvature ratio evaluates cleanly; an
        // inf/inf marginal right at x_min must not decide the verdict.
        for (double x : {opts.x_min, 1e-9, 1e-6, 1e-3, 1e-1, 1.0}) {
            const double rho = relative_curvature(u, double(n) * x);
            if (!std::isfinite(rho)) continue;
            if (rho >= double(n)) return std::nullopt;
            break;
        }
        throw SolverError("solve_symmetric: demand cannot cover the unit cost near zero output");
    }

    double hi = lo;
    double g_hi = g_lo;
    while (g_hi > 0.0) {
        hi *= 2.0;
        if (hi > opts.x_max)
            throw SolverError("solve_symmetric: no sign change below the bracket cap");
        g_hi = g(hi);
    }

    const double tol = opts.tol * std::max(1.0, unit_cost);
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        mid = 0.5 * (lo + hi);
        const double g_mid = g(mid);
        if (std::abs(g_mid) <= tol) break;
        (g_mid > 0.0 ? lo : hi) = mid;
    }
    for (int it = 0; it < 4; ++it) {  // Newton polish; bisection already close
        const double s = slope(mid);
        if (!(s < 0.0)) break;
        const double step = g(mid) / s;
        if (!std::isfinite(step)) break;
        const double next = mid - step;
        if (!(next > 0.0)) break;
        mid = next;
    }

    if (!(std::abs(g(mid)) <= tol))
        throw SolverError("solve_symmetric: residual did not close under tolerance");
    for (double x : {0.5 * mid, mid, 2.0 * mid})
        if (u.marginal(double(n) * x) > 0.0 && !(slope(x) < 0.0))
            throw SolverError("solve_symmetric: FOC is not strictly decreasing near the root");
    return mid;
}

/// The carbon allocation that would make every firm's technology mix
/// interior at a common output q0: total stock (K_ex + sum a_i) / (n + 1),
/// each firm holding the gap to its own indifference stock. Infeasible
/// entries (a firm pushed below zero or past fully dirty) are reported,
/// not clamped.
struct CarbonProfile {
    bool feasible = true;
    double K = 0.0;
    std::vector<double> k;
    std::vector<double> r;
    std::vector<int> violating;
};

inline CarbonProfile interior_carbon_profile(const EconomyParams& p,
                                             const std::vector<FirmBelief>& beliefs,
                                             double q0) {
    p.validate();
    if (!(q0 > 0.0) || !std::isfinite(q0))
        throw std::invalid_argument("interior_carbon_profile: q0 must be finite and > 0");
    if (beliefs.empty()) throw std::invalid_argument("interior_carbon_profile: no firms");
    const int n = int(beliefs.size());

    CarbonProfile out;
    double a_sum = 0.0;
    for (const auto& f : beliefs) {
        f.validate();
        const double a = f.a(p);
        if (!std::isfinite(a))
            throw std::invalid_argument(
                "interior_carbon_profile: a firm with alpha_sq = 0 has no interior mix");
        a_sum += a;
    }
    out.K = (p.K_ex + a_sum) / double(n + 1);
    out.k.reserve(std::size_t(n));
    out.r.reserve(std::size_t(n));
    const double slack = 1e-12 * std::max({1.0, q0, out.K});
    for (int i = 0; i < n; ++i) {
        const double k = beliefs[std::size_t(i)].a(p) - out.K;
        out.k.push_back(k);
        out.r.push_back(k / q0);
        if (k < -slack || k > q0 + slack) {
            out.feasible = false;
            out.violating.push_back(i);
        }
    }
    return out;
}

}  // namespace cournot
