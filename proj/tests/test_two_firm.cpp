#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cournot/two_firm.hpp"

using namespace cournot;

namespace {

EconomyParams make_params(double A, double b, double c, double d, double K_ex = 0.0) {
    EconomyParams p;
    p.A = A;
    p.b = b;
    p.c = c;
    p.d = d;
    p.K_ex = K_ex;
    return p;
}

TwoFirmRegime classify_as(const EconomyParams& p, double a1, double a2) {
    const FirmBelief f1 = std::isinf(a1) ? FirmBelief{} : belief_from_a(p, a1);
    const FirmBelief f2 = std::isinf(a2) ? FirmBelief{} : belief_from_a(p, a2);
    return classify_two_firm(p, f1, f2);
}

Equilibrium duo(const EconomyParams& p, double a1, double a2) {
    const FirmBelief f1 = std::isinf(a1) ? FirmBelief{} : belief_from_a(p, a1);
    const FirmBelief f2 = std::isinf(a2) ? FirmBelief{} : belief_from_a(p, a2);
    return two_firm_equilibrium(p, f1, f2);
}

}  // namespace

TEST_CASE("each duopoly regime is hit by a representative point") {
    const EconomyParams cheap = make_params(10, 1, 1, 1);   // z = 8 > d
    const EconomyParams costly = make_params(6, 1, 1, 3);   // 0 < z = 2 <= d
    const EconomyParams hopeless = make_params(3, 1, 1, 5); // z < 0

    FirmBelief alarmed;
    alarmed.alpha_sq = kInfinity;
    CHECK(classify_two_firm(cheap, alarmed, alarmed) == TwoFirmRegime::GreenGreen);
    CHECK(classify_as(cheap, 2.0, 2.5) == TwoFirmRegime::OrangeOrange);
    CHECK(classify_as(cheap, 1.0, 4.0) == TwoFirmRegime::GreenOrange);
    CHECK(classify_as(cheap, 4.0, 7.0) == TwoFirmRegime::OrangeRed);
    CHECK(classify_as(cheap, 1.0, 9.0) == TwoFirmRegime::GreenRed);
    CHECK(classify_as(cheap, 9.0, 12.0) == TwoFirmRegime::RedRed);
    CHECK(classify_as(costly, 1.0, 20.0) == TwoFirmRegime::WhiteRed);
    CHECK(classify_as(hopeless, 4.0, 4.0) == TwoFirmRegime::RedRed);
    CHECK(classify_as(hopeless, 1.25, 25.0) == TwoFirmRegime::WhiteRed);

    const EconomyParams dead = make_params(1, 1, 2, 1);  // demand below unit cost
    CHECK(classify_as(dead, 1.0, 2.0) == TwoFirmRegime::AllWhite);
    const Equilibrium idle = duo(dead, 1.0, 2.0);
    CHECK(idle.Q == 0.0);
    CHECK(idle.K == 0.0);

    CHECK(std::string(to_string(TwoFirmRegime::OrangeRed)) == "orange-red");
    CHECK(std::string(to_string(TwoFirmRegime::AllWhite)) == "all-white");
}

TEST_CASE("classification insists on clean inputs") {
    const EconomyParams p = make_params(10, 1, 1, 1);
    CHECK_THROWS_AS(classify_as(p, 4.0, 2.0), std::invalid_argument);
    EconomyParams dirty = p;
    dirty.K_ex = 1.0;
    CHECK_THROWS_AS(classify_as(dirty, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("duopoly closed forms give the hand-checked rationals") {
    const EconomyParams p = make_params(10, 1, 1, 1);  // z = 8

    SECTION("both partially mitigate") {
        const Equilibrium eq = duo(p, 2.0, 2.5);
        CHECK(eq.Q == Catch::Approx(16.0 / 3.0).margin(1e-12));
        CHECK(eq.K == Catch::Approx(1.5).margin(1e-12));
        CHECK(eq.strategies[0].q == Catch::Approx(8.0 / 3.0).margin(1e-12));
        CHECK(eq.strategies[0].k == Catch::Approx(0.5).margin(1e-12));
        CHECK(eq.strategies[1].k == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("full abatement next to partial abatement") {
        const Equilibrium eq = duo(p, 1.0, 4.0);
        CHECK(eq.strategies[0].q == Catch::Approx(8.0 / 3.0).margin(1e-12));
        CHECK(eq.strategies[0].k == 0.0);
        CHECK(eq.strategies[1].k == Catch::Approx(2.0).margin(1e-12));
        CHECK(eq.K == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("full abatement next to a dirty firm") {
        const Equilibrium eq = duo(p, 1.0, 9.0);
        const double beta2 = 1.0 / 9.0;
        CHECK(eq.strategies[0].q == Catch::Approx(79.0 / 31.0).margin(1e-12));
        CHECK(eq.strategies[1].q == Catch::Approx(90.0 / 31.0).margin(1e-12));
        CHECK(eq.strategies[1].k == eq.strategies[1].q);
        CHECK(eq.K == Catch::Approx(90.0 / 31.0).margin(1e-12));
        CHECK(eq.Q == Catch::Approx(169.0 / 31.0).margin(1e-12));
        CHECK(eq.Q == Catch::Approx((2.0 * (1.0 + beta2) * p.z() + p.d) / (3.0 + 4.0 * beta2))
                          .margin(1e-12));
    }
    SECTION("partial abatement next to a dirty firm") {
        const Equilibrium eq = duo(p, 4.0, 7.0);
        CHECK(eq.Q == Catch::Approx(5.375).margin(1e-12));
        CHECK(eq.K == Catch::Approx(3.375).margin(1e-12));
        CHECK(eq.strategies[0].q == Catch::Approx(2.625).margin(1e-12));
        CHECK(eq.strategies[0].k == Catch::Approx(0.625).margin(1e-12));
        CHECK(eq.strategies[1].q == Catch::Approx(2.75).margin(1e-12));
    }
    SECTION("both dirty") {
        const Equilibrium eq = duo(p, 9.0, 12.0);
        const double t1 = 9.0 / 10.0, t2 = 12.0 / 13.0;
        CHECK(eq.Q == Catch::Approx(3.0 * (t1 + t2)).margin(1e-12));
        CHECK(eq.K == Catch::Approx(eq.Q).margin(1e-15));
        CHECK(eq.strategies[0].q == Catch::Approx(3.0 * (2.0 * t1 - t2)).margin(1e-12));
        CHECK(eq.strategies[1].q == Catch::Approx(3.0 * (2.0 * t2 - t1)).margin(1e-12));
    }
    SECTION("one firm priced out") {
        const EconomyParams hopeless = make_params(3, 1, 1, 5);
        const Equilibrium eq = duo(hopeless, 1.25, 25.0);
        const double beta2 = 5.0 / 25.0;
        CHECK(eq.strategies[0].q == 0.0);
        CHECK(eq.strategies[1].q
              == Catch::Approx((hopeless.A - hopeless.c) / (2.0 * (1.0 + beta2))).margin(1e-12));
        CHECK(eq.Q == Catch::Approx(5.0 / 6.0).margin(1e-12));
    }
}

TEST_CASE("duopoly closed forms agree with the general solver across both maps") {
    const std::vector<EconomyParams> econs{make_params(10, 1, 1, 1), make_params(6, 1, 1, 3)};
    for (const auto& p : econs) {
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < 12; ++j) {
                const double a1 = 0.2 * std::pow(60.0, i / 11.0);
                const double a2 = 0.2 * std::pow(60.0, j / 11.0);
                const FirmBelief f1 = belief_from_a(p, a1);
                const FirmBelief f2 = belief_from_a(p, a2);

                const Equilibrium closed = two_firm_equilibrium(p, f1, f2);
                const Equilibrium general = solve(p, {f1, f2});
                CHECK(closed.Q == Catch::Approx(general.Q).margin(1e-9));
                CHECK(closed.K == Catch::Approx(general.K).margin(1e-9));
                // Labels can differ on knife-edge cells (a zero-output firm is
                // white or green interchangeably), so compare strategies only.
                for (int f = 0; f < 2; ++f) {
                    CHECK(closed.strategies[f].q
                          == Catch::Approx(general.strategies[f].q).margin(1e-9));
                    CHECK(closed.strategies[f].k
                          == Catch::Approx(general.strategies[f].k).margin(1e-9));
                }
                CHECK(closed.residual <= 1e-9);
            }
        }
    }
}

TEST_CASE("swapping the firms swaps the reported strategies exactly") {
    const EconomyParams p = make_params(10, 1, 1, 1);
    const FirmBelief f1 = belief_from_a(p, 4.0);
    const FirmBelief f2 = belief_from_a(p, 7.0);
    const Equilibrium fwd = two_firm_equilibrium(p, f1, f2);
    const Equilibrium rev = two_firm_equilibrium(p, f2, f1);
    CHECK(fwd.strategies[0].q == rev.strategies[1].q);
    CHECK(fwd.strategies[0].k == rev.strategies[1].k);
    CHECK(fwd.strategies[1].q == rev.strategies[0].q);
    CHECK(fwd.colors[0] == rev.colors[1]);
    CHECK(fwd.colors[1] == rev.colors[0]);
}

TEST_CASE("strategies vary continuously across regime boundaries") {
    const EconomyParams cheap = make_params(10, 1, 1, 1);
    const double eps = 1e-9;

    auto gap = [](const Equilibrium& x, const Equilibrium& y) {
        double g = std::max(std::fabs(x.Q - y.Q), std::fabs(x.K - y.K));
        for (int f = 0; f < 2; ++f) {
            g = std::max(g, std::fabs(x.strategies[f].q - y.strategies[f].q));
            g = std::max(g, std::fabs(x.strategies[f].k - y.strategies[f].k));
        }
        return g;
    };

    SECTION("between the two mitigating regimes") {
        const double a2 = 3.0;  // boundary at a1 = a2 / 2
        const Equilibrium lo = duo(cheap, 1.5 - eps, a2);
        const Equilibrium hi = duo(cheap, 1.5 + eps, a2);
        CHECK(classify_as(cheap, 1.5 - eps, a2) == TwoFirmRegime::GreenOrange);
        CHECK(classify_as(cheap, 1.5 + eps, a2) == TwoFirmRegime::OrangeOrange);
        CHECK(gap(lo, hi) <= 1e-7);
    }
    SECTION("between partial mitigation and exit from mitigation") {
        const double a2 = 9.0;
        const double gru = (cheap.z() + 2.0 * cheap.d) * a2 / (3.0 * a2 + 4.0 * cheap.d);
        const Equilibrium lo = duo(cheap, gru - eps, a2);
        const Equilibrium hi = duo(cheap, gru + eps, a2);
        CHECK(classify_as(cheap, gru - eps, a2) == TwoFirmRegime::GreenRed);
        CHECK(classify_as(cheap, gru + eps, a2) == TwoFirmRegime::OrangeRed);
        CHECK(gap(lo, hi) <= 1e-7);
    }
    SECTION("where the concerned firm stops producing") {
        const EconomyParams costly = make_params(6, 1, 1, 3);  // z = 2
        const Equilibrium at = duo(costly, 1.0, 12.0);
        CHECK(classify_as(costly, 1.0, 12.0) == TwoFirmRegime::GreenRed);
        CHECK(classify_as(costly, 1.0, 12.0 + eps) == TwoFirmRegime::WhiteRed);
        CHECK(at.strategies[0].q == 0.0);
        CHECK(at.strategies[1].q == Catch::Approx(2.0).margin(1e-12));
        CHECK(at.Q == Catch::Approx(2.0).margin(1e-12));
        CHECK(at.K == Catch::Approx(2.0).margin(1e-12));
        CHECK(gap(at, duo(costly, 1.0, 12.0 + eps)) <= 1e-7);
    }
    SECTION("around the point where four regimes meet") {
        const EconomyParams costly = make_params(6, 1, 1, 3);
        const double a1c = costly.z();               // 2
        const double a2c = 2.0 * costly.z() * costly.d / (costly.d - costly.z());  // 12
        const double h = 1e-8;
        const Equilibrium center = duo(costly, a1c, a2c);
        CHECK(center.Q == Catch::Approx(2.0).margin(1e-10));
        CHECK(center.K == Catch::Approx(2.0).margin(1e-10));
        CHECK(center.strategies[0].q == Catch::Approx(0.0).margin(1e-10));
        for (const double s1 : {-1.0, 1.0}) {
            for (const double s2 : {-1.0, 1.0}) {
                const Equilibrium corner = duo(costly, a1c + s1 * h, a2c + s2 * h);
                CHECK(gap(center, corner) <= 1e-6);
            }
        }
    }
}

TEST_CASE("a fully skeptical rival turns the thresholds into their limits") {
    const EconomyParams costly = make_params(6, 1, 1, 3);  // z = 2, exit cap d = 3
    CHECK(classify_as(costly, 2.9, kInfinity) == TwoFirmRegime::WhiteRed);
    CHECK(classify_as(costly, 3.0, kInfinity) == TwoFirmRegime::RedRed);
    CHECK(classify_as(costly, 3.1, kInfinity) == TwoFirmRegime::RedRed);

    for (const double a1 : {2.9, 3.1}) {
        const FirmBelief f1 = belief_from_a(costly, a1);
        const FirmBelief skeptic{};
        const Equilibrium closed = two_firm_equilibrium(costly, f1, skeptic);
        const Equilibrium general = solve(costly, {f1, skeptic});
        CHECK(closed.Q == Catch::Approx(general.Q).margin(1e-9));
        for (int f = 0; f < 2; ++f)
            CHECK(closed.strategies[f].q
                  == Catch::Approx(general.strategies[f].q).margin(1e-9));
    }

    const EconomyParams cheap = make_params(10, 1, 1, 1);  // z = 8 > d: no exit region
    CHECK(classify_as(cheap, 0.05, kInfinity) == TwoFirmRegime::GreenRed);
    CHECK(classify_as(cheap, (cheap.z() + 2.0) / 3.0 + 0.01, kInfinity)
          == TwoFirmRegime::OrangeRed);
}

TEST_CASE("the regime map tiles the plane row-major with per-cell summaries") {
    const EconomyParams p = make_params(10, 1, 1, 1);
    GridSpec grid;
    grid.a1_min = 1.0;
    grid.a1_max = 9.0;
    grid.a2_min = 1.0;
    grid.a2_max = 9.0;
    grid.resolution = 5;

    const auto cells = regime_map(p, grid);
    REQUIRE(cells.size() == 25);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const RegimeCell& cell = cells[std::size_t(i) * 5 + j];
            CHECK(cell.a1 == Catch::Approx(1.0 + 2.0 * i).margin(1e-12));
            CHECK(cell.a2 == Catch::Approx(1.0 + 2.0 * j).margin(1e-12));
            const Equilibrium eq = duo(p, cell.a1, cell.a2);
            CHECK(cell.Q == Catch::Approx(eq.Q).margin(1e-12));
            CHECK(cell.K == Catch::Approx(eq.K).margin(1e-12));
            CHECK(cell.q1 == Catch::Approx(eq.strategies[0].q).margin(1e-12));
            CHECK(cell.k2 == Catch::Approx(eq.strategies[1].k).margin(1e-12));
        }
    }
    // Mirror cells agree on everything except the firm ordering.
    CHECK(cells[1].regime == cells[5].regime);
    CHECK(cells[1].q1 == cells[5].q2);
    CHECK(cells[1].k1 == cells[5].k2);

    GridSpec bad = grid;
    bad.resolution = 1;
    CHECK_THROWS_AS(regime_map(p, bad), std::invalid_argument);
    bad = grid;
    bad.a1_min = 0.0;
    CHECK_THROWS_AS(regime_map(p, bad), std::invalid_argument);
    EconomyParams dirty = p;
    dirty.K_ex = 0.5;
    CHECK_THROWS_AS(regime_map(dirty, grid), std::invalid_argument);
}
