#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cournot/model.hpp"
#include "support/oracles.hpp"

using namespace cournot;

namespace {

EconomyParams base_params() {
    EconomyParams p;
    p.A = 10.0;
    p.b = 1.0;
    p.c = 1.0;
    p.d = 2.0;
    p.K_ex = 0.0;
    return p;
}

}  // namespace

TEST_CASE("economy validation rejects out-of-domain constants") {
    EconomyParams p = base_params();
    REQUIRE_NOTHROW(p.validate());
    CHECK(p.z() == 7.0);

    auto bad = p;
    bad.A = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.b = -0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.c = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.d = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.K_ex = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.A = kInfinity;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("belief coefficients cover the zero and infinite concern ends") {
    const EconomyParams p = base_params();

    FirmBelief mid;
    mid.alpha_sq = 1.0;
    CHECK(mid.beta(p) == 1.0);
    CHECK(mid.a(p) == 2.0);
    CHECK(mid.b_coeff(p) == 0.5);

    FirmBelief skeptic;
    skeptic.alpha_sq = 0.0;
    CHECK(skeptic.beta(p) == 0.0);
    CHECK(skeptic.a(p) == kInfinity);
    CHECK(skeptic.b_coeff(p) == 1.0);

    FirmBelief alarmed;
    alarmed.alpha_sq = kInfinity;
    CHECK(alarmed.beta(p) == kInfinity);
    CHECK(alarmed.a(p) == 0.0);
    CHECK(alarmed.b_coeff(p) == 0.0);

    FirmBelief weighted;
    weighted.alpha_sq = 4.0;
    weighted.risk_weight = 0.25;
    CHECK(weighted.beta(p) == 1.0);  // weight replaces the economy-wide slope

    FirmBelief zero_weight;
    zero_weight.alpha_sq = kInfinity;
    zero_weight.risk_weight = 0.0;
    CHECK(zero_weight.beta(p) == 0.0);  // 0 * inf resolved to no concern

    FirmBelief bad;
    bad.alpha_sq = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("belief constructors invert the coefficient maps") {
    const EconomyParams p = base_params();

    const FirmBelief from_a = belief_from_a(p, 0.5);
    CHECK(from_a.a(p) == 0.5);
    CHECK(belief_from_a(p, kInfinity).alpha_sq == 0.0);
    CHECK_THROWS_AS(belief_from_a(p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(belief_from_a(p, -1.0), std::invalid_argument);

    const FirmBelief from_bw = belief_from_b_coeff(p, 0.25);
    CHECK(from_bw.alpha_sq == 3.0);
    CHECK(from_bw.b_coeff(p) == 0.25);
    CHECK(belief_from_b_coeff(p, 1.0).alpha_sq == 0.0);
    CHECK_THROWS_AS(belief_from_b_coeff(p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(belief_from_b_coeff(p, 1.5), std::invalid_argument);

    const FirmBelief weighted = belief_from_a(p, 4.0, 0.5);
    CHECK(weighted.a(p) == 4.0);
    CHECK(weighted.risk_weight == 0.5);

    EconomyParams no_slope = p;
    no_slope.b = 0.0;
    CHECK_THROWS_AS(belief_from_a(no_slope, 2.0), std::invalid_argument);
    CHECK(belief_from_a(no_slope, 2.0, 1.0).a(no_slope) == 2.0);
}

TEST_CASE("strategy construction keeps k = r*q and drops nonpositive output") {
    const Strategy s = Strategy::from_qr(2.0, 0.25);
    CHECK(s.q == 2.0);
    CHECK(s.r == 0.25);
    CHECK(s.k == 0.5);
    const Strategy none = Strategy::from_qr(0.0, 1.0);
    CHECK(none.q == 0.0);
    CHECK(none.k == 0.0);
    CHECK(Strategy::zero().q == 0.0);
}

TEST_CASE("regime names are the lowercase color words") {
    CHECK(std::string(to_string(Color::White)) == "white");
    CHECK(std::string(to_string(Color::Green)) == "green");
    CHECK(std::string(to_string(Color::Orange)) == "orange");
    CHECK(std::string(to_string(Color::Red)) == "red");
}

TEST_CASE("classification matches the four hand-built environments") {
    const EconomyParams p = base_params();  // z = 7

    const FirmBelief concerned = belief_from_a(p, 1.0);  // beta = 2
    CHECK(classify_color(p, concerned, {1.0, 1.5}) == Color::Green);

    const FirmBelief moderate = belief_from_a(p, 2.0);  // beta = 1
    CHECK(classify_color(p, moderate, {1.0, 1.0}) == Color::Orange);

    CHECK(classify_color(p, concerned, {7.0, 0.5}) == Color::Red);
    CHECK(classify_color(p, concerned, {8.0, 10.0}) == Color::White);

    // Infinitely skeptical firms can only land on the white/red side.
    FirmBelief skeptic;
    skeptic.alpha_sq = 0.0;
    CHECK(classify_color(p, skeptic, {1.0, 5.0}) == Color::Red);
    CHECK(classify_color(p, skeptic, {9.0, 5.0}) == Color::White);
}

TEST_CASE("best responses reproduce the per-regime closed forms") {
    const EconomyParams p = base_params();  // z = 7

    const FirmBelief concerned = belief_from_a(p, 1.0);
    const Strategy green = best_response(p, concerned, {1.0, 1.5});
    CHECK(green.q == 3.0);
    CHECK(green.r == 0.0);
    CHECK(green.k == 0.0);

    const FirmBelief moderate = belief_from_a(p, 2.0);
    const Strategy orange = best_response(p, moderate, {1.0, 1.0});
    CHECK(orange.q == 3.0);
    CHECK(orange.k == 0.5);
    CHECK(orange.r == Catch::Approx(0.5 / 3.0).margin(1e-15));

    const Strategy red = best_response(p, concerned, {7.0, 0.5});
    CHECK(red.q == Catch::Approx(1.0 / 6.0).margin(1e-15));
    CHECK(red.r == 1.0);
    CHECK(red.k == red.q);

    const Strategy white = best_response(p, concerned, {8.0, 10.0});
    CHECK(white.q == 0.0);

    // A crowded market plus a huge inherited stock still means shutdown.
    const Strategy squeezed = best_response(p, concerned, {8.9, 10.0});
    CHECK(squeezed.q == 0.0);
    CHECK(squeezed.k == 0.0);
}

TEST_CASE("strategies join continuously across the orange/red boundary") {
    const EconomyParams p = base_params();
    const FirmBelief f = belief_from_a(p, 1.0);  // beta = 2

    // At (6.5, 0.5) the orange and red formulas coincide at q = k = 1/4.
    const Strategy on = best_response(p, f, {6.5, 0.5});
    CHECK(on.q == Catch::Approx(0.25).margin(1e-15));
    CHECK(on.k == Catch::Approx(0.25).margin(1e-15));
    const Strategy just_orange = best_response(p, f, {6.5 - 1e-9, 0.5});
    const Strategy just_red = best_response(p, f, {6.5 + 1e-9, 0.5});
    CHECK(just_orange.q == Catch::Approx(on.q).margin(1e-8));
    CHECK(just_red.q == Catch::Approx(on.q).margin(1e-8));
    CHECK(just_orange.k == Catch::Approx(on.k).margin(1e-8));
    CHECK(just_red.k == Catch::Approx(on.k).margin(1e-8));
}

TEST_CASE("expected profit matches the hand-computed ledger") {
    const EconomyParams p = base_params();
    FirmBelief f;
    f.alpha_sq = 2.0;  // beta = 2
    const Environment env{2.0, 1.0};
    const Strategy s{2.0, 0.5, 1.0};
    // price 6, revenue 12, production cost 4, tax 2*(1+1)*1 = 4
    CHECK(expected_profit(p, f, env, s) == 4.0);

    CHECK_THROWS_AS(expected_profit(p, f, env, Strategy{9.0, 0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(expected_profit(p, f, env, Strategy{1.0, 1.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(expected_profit(p, f, env, Strategy{-1.0, 0.0, 0.0}), std::invalid_argument);

    // Zero carbon never meets the tax, even under infinite concern.
    FirmBelief alarmed;
    alarmed.alpha_sq = kInfinity;
    const double clean = expected_profit(p, alarmed, env, Strategy{2.0, 0.0, 0.0});
    CHECK(clean == (10.0 - 4.0) * 2.0 - 3.0 * 2.0);
}

TEST_CASE("analytic best response beats a fine strategy grid") {
    const EconomyParams p = base_params();
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int trial = 0; trial < 60; ++trial) {
        FirmBelief f;
        const double pick = u01(rng);
        if (pick < 0.1)
            f.alpha_sq = 0.0;
        else if (pick < 0.2)
            f.alpha_sq = kInfinity;
        else
            f.alpha_sq = std::exp(-2.0 + 4.0 * u01(rng));
        const Environment env{u01(rng) * p.A, u01(rng) * 6.0};

        const Strategy star = best_response(p, f, env);
        CHECK(star.q <= 0.5 * (p.A - p.c) + 1e-12);
        const double best = expected_profit(p, f, env, star);
        const auto grid = testsupport::grid_best_response(p, f, env, 200, 200);
        CHECK(best >= grid.profit - 1e-9);
    }
}
