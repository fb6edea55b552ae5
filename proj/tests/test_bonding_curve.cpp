#include "doctest.h"

#include <cmath>

#include "amm/bonding_curve.hpp"
#include "amm/error.hpp"
#include "oracles.hpp"

using namespace amm;
using namespace amm::bonding;

TEST_CASE("price along the curve") {
    const auto flat = BondingCurveState::create(100.0, 1000.0, 1.0);
    CHECK(bonding_price(flat) == doctest::Approx(0.1).epsilon(1e-15));
    auto after = bonding_buy(flat, 250.0).state;
    CHECK(bonding_price(after) == doctest::Approx(0.1).epsilon(1e-14));

    const auto half = BondingCurveState::create(100.0, 1000.0, 0.5);
    CHECK(bonding_price(half) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(bonding_reserve_at(half, 2000.0) == doctest::Approx(400.0).epsilon(1e-15));
    const auto doubled = bonding_buy(half, 300.0).state;
    CHECK(doubled.supply == doctest::Approx(2000.0).epsilon(1e-14));
    CHECK(bonding_price(doubled) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("buy examples") {
    const auto half = BondingCurveState::create(100.0, 1000.0, 0.5);
    CHECK(bonding_buy(half, 0.0).tokens == 0.0);
    const auto bought = bonding_buy(half, 300.0);
    CHECK(bought.tokens == doctest::Approx(1000.0).epsilon(1e-14));
    CHECK(bought.state.reserve == 400.0);
    const auto linear = BondingCurveState::create(100.0, 1000.0, 1.0);
    CHECK(bonding_buy(linear, 50.0).tokens == doctest::Approx(500.0).epsilon(1e-14));
    CHECK_THROWS_AS(bonding_buy(half, -1.0), Error);
}

TEST_CASE("sell examples") {
    const auto half = BondingCurveState::create(100.0, 1000.0, 0.5);
    const auto grown = bonding_buy(half, 300.0).state;
    CHECK(bonding_sell(grown, 0.0).currency == 0.0);
    const auto sold = bonding_sell(grown, 1000.0);
    CHECK(sold.currency == doctest::Approx(300.0).epsilon(1e-13));
    CHECK(sold.state.supply == doctest::Approx(1000.0).epsilon(1e-14));

    const auto linear = BondingCurveState::create(100.0, 1000.0, 1.0);
    CHECK(bonding_sell(linear, 250.0).currency == doctest::Approx(100.0 * 250.0 / 1000.0).epsilon(1e-15));
    try {
        bonding_sell(linear, 1000.0);
        FAIL("expected SupplyDepletion");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SupplyDepletion);
    }
}

TEST_CASE("buy then sell is an exact inverse") {
    for (double f : {0.1, 0.35, 0.5, 0.8, 1.0}) {
        const auto s0 = BondingCurveState::create(100.0, 1000.0, f);
        for (double t = 1e-6 * 100.0; t <= 100.0 * 100.0; t *= 3.7) {
            const auto bought = bonding_buy(s0, t);
            const auto sold = bonding_sell(bought.state, bought.tokens);
            CHECK(oracle::rel_diff(sold.currency, t) <= 1e-9);
            CHECK(oracle::rel_diff(sold.state.reserve, s0.reserve) <= 1e-9);
            CHECK(oracle::rel_diff(sold.state.supply, s0.supply) <= 1e-9);
        }
    }
}

TEST_CASE("reserve identities hold along a trade path") {
    oracle::Sampler rng(23);
    auto state = BondingCurveState::create(500.0, 2e4, 0.4);
    for (int k = 0; k < 200; ++k) {
        if (rng.uniform(0.0, 1.0) < 0.5) {
            state = bonding_buy(state, rng.log_uniform(1e-3, 2.0) * state.reserve).state;
        } else {
            state = bonding_sell(state, rng.uniform(0.0, 0.6) * state.supply).state;
        }
        CHECK(reserve_identity_deviation(state) <= 1e-9);
        CHECK(oracle::rel_diff(state.reserve, bonding_reserve_at(state, state.supply)) <= 1e-9);
    }
}

TEST_CASE("buy is increasing and concave in spend") {
    const auto s0 = BondingCurveState::create(100.0, 1000.0, 0.3);
    double prev_e = 0.0, prev_diff = 1e300;
    for (int k = 1; k <= 100; ++k) {
        const double e = bonding_buy(s0, 5.0 * k).tokens;
        CHECK(e > prev_e);
        CHECK(e - prev_e < prev_diff);
        prev_diff = e - prev_e;
        prev_e = e;
    }
}
