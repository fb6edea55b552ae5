#include "doctest.h"

#include <cmath>
#include <vector>

#include "amm/error.hpp"
#include "amm/pool.hpp"
#include "amm/stableswap.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace amm;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an amm::Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("protocol spec validation") {
    CHECK_NOTHROW(ProtocolSpec::uniswap().validate(2));
    CHECK_THROWS_WITH(ProtocolSpec::weighted({0.6, 0.6}).validate(2), doctest::Contains("weights must sum to 1"));
    CHECK_THROWS_AS(ProtocolSpec::weighted({0.5, 0.5}).validate(3), Error);
    CHECK_THROWS_AS(ProtocolSpec::stableswap(0.0).validate(2), Error);
    CHECK_THROWS_AS(ProtocolSpec::pmm(1.5).validate(2), Error);
    CHECK_THROWS_AS(ProtocolSpec::pmm(0.5).validate(3), Error);
    CHECK(ProtocolSpec::uniswap().protocol_name() == "uniswap");
    CHECK(ProtocolSpec::weighted({0.2, 0.8}).protocol_name() == "balancer");
    CHECK(ProtocolSpec::stableswap(10.0).protocol_name() == "curve");
    CHECK(ProtocolSpec::pmm(0.5).protocol_name() == "dodo");
    CHECK(ProtocolSpec::weighted({0.2, 0.8}).hyperparameters() == "w=0.2:0.8");
    CHECK(ProtocolSpec::stableswap(10.0).hyperparameters() == "A=10");
}

TEST_CASE("make_pool") {
    CHECK(make_pool(ProtocolSpec::uniswap(), {100.0, 100.0}).invariant[0] == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(make_pool(ProtocolSpec::stableswap(10.0), {100.0, 100.0}).invariant[0] == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(code_of([] { make_pool(ProtocolSpec::uniswap(), {100.0, 0.0}); }) == ErrorCode::NonPositiveState);
    CHECK_THROWS_AS(make_pool(ProtocolSpec::pmm(0.5), {100.0, 100.0}), Error);
    CHECK_THROWS_AS(make_pool(ProtocolSpec::uniswap(), {100.0, 100.0}, 1.0), Error);
    // Explicit targets must put the reserves on the curve.
    CHECK_NOTHROW(make_pool(ProtocolSpec::pmm(0.5), {175.0, 50.0}, 1.0, std::array{100.0, 100.0}));
    CHECK_THROWS_AS(make_pool(ProtocolSpec::pmm(0.5), {170.0, 50.0}, 1.0, std::array{100.0, 100.0}), Error);
}

TEST_CASE("apply_swap examples") {
    const auto pool = make_pool(ProtocolSpec::uniswap(), {100.0, 100.0});
    const auto res = apply_swap(pool, 0, 1, 10.0);
    CHECK(res.outcome.x_out == doctest::Approx(oracle::kUniswapOut10).epsilon(1e-14));
    CHECK(res.state.reserves[0] == 110.0);
    CHECK(res.state.reserves[1] == doctest::Approx(100.0 - oracle::kUniswapOut10).epsilon(1e-14));
    CHECK(res.receipt.kind == TransitionKind::PureSwap);
    REQUIRE(res.receipt.checks.size() == 1);
    CHECK(res.receipt.checks[0].rule == "invariant_preserved");
    CHECK(res.receipt.passed());
    CHECK(*res.outcome.slippage == doctest::Approx(0.1).epsilon(1e-12));

    const auto zero = apply_swap(pool, 0, 1, 0.0);
    CHECK(zero.outcome.x_out == 0.0);
    CHECK(zero.state.reserves == pool.reserves);
    CHECK_FALSE(zero.outcome.slippage.has_value());

    for (double a : {1e-3, 1.0, 100.0, 1e6}) {
        const auto curve = make_pool(ProtocolSpec::stableswap(a), {100.0, 100.0});
        const auto post = apply_swap(curve, 0, 1, 10.0).state;
        CHECK(std::abs(stableswap::solve_invariant(post.reserves, a) - 200.0) <= 200.0 * 1e-9);
    }
}

TEST_CASE("apply_swap errors") {
    const auto pool = make_pool(ProtocolSpec::uniswap(), {100.0, 100.0});
    CHECK(code_of([&] { apply_swap(pool, 1, 1, 5.0); }) == ErrorCode::IdenticalAssets);
    CHECK(code_of([&] { apply_swap(pool, 0, 1, -100.0); }) == ErrorCode::ReserveDepletion);
    CHECK_THROWS_AS(apply_swap(pool, 0, 2, 5.0), Error);
}

TEST_CASE("add_liquidity_proportional examples") {
    const auto pool = make_pool(ProtocolSpec::uniswap(), {100.0, 100.0});
    const auto grown = add_liquidity_proportional(pool, 0.1);
    CHECK(grown.state.reserves[0] == doctest::Approx(110.0).epsilon(1e-15));
    CHECK(grown.state.reserves[1] == doctest::Approx(110.0).epsilon(1e-15));
    const double c = grown.state.invariant[0];
    CHECK(c * c == doctest::Approx(12100.0).epsilon(1e-14));
    CHECK(grown.state.shares == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(grown.receipt.kind == TransitionKind::PureLiquidityChange);
    CHECK(grown.receipt.checks.at(0).rule == "spot_rates_preserved");
    CHECK(grown.receipt.passed());

    const auto same = add_liquidity_proportional(pool, 0.0).state;
    CHECK(same.reserves == pool.reserves);
    CHECK(same.invariant == pool.invariant);

    const auto curve = make_pool(ProtocolSpec::stableswap(10.0), {100.0, 100.0});
    CHECK(add_liquidity_proportional(curve, 1.0).state.invariant[0] == doctest::Approx(400.0).epsilon(1e-14));

    CHECK(code_of([&] { add_liquidity_proportional(pool, -1.0); }) == ErrorCode::ReserveDepletion);
    CHECK(code_of([&] { add_liquidity_proportional(pool, -2.0); }) == ErrorCode::ReserveDepletion);
}

TEST_CASE("spot_rate examples") {
    const auto uni = make_pool(ProtocolSpec::uniswap(), {100.0, 100.0});
    CHECK(spot_rate(uni, 0, 1) == 1.0);
    CHECK(spot_rate(uni, 1, 1) == 1.0);
    const auto bal = make_pool(ProtocolSpec::weighted({0.2, 0.8}), {100.0, 100.0});
    CHECK(spot_rate(bal, 0, 1) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(spot_rate(bal, 0, 0) == 1.0);
    const auto dodo = make_pool(ProtocolSpec::pmm(0.5), {175.0, 50.0}, 1.0, std::array{100.0, 100.0});
    CHECK(spot_rate(dodo, 0, 1) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(spot_rate(dodo, 1, 0) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("pure swaps preserve the invariant") {
    oracle::Sampler rng(101);
    for (auto family : fixture::kFamilies) {
        for (int k = 0; k < 300; ++k) {
            const auto pool = fixture::random_pool(rng, family);
            const auto i = static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 1));
            auto o = static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 2));
            if (o >= i) ++o;
            const double x = rng.uniform(-0.3, 0.5) * pool.reserves[i];
            const auto res = apply_swap(pool, i, o, x);
            CHECK(res.receipt.passed());
            CHECK(invariant_deviation(pool, res.state.reserves) <= kRuleTolerance);
        }
    }
}

TEST_CASE("proportional liquidity changes preserve spot rates") {
    oracle::Sampler rng(102);
    for (auto family : fixture::kFamilies) {
        for (int k = 0; k < 300; ++k) {
            const auto pool = fixture::random_pool(rng, family);
            const auto res = add_liquidity_proportional(pool, rng.uniform(-0.9, 3.0));
            CHECK(res.receipt.passed());
            CHECK(max_spot_rate_deviation(pool, res.state) <= kRuleTolerance);
        }
    }
}

TEST_CASE("composability, reversibility and reciprocal rates") {
    oracle::Sampler rng(103);
    for (auto family : fixture::kFamilies) {
        for (int k = 0; k < 200; ++k) {
            const auto pool = fixture::random_pool(rng, family);
            const double r0 = pool.reserves[0];
            const double x = rng.uniform(0.0, 0.25) * r0, y = rng.uniform(0.0, 0.25) * r0;

            const auto first = apply_swap(pool, 0, 1, x);
            const auto second = apply_swap(first.state, 0, 1, y);
            const double combined = quote_swap(pool, 0, 1, x + y);
            CHECK(oracle::rel_diff(first.outcome.x_out + second.outcome.x_out, combined) <= 1e-9);

            const auto back = apply_swap(first.state, 1, 0, first.outcome.x_out);
            CHECK(oracle::rel_diff(back.outcome.x_out, x) <= 1e-9);
            for (std::size_t j = 0; j < pool.size(); ++j) {
                CHECK(oracle::rel_diff(back.state.reserves[j], pool.reserves[j]) <= 1e-9);
            }

            CHECK(std::abs(spot_rate(pool, 0, 1) * spot_rate(pool, 1, 0) - 1.0) <= 1e-9);
        }
    }
}
