#include "amm/pool.hpp"

#include <algorithm>
#include <cmath>

#include "amm/error.hpp"
#include "amm/format.hpp"
#include "amm/stableswap.hpp"

namespace amm {

namespace {

void check_index(const PoolState& state, std::size_t k) {
    if (k >= state.size()) fail(ErrorCode::InvalidArgument, "asset index " + std::to_string(k) + " out of range");
}

std::vector<double> compute_invariant(const ProtocolSpec& spec, std::span<const double> reserves) {
    switch (spec.family) {
        case Family::WeightedProduct:
            return {weighted::weighted_conservation(reserves, weighted::WeightedPoolParams(spec.weights))};
        case Family::StableSwap:
            return {stableswap::solve_invariant(reserves, spec.amplification)};
        case Family::PMM:
            break;
    }
    fail(ErrorCode::InvalidArgument, "PMM targets cannot be derived from reserves alone");
}

RuleCheck make_check(std::string rule, double deviation) {
    RuleCheck check;
    check.rule = std::move(rule);
    check.deviation = deviation;
    check.passed = deviation <= kRuleTolerance;
    return check;
}

}  // namespace

std::string_view to_string(Family family) {
    switch (family) {
        case Family::WeightedProduct: return "weighted_product";
        case Family::StableSwap: return "stableswap";
        case Family::PMM: return "pmm";
    }
    return "unknown";
}

std::string_view to_string(TransitionKind kind) {
    return kind == TransitionKind::PureSwap ? "PureSwap" : "PureLiquidityChange";
}

ProtocolSpec ProtocolSpec::weighted(std::vector<double> weights) {
    ProtocolSpec spec;
    spec.family = Family::WeightedProduct;
    spec.weights = std::move(weights);
    return spec;
}

ProtocolSpec ProtocolSpec::stableswap(double amplification) {
    ProtocolSpec spec;
    spec.family = Family::StableSwap;
    spec.amplification = amplification;
    return spec;
}

ProtocolSpec ProtocolSpec::pmm(double amplification) {
    ProtocolSpec spec;
    spec.family = Family::PMM;
    spec.amplification = amplification;
    return spec;
}

void ProtocolSpec::validate(std::size_t asset_count) const {
    if (asset_count < 2) fail(ErrorCode::InvalidArgument, "a pool needs at least two assets");
    switch (family) {
        case Family::WeightedProduct:
            if (weights.size() != asset_count) fail(ErrorCode::InvalidArgument, "need one weight per asset");
            weighted::validate_weights(weights);
            break;
        case Family::StableSwap:
            if (!(amplification > 0.0) || !std::isfinite(amplification)) {
                fail(ErrorCode::InvalidArgument, "stableswap amplification must be finite and positive");
            }
            break;
        case Family::PMM:
            if (asset_count != 2) fail(ErrorCode::InvalidArgument, "PMM pools hold exactly two assets");
            if (!(amplification > 0.0 && amplification <= 1.0)) {
                fail(ErrorCode::InvalidArgument, "PMM amplification must lie in (0,1]");
            }
            break;
    }
}

std::string ProtocolSpec::protocol_name() const {
    switch (family) {
        case Family::WeightedProduct:
            return (weights.size() == 2 && weights[0] == 0.5 && weights[1] == 0.5) ? "uniswap" : "balancer";
        case Family::StableSwap: return "curve";
        case Family::PMM: return "dodo";
    }
    return "unknown";
}

std::string ProtocolSpec::hyperparameters() const {
    std::string out;
    if (family == Family::WeightedProduct) {
        out = "w=";
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (k) out += ':';
            out += format_shortest(weights[k]);
        }
    } else {
        out = "A=" + format_shortest(amplification);
    }
    return out;
}

PoolState make_pool(ProtocolSpec spec, std::vector<double> reserves, std::optional<double> oracle_price,
                    std::optional<std::array<double, 2>> pmm_targets) {
    spec.validate(reserves.size());
    for (double r : reserves) {
        if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::NonPositiveState, "reserves must be positive");
    }
    PoolState state;
    state.spec = std::move(spec);
    state.reserves = std::move(reserves);
    if (state.spec.family == Family::PMM) {
        if (!oracle_price) fail(ErrorCode::InvalidArgument, "PMM pools need an oracle price");
        state.oracle_price = oracle_price;
        if (pmm_targets) {
            state.invariant = {(*pmm_targets)[0], (*pmm_targets)[1]};
        } else {
            state.invariant = state.reserves;
        }
    } else {
        if (oracle_price) fail(ErrorCode::InvalidArgument, "only PMM pools take an oracle price");
        state.invariant = compute_invariant(state.spec, state.reserves);
    }
    validate_state(state);
    return state;
}

void validate_state(const PoolState& state) {
    state.spec.validate(state.size());
    for (double r : state.reserves) {
        if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::NonPositiveState, "reserves must be positive");
    }
    const std::size_t expected = state.spec.family == Family::PMM ? 2 : 1;
    if (state.invariant.size() != expected) fail(ErrorCode::InvalidArgument, "wrong number of invariant values");
    if (state.spec.family == Family::PMM) pmm_params(state).validate();
    const double dev = invariant_deviation(state, state.reserves);
    if (!(dev <= kRuleTolerance)) {
        fail(ErrorCode::InvalidArgument, "invariant is inconsistent with reserves (relative deviation " + format_shortest(dev) + ")");
    }
}

double invariant_deviation(const PoolState& state, std::span<const double> reserves) {
    switch (state.spec.family) {
        case Family::WeightedProduct: {
            const double c = weighted::weighted_conservation(reserves, weighted_params(state));
            return std::abs(c - state.invariant[0]) / state.invariant[0];
        }
        case Family::StableSwap: {
            const double d = stableswap::solve_invariant(reserves, state.spec.amplification);
            return std::abs(d - state.invariant[0]) / state.invariant[0];
        }
        case Family::PMM: {
            const auto params = pmm_params(state);
            return std::abs(pmm::pmm_curve_offset(reserves[0], reserves[1], params)) / std::max(reserves[1], params.target2);
        }
    }
    return 0.0;
}

weighted::WeightedPoolParams weighted_params(const PoolState& state) {
    if (state.spec.family != Family::WeightedProduct) fail(ErrorCode::NotApplicable, "not a weighted-product pool");
    return weighted::WeightedPoolParams(state.spec.weights);
}

pmm::PMMParams pmm_params(const PoolState& state) {
    if (state.spec.family != Family::PMM) fail(ErrorCode::NotApplicable, "not a PMM pool");
    pmm::PMMParams params;
    params.amplification = state.spec.amplification;
    params.oracle_price = state.oracle_price.value_or(0.0);
    params.target1 = state.invariant.at(0);
    params.target2 = state.invariant.at(1);
    return params;
}

double spot_rate(const PoolState& state, std::size_t i, std::size_t o) {
    check_index(state, i);
    check_index(state, o);
    if (i == o) return 1.0;
    switch (state.spec.family) {
        case Family::WeightedProduct:
            return weighted::weighted_spot_rate(state.reserves, weighted_params(state), i, o);
        case Family::StableSwap:
            return stableswap::stableswap_spot_rate(state.reserves, state.invariant[0], state.spec.amplification, i, o);
        case Family::PMM: {
            const double e = pmm::pmm_spot_rate(state.reserves[0], state.reserves[1], pmm_params(state));
            return i == 0 ? e : 1.0 / e;
        }
    }
    return 0.0;
}

double quote_swap(const PoolState& state, std::size_t i, std::size_t o, double x_in) {
    check_index(state, i);
    check_index(state, o);
    if (i == o) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
    switch (state.spec.family) {
        case Family::WeightedProduct:
            return weighted::weighted_swap(state.reserves, weighted_params(state), i, o, x_in);
        case Family::StableSwap:
            return stableswap::stableswap_swap(state.reserves, state.invariant[0], state.spec.amplification, i, o, x_in);
        case Family::PMM: {
            const auto params = pmm_params(state);
            return i == 0 ? pmm::pmm_swap(state.reserves[0], state.reserves[1], params, x_in)
                          : pmm::pmm_swap_reverse(state.reserves[0], state.reserves[1], params, x_in);
        }
    }
    return 0.0;
}

double slippage(const PoolState& state, std::size_t i, std::size_t o, double x_in) {
    check_index(state, i);
    check_index(state, o);
    if (i == o) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
    switch (state.spec.family) {
        case Family::WeightedProduct:
            return weighted::weighted_slippage(state.reserves, weighted_params(state), i, o, x_in);
        case Family::StableSwap:
            return stableswap::stableswap_slippage(state.reserves, state.invariant[0], state.spec.amplification, i, o, x_in);
        case Family::PMM:
            if (i == 0) return pmm::pmm_slippage(state.reserves[0], state.reserves[1], pmm_params(state), x_in);
            break;
    }
    if (x_in == 0.0) fail(ErrorCode::InfeasibleTrade, "slippage is undefined for a zero trade");
    const double x_out = quote_swap(state, i, o, x_in);
    if (x_out == 0.0) fail(ErrorCode::InfeasibleTrade, "trade releases nothing");
    return (x_in / x_out) / spot_rate(state, i, o) - 1.0;
}

numerics::ImplicitConservation implicit_conservation(const PoolState& state) {
    switch (state.spec.family) {
        case Family::WeightedProduct: return numerics::weighted_product_z(state.spec.weights);
        case Family::StableSwap: return numerics::stableswap_z(state.spec.amplification, state.size());
        case Family::PMM: return numerics::pmm_z(state.spec.amplification, state.oracle_price.value_or(0.0));
    }
    fail(ErrorCode::InvalidArgument, "unknown family");
}

bool TransitionReceipt::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const RuleCheck& c) { return c.passed; });
}

SwapResult apply_swap(const PoolState& state, std::size_t input_asset, std::size_t output_asset, double x_in) {
    check_index(state, input_asset);
    check_index(state, output_asset);
    if (input_asset == output_asset) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
    if (!std::isfinite(x_in)) fail(ErrorCode::InvalidArgument, "trade size must be finite");
    if (!(state.reserves[input_asset] + x_in > 0.0)) {
        fail(ErrorCode::ReserveDepletion, "input reserve would become non-positive");
    }

    SwapOutcome outcome;
    outcome.input_asset = input_asset;
    outcome.output_asset = output_asset;
    outcome.x_in = x_in;
    outcome.spot_rate_before = spot_rate(state, input_asset, output_asset);

    PoolState post = state;
    if (x_in != 0.0) {
        outcome.x_out = quote_swap(state, input_asset, output_asset, x_in);
        post.reserves[input_asset] += x_in;
        post.reserves[output_asset] -= outcome.x_out;
        if (!(post.reserves[output_asset] > 0.0)) fail(ErrorCode::ReserveDepletion, "output reserve would become non-positive");
        if (outcome.x_out != 0.0) {
            outcome.effective_rate = x_in / outcome.x_out;
            outcome.slippage = *outcome.effective_rate / outcome.spot_rate_before - 1.0;
        }
    }
    outcome.post_reserves = post.reserves;
    outcome.spot_rate_after = spot_rate(post, input_asset, output_asset);

    TransitionReceipt receipt;
    receipt.kind = TransitionKind::PureSwap;
    receipt.pre_state = state;
    receipt.post_state = post;
    receipt.checks.push_back(make_check("invariant_preserved", invariant_deviation(state, post.reserves)));
    return {std::move(post), std::move(outcome), std::move(receipt)};
}

double max_spot_rate_deviation(const PoolState& before, const PoolState& after) {
    double worst = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        for (std::size_t o = 0; o < before.size(); ++o) {
            if (i == o) continue;
            const double e0 = spot_rate(before, i, o);
            const double e1 = spot_rate(after, i, o);
            worst = std::max(worst, std::abs(e1 / e0 - 1.0));
        }
    }
    return worst;
}

LiquidityResult add_liquidity_proportional(const PoolState& state, double fraction) {
    if (!std::isfinite(fraction)) fail(ErrorCode::InvalidArgument, "fraction must be finite");
    if (!(fraction > -1.0)) fail(ErrorCode::ReserveDepletion, "withdrawal would empty the pool");
    const double scale = 1.0 + fraction;

    PoolState post = state;
    for (double& r : post.reserves) r *= scale;
    post.shares *= scale;
    if (post.spec.family == Family::PMM) {
        // Targets move with the reserves so the pool stays on the same
        // (scaled) curve; at equilibrium this resets them to the new reserves.
        for (double& c : post.invariant) c *= scale;
    } else if (fraction != 0.0) {
        post.invariant = compute_invariant(post.spec, post.reserves);
    }

    TransitionReceipt receipt;
    receipt.kind = TransitionKind::PureLiquidityChange;
    receipt.pre_state = state;
    receipt.post_state = post;
    receipt.checks.push_back(make_check("spot_rates_preserved", max_spot_rate_deviation(state, post)));
    return {std::move(post), std::move(receipt)};
}

}  // namespace amm
