#pragma once

// Pool state and the two canonical transitions. A pure swap must leave the
// invariant(s) unchanged; a pure (proportional) liquidity change must leave
// every spot rate unchanged. Each transition returns a receipt with the
// measured deviation for the rule it is subject to.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amm/numerics.hpp"
#include "amm/pmm.hpp"
#include "amm/weighted.hpp"

namespace amm {

enum class Family { WeightedProduct, StableSwap, PMM };

std::string_view to_string(Family family);

/// Conservation-function family plus its fixed hyperparameters.
struct ProtocolSpec {
    Family family = Family::WeightedProduct;
    std::vector<double> weights;  // WeightedProduct
    double amplification = 0.0;   // StableSwap, PMM

    static ProtocolSpec weighted(std::vector<double> weights);
    static ProtocolSpec uniswap() { return weighted({0.5, 0.5}); }
    /// Bancor converters share the weighted-product formulas.
    static ProtocolSpec bancor(std::vector<double> weights) { return weighted(std::move(weights)); }
    static ProtocolSpec stableswap(double amplification);
    static ProtocolSpec pmm(double amplification);

    /// Throws InvalidArgument describing the first violated constraint.
    void validate(std::size_t asset_count) const;
    /// Short human-readable label, e.g. "balancer" or "uniswap".
    std::string protocol_name() const;
    /// Hyperparameters as "key=value" pairs joined with ';'.
    std::string hyperparameters() const;
};

inline constexpr double kRuleTolerance = 1e-9;

struct PoolState {
    std::vector<double> reserves;
    ProtocolSpec spec;
    /// One value (weighted product: prod r^w, stableswap: D) or, for PMM, (C1, C2).
    std::vector<double> invariant;
    std::optional<double> oracle_price;  // PMM only
    double shares = 1.0;                 // pool-share supply

    std::size_t size() const { return reserves.size(); }
};

/// Builds a consistent state. PMM pools start at equilibrium unless explicit
/// targets are given, in which case the reserves must lie on their curve.
PoolState make_pool(ProtocolSpec spec, std::vector<double> reserves, std::optional<double> oracle_price = {},
                    std::optional<std::array<double, 2>> pmm_targets = {});

/// Checks every PoolState invariant, including that the stored invariant
/// values reproduce from the reserves within kRuleTolerance.
void validate_state(const PoolState& state);

/// Relative deviation of the conservation function at `reserves` from the
/// state's stored invariant. Zero means `reserves` lie on the state's curve.
double invariant_deviation(const PoolState& state, std::span<const double> reserves);

weighted::WeightedPoolParams weighted_params(const PoolState& state);
pmm::PMMParams pmm_params(const PoolState& state);

/// Price of asset o in units of asset i. Exactly 1 when i == o.
double spot_rate(const PoolState& state, std::size_t i, std::size_t o);
/// Output quantity for x_in of asset i without changing the state.
double quote_swap(const PoolState& state, std::size_t i, std::size_t o, double x_in);
double slippage(const PoolState& state, std::size_t i, std::size_t o, double x_in);

/// Z for the state's family, for use with the numerics module.
numerics::ImplicitConservation implicit_conservation(const PoolState& state);

struct SwapOutcome {
    std::size_t input_asset = 0;
    std::size_t output_asset = 0;
    double x_in = 0.0;
    double x_out = 0.0;
    std::vector<double> post_reserves;
    double spot_rate_before = 0.0;
    double spot_rate_after = 0.0;
    std::optional<double> effective_rate;  // x_in / x_out
    std::optional<double> slippage;
};

enum class TransitionKind { PureSwap, PureLiquidityChange };

std::string_view to_string(TransitionKind kind);

struct RuleCheck {
    std::string rule;
    bool passed = false;
    double deviation = 0.0;
    double tolerance = kRuleTolerance;
};

struct TransitionReceipt {
    TransitionKind kind = TransitionKind::PureSwap;
    PoolState pre_state;
    PoolState post_state;
    std::vector<RuleCheck> checks;

    bool passed() const;
};

struct SwapResult {
    PoolState state;
    SwapOutcome outcome;
    TransitionReceipt receipt;
};

/// Moves x_in of asset i into the pool (out of it when negative) and releases
/// asset o along the conservation curve.
SwapResult apply_swap(const PoolState& state, std::size_t input_asset, std::size_t output_asset, double x_in);

struct LiquidityResult {
    PoolState state;
    TransitionReceipt receipt;
};

/// Scales every reserve and the share supply by (1 + fraction). Negative
/// fractions withdraw.
LiquidityResult add_liquidity_proportional(const PoolState& state, double fraction);

/// Largest relative change of spot_rate(i, o) over ordered pairs i != o.
double max_spot_rate_deviation(const PoolState& before, const PoolState& after);

}  // namespace amm
