#pragma once

// Dodo proactive market making. Asset 1 ("token1") is the quote/numeraire
// side, asset 2 the base side. The oracle price P is token1 per token2 and the
// equilibrium targets (C1, C2) act as the pool's two invariants: swaps keep
// them, liquidity events rescale them.

namespace amm::pmm {

struct PMMParams {
    double amplification = 0.5;  // in (0, 1]
    double oracle_price = 1.0;   // token1 per token2
    double target1 = 0.0;        // C1
    double target2 = 0.0;        // C2

    void validate() const;
};

/// Price of token2 in token1:
///   r1 >= C1:  P [1 + A ((C2/r2)^2 - 1)]
///   r1 <= C1:  P / [1 + A ((C1/r1)^2 - 1)]
double pmm_spot_rate(double r1, double r2, const PMMParams& params);

/// token2 released for x1 of token1. Branches on the post-trade r1'.
double pmm_swap(double r1, double r2, const PMMParams& params, double x1);

/// token1 released for x2 of token2 (the mirrored curve, P -> 1/P).
double pmm_swap_reverse(double r1, double r2, const PMMParams& params, double x2);

/// (x1 / x2) / E - 1 with E the pre-trade pmm_spot_rate.
double pmm_slippage(double r1, double r2, const PMMParams& params, double x1);

/// r2 minus the curve's r2 at r1, in token2 units. Zero on the curve.
double pmm_curve_offset(double r1, double r2, const PMMParams& params);

}  // namespace amm::pmm
