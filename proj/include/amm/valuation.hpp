#pragma once

namespace amm {

/// Pool value V, value of the same reserves held outside the pool after asset
/// o moves by rho, pool value V' after rebalancing, and L = V'/V_held - 1.
struct ValuationReport {
    double rho = 0.0;
    double value = 0.0;
    double value_held = 0.0;
    double value_after = 0.0;
    double loss = 0.0;

    static ValuationReport from_values(double rho, double value, double value_held,
                                       double value_after) {
        return {rho, value, value_held, value_after, value_after / value_held - 1.0};
    }
};

}  // namespace amm
