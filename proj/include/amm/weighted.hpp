#pragma once

// Weighted-product pools (Balancer). Uniswap is the two-asset, equal-weight
// instance and Bancor's converter pricing uses the same formulas.

#include <cstddef>
#include <span>
#include <vector>

namespace amm::weighted {

/// Pool weights, fixed at construction. Each w_k in (0,1), sum w_k = 1.
class WeightedPoolParams {
public:
    explicit WeightedPoolParams(std::vector<double> weights);

    static WeightedPoolParams uniswap() { return WeightedPoolParams({0.5, 0.5}); }
    /// Bancor converters price with the weighted-product formulas.
    static WeightedPoolParams bancor(std::vector<double> reserve_weights) {
        return WeightedPoolParams(std::move(reserve_weights));
    }

    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t k) const { return weights_[k]; }

private:
    std::vector<double> weights_;
};

/// Validates a weight vector; throws amm::Error(InvalidArgument) naming the violation.
void validate_weights(std::span<const double> weights);

/// prod r_k^{w_k}
double weighted_conservation(std::span<const double> reserves, const WeightedPoolParams& params);

/// Price of asset o in asset i: (r_i w_o) / (r_o w_i).
double weighted_spot_rate(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i,
                          std::size_t o);

/// x_o = r_o (1 - (r_i / (r_i + x_i))^{w_i / w_o}). Negative x_i withdraws asset i.
double weighted_swap(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i,
                     std::size_t o, double x_i);

/// S = x_i / (r_i (w_o/w_i) [1 - (r_i/r_i')^{w_i/w_o}]) - 1
double weighted_slippage(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i,
                         std::size_t o, double x_i);

/// L = (1+rho)^{w_o} / (1 + w_o rho) - 1 for asset o appreciating by rho against asset 0.
double weighted_divergence_loss(const WeightedPoolParams& params, std::size_t o, double rho);

}  // namespace amm::weighted
