#pragma once

// Curve-style stableswap: the invariant D interpolates between constant sum
// (sum r_k = D) and constant product (prod r_k = (D/n)^n) through
//
//     A (sum r_k / D - 1) = (D/n)^n / prod r_k - 1.
//
// A here already includes the n^n factor of Curve's own A.

#include <cstddef>
#include <span>

namespace amm::stableswap {

class StableSwapParams {
public:
    explicit StableSwapParams(double amplification);
    double amplification() const { return amplification_; }

private:
    double amplification_;
};

struct InvariantSolve {
    double d = 0.0;
    int iterations = 0;
    int bisections = 0;
};

/// Unique positive D for the reserves. Newton from D = sum r_k, safeguarded by
/// bisection on [n * geometric_mean(r), sum r].
InvariantSolve solve_invariant_detailed(std::span<const double> reserves, double amplification);
double solve_invariant(std::span<const double> reserves, double amplification);

/// |lhs - rhs| of the defining equation, divided by the magnitude of its terms.
double invariant_residual(std::span<const double> reserves, double d, double amplification);

/// Price of asset o in asset i.
double stableswap_spot_rate(std::span<const double> reserves, double d, double amplification, std::size_t i,
                            std::size_t o);

/// Output released for x_i of asset i; other reserves fixed. r_o' is the
/// positive root of A r^2 + (A (S' - D) + D) r - D (D/n)^n / P' = 0 where S'
/// and P' are the sum and product of the post-trade reserves excluding o.
double stableswap_swap(std::span<const double> reserves, double d, double amplification, std::size_t i,
                       std::size_t o, double x_i);

double stableswap_slippage(std::span<const double> reserves, double d, double amplification, std::size_t i,
                           std::size_t o, double x_i);

}  // namespace amm::stableswap
