#pragma once

// Protocol-agnostic numeric engine: implicit conservation functions, finite
// difference spot rates, implicit swap solving and the rebalancing system used
// for divergence loss. Nothing here calls the closed-form protocol modules, so
// it serves as the reference those modules are checked against.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amm/valuation.hpp"

namespace amm::numerics {

/// Every tolerance used by the solvers in this module.
struct SolverConfig {
    double root_rel_tol = 1e-15;
    int root_max_iterations = 256;

    double fd_rel_step = 1e-6;
    double fd_min_step = 1e-9;
    double degenerate_gradient = 1e-12;

    double swap_bracket_lo = 1e-12;  // times r_o
    double swap_bracket_hi = 1e3;    // times r_o

    int rebalance_max_iterations = 200;
    double rebalance_rate_tol = 1e-9;     // |log rate ratio - log(1+rho)|
    double rebalance_residual_tol = 1e-11;  // |Z| / first-order scale of Z
    double rebalance_jacobian_step = 1e-5;  // in log-reserve coordinates
    double rebalance_max_log_shift = 40.0;  // |log(r'_k / r_k)| beyond this is unattainable
    double rebalance_max_step = 2.0;        // largest Newton step, log coordinates
};

const SolverConfig& default_config();

using ScalarFn = std::function<double(double)>;

/// Interval [lo, hi] over which f changes sign. Checked when built.
class RootBracket {
public:
    static RootBracket make(const ScalarFn& f, double lo, double hi);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double f_lo() const { return f_lo_; }
    double f_hi() const { return f_hi_; }

private:
    RootBracket(double lo, double hi, double f_lo, double f_hi)
        : lo_(lo), hi_(hi), f_lo_(f_lo), f_hi_(f_hi) {}

    double lo_;
    double hi_;
    double f_lo_;
    double f_hi_;
};

/// Safeguarded Newton iteration. Uses `derivative` when given and a secant
/// slope otherwise; any step leaving the current bracket is replaced by
/// bisection. Throws ConvergenceFailure after `max_iterations`.
double find_root(const ScalarFn& f, const RootBracket& bracket, double rel_tol = 1e-15,
                 const ScalarFn& derivative = nullptr, int max_iterations = 256);

/// Z(reserves; invariant), zero on the conservation curve.
struct ImplicitConservation {
    using Fn = std::function<double(std::span<const double> reserves,
                                    std::span<const double> invariant)>;
    Fn evaluate;
    std::size_t n = 0;
    std::string name;

    double operator()(std::span<const double> reserves, std::span<const double> invariant) const {
        return evaluate(reserves, invariant);
    }
};

// Conservation functions written directly from their defining equations.
// invariant layout: weighted/constant-product/stableswap take one value,
// PMM takes (C1, C2).

/// r_1 * r_2 - C.
ImplicitConservation constant_product_z();
/// prod r_k^{w_k} - C.
ImplicitConservation weighted_product_z(std::vector<double> weights);
/// (D/n)^n / prod r_k - 1 - A (sum r_k / D - 1).
ImplicitConservation stableswap_z(double amplification, std::size_t n);
/// Dodo PMM curve obtained by integrating the oracle-anchored exchange rate.
/// Both branches are folded into one C^1 separable function G1(r1) - G2(r2).
ImplicitConservation pmm_z(double amplification, double oracle_price);

/// Central-difference gradient of Z, step max(fd_rel_step * r_k, fd_min_step).
std::vector<double> numeric_gradient(const ImplicitConservation& z, std::span<const double> reserves,
                                     std::span<const double> invariant,
                                     const SolverConfig& cfg = default_config());

/// Price of asset o in units of asset i: (dZ/dr_o) / (dZ/dr_i).
double numeric_spot_rate(const ImplicitConservation& z, std::span<const double> reserves,
                         std::span<const double> invariant, std::size_t i, std::size_t o,
                         const SolverConfig& cfg = default_config());

/// Amount of asset o released when x_i of asset i enters the pool, found by
/// solving Z = 0 for r_o' with every other reserve fixed.
double implicit_swap(const ImplicitConservation& z, std::span<const double> reserves,
                     std::span<const double> invariant, std::size_t i, std::size_t o, double x_i,
                     const SolverConfig& cfg = default_config());

/// Reserves after arbitrage has moved the price of asset o against every other
/// asset by a factor (1 + rho) while staying on the curve. Damped Newton on the
/// n x n system in log-reserve coordinates with a finite-difference Jacobian.
std::vector<double> solve_rebalance(const ImplicitConservation& z, std::span<const double> reserves,
                                    std::span<const double> invariant, std::size_t o, double rho,
                                    const SolverConfig& cfg = default_config());

/// Pool value before and after the price shift, in units of asset 0.
ValuationReport generic_divergence_loss(const ImplicitConservation& z,
                                        std::span<const double> reserves,
                                        std::span<const double> invariant, std::size_t o,
                                        double rho, const SolverConfig& cfg = default_config());

}  // namespace amm::numerics
