#include "amm/stableswap.hpp"

#include <algorithm>
#include <cmath>

#include "amm/error.hpp"

namespace amm::stableswap {

namespace {

constexpr int kMaxIterations = 256;
constexpr double kRelTol = 1e-14;
constexpr double kResidualTol = 1e-12;

void check_reserves(std::span<const double> reserves) {
    if (reserves.size() < 2) fail(ErrorCode::InvalidArgument, "a pool needs at least two assets");
    for (double r : reserves) {
        if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::NonPositiveState, "reserves must be positive");
    }
}

void check_amplification(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorCode::InvalidArgument, "amplification must be finite and positive");
}

void check_pair(std::span<const double> reserves, std::size_t i, std::size_t o) {
    if (i >= reserves.size() || o >= reserves.size()) fail(ErrorCode::InvalidArgument, "asset index out of range");
    if (i == o) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
}

// (D/n)^n / prod r_k, skipping index `skip` (use reserves.size() to skip none).
double power_ratio(std::span<const double> reserves, double d, std::size_t skip) {
    const double n = static_cast<double>(reserves.size());
    double ratio = 1.0;
    for (std::size_t k = 0; k < reserves.size(); ++k) {
        if (k != skip) ratio *= d / (n * reserves[k]);
    }
    return ratio;
}

double sum_of(std::span<const double> reserves) {
    double s = 0.0;
    for (double r : reserves) s += r;
    return s;
}

}  // namespace

StableSwapParams::StableSwapParams(double amplification) : amplification_(amplification) {
    check_amplification(amplification);
}

double invariant_residual(std::span<const double> reserves, double d, double amplification) {
    const double sum = sum_of(reserves);
    const double ratio = power_ratio(reserves, d, reserves.size());
    const double lhs = amplification * (sum / d - 1.0);
    const double rhs = ratio - 1.0;
    const double scale = amplification * (sum / d + 1.0) + ratio + 1.0;
    return std::abs(lhs - rhs) / scale;
}

InvariantSolve solve_invariant_detailed(std::span<const double> reserves, double amplification) {
    check_reserves(reserves);
    check_amplification(amplification);
    const double n = static_cast<double>(reserves.size());
    const double sum = sum_of(reserves);
    double log_mean = 0.0;
    for (double r : reserves) log_mean += std::log(r);
    log_mean /= n;

    // f is strictly decreasing in D, non-negative at n * geometric mean and
    // non-positive at the arithmetic sum.
    auto f = [&](double d) { return amplification * (sum / d - 1.0) + 1.0 - power_ratio(reserves, d, reserves.size()); };
    auto df = [&](double d) {
        return -amplification * sum / (d * d) - n * power_ratio(reserves, d, reserves.size()) / d;
    };

    double hi = sum;
    double lo = std::min(n * std::exp(log_mean), hi);
    InvariantSolve out;
    double d = sum;
    double fd = f(d);
    if (fd == 0.0 || lo == hi) {
        out.d = d;
        return out;
    }
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        out.iterations = iter;
        if (fd > 0.0) lo = d; else hi = d;
        double next = d - fd / df(d);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
            ++out.bisections;
        }
        const bool small_step = std::abs(next - d) <= kRelTol * next;
        d = next;
        fd = f(d);
        if (fd == 0.0 || small_step || hi - lo <= kRelTol * hi) {
            if (invariant_residual(reserves, d, amplification) > kResidualTol) {
                fail(ErrorCode::ConvergenceFailure, "stableswap invariant residual above tolerance");
            }
            out.d = d;
            return out;
        }
    }
    fail(ErrorCode::ConvergenceFailure, "stableswap invariant did not converge");
}

double solve_invariant(std::span<const double> reserves, double amplification) {
    return solve_invariant_detailed(reserves, amplification).d;
}

double stableswap_spot_rate(std::span<const double> reserves, double d, double amplification, std::size_t i,
                            std::size_t o) {
    check_reserves(reserves);
    if (i >= reserves.size() || o >= reserves.size()) fail(ErrorCode::InvalidArgument, "asset index out of range");
    if (i == o) return 1.0;
    // r_i (A r_o P + D (D/n)^n) / (r_o (A r_i P + D (D/n)^n)), divided through by P.
    const double d_ratio = d * power_ratio(reserves, d, reserves.size());
    return reserves[i] * (amplification * reserves[o] + d_ratio) / (reserves[o] * (amplification * reserves[i] + d_ratio));
}

double stableswap_swap(std::span<const double> reserves, double d, double amplification, std::size_t i,
                       std::size_t o, double x_i) {
    check_reserves(reserves);
    check_amplification(amplification);
    check_pair(reserves, i, o);
    if (x_i == 0.0) return 0.0;
    if (!(reserves[i] + x_i > 0.0)) fail(ErrorCode::ReserveDepletion, "input reserve would become non-positive");

    const double n = static_cast<double>(reserves.size());
    double sum_rest = 0.0;
    double c = d * d / n;  // D (D/n)^n / P', built factor by factor
    for (std::size_t k = 0; k < reserves.size(); ++k) {
        if (k == o) continue;
        const double r = (k == i) ? reserves[i] + x_i : reserves[k];
        sum_rest += r;
        c *= d / (n * r);
    }
    const double b = amplification * (sum_rest - d) + d;
    const double disc = b * b + 4.0 * amplification * c;
    if (!(disc >= 0.0) || !std::isfinite(disc)) fail(ErrorCode::NoSolution, "stableswap quadratic has no real root");
    const double root = std::sqrt(disc);
    // Pick the cancellation-free form of the positive root.
    const double r_o_new = b > 0.0 ? 2.0 * c / (b + root) : (root - b) / (2.0 * amplification);
    if (!(r_o_new > 0.0) || !std::isfinite(r_o_new)) fail(ErrorCode::NoSolution, "stableswap quadratic has no positive root");
    return reserves[o] - r_o_new;
}

double stableswap_slippage(std::span<const double> reserves, double d, double amplification, std::size_t i,
                           std::size_t o, double x_i) {
    if (x_i == 0.0) fail(ErrorCode::InfeasibleTrade, "slippage is undefined for a zero trade");
    const double x_o = stableswap_swap(reserves, d, amplification, i, o, x_i);
    if (x_o == 0.0) fail(ErrorCode::InfeasibleTrade, "trade releases nothing");
    return (x_i / x_o) / stableswap_spot_rate(reserves, d, amplification, i, o) - 1.0;
}

}  // namespace amm::stableswap
