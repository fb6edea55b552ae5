#include "amm/pmm.hpp"

#include <cmath>

#include "amm/error.hpp"

namespace amm::pmm {

namespace {

void check_reserves(double r1, double r2) {
    if (!(r1 > 0.0) || !(r2 > 0.0)) fail(ErrorCode::NonPositiveState, "reserves must be positive");
}

// Price of the out-asset in in-asset units; `price` is the oracle rate in the
// same orientation.
double rate(double r_in, double r_out, double c_in, double c_out, double price, double a) {
    if (r_in >= c_in) {
        const double q = c_out / r_out;
        return price * (1.0 + a * (q * q - 1.0));
    }
    const double q = c_in / r_in;
    return price / (1.0 + a * (q * q - 1.0));
}

// Post-trade reserve of the out-asset once the in-asset reserve reached r_in_new.
double out_reserve(double r_in_new, double c_in, double c_out, double price, double a) {
    if (r_in_new >= c_in) {
        // price (1-A) y^2 + [r_in' - C_in - price (1-2A) C_out] y - price A C_out^2 = 0.
        // At A = 1 the leading coefficient vanishes and the b > 0 form below is
        // exactly the linear limit y = price C_out^2 / (r_in' - C_in + price C_out).
        const double qa = price * (1.0 - a);
        const double qb = r_in_new - c_in - price * (1.0 - 2.0 * a) * c_out;
        const double qc = price * a * c_out * c_out;
        const double root = std::sqrt(qb * qb + 4.0 * qa * qc);
        if (qb > 0.0) return 2.0 * qc / (qb + root);
        if (qa == 0.0) fail(ErrorCode::NoSolution, "degenerate PMM quadratic");
        return (root - qb) / (2.0 * qa);
    }
    return c_out + (c_in - r_in_new) * (1.0 + a * (c_in / r_in_new - 1.0)) / price;
}

double swap_generic(double r_in, double r_out, double c_in, double c_out, double price, double a, double x_in) {
    if (x_in == 0.0) return 0.0;
    const double r_in_new = r_in + x_in;
    if (!(r_in_new > 0.0)) fail(ErrorCode::ReserveDepletion, "input reserve would become non-positive");
    const double r_out_new = out_reserve(r_in_new, c_in, c_out, price, a);
    if (!(r_out_new > 0.0) || !std::isfinite(r_out_new)) fail(ErrorCode::ReserveDepletion, "output reserve would become non-positive");
    // The endpoint must sit in the region of the branch that produced it.
    const double slack = 1e-12 * c_out;
    const bool in_above = r_in_new >= c_in;
    if (in_above ? r_out_new > c_out + slack : r_out_new < c_out - slack) {
        fail(ErrorCode::ConvergenceFailure, "PMM swap endpoint landed on the wrong branch");
    }
    return r_out - r_out_new;
}

}  // namespace

void PMMParams::validate() const {
    if (!(amplification > 0.0 && amplification <= 1.0)) fail(ErrorCode::InvalidArgument, "PMM amplification must lie in (0,1]");
    if (!(oracle_price > 0.0) || !std::isfinite(oracle_price)) fail(ErrorCode::InvalidArgument, "oracle price must be positive");
    if (!(target1 > 0.0) || !(target2 > 0.0)) fail(ErrorCode::InvalidArgument, "PMM targets must be positive");
}

double pmm_spot_rate(double r1, double r2, const PMMParams& params) {
    check_reserves(r1, r2);
    return rate(r1, r2, params.target1, params.target2, params.oracle_price, params.amplification);
}

double pmm_swap(double r1, double r2, const PMMParams& params, double x1) {
    check_reserves(r1, r2);
    return swap_generic(r1, r2, params.target1, params.target2, params.oracle_price, params.amplification, x1);
}

double pmm_swap_reverse(double r1, double r2, const PMMParams& params, double x2) {
    check_reserves(r1, r2);
    return swap_generic(r2, r1, params.target2, params.target1, 1.0 / params.oracle_price, params.amplification, x2);
}

double pmm_slippage(double r1, double r2, const PMMParams& params, double x1) {
    if (x1 == 0.0) fail(ErrorCode::InfeasibleTrade, "slippage is undefined for a zero trade");
    const double x2 = pmm_swap(r1, r2, params, x1);
    if (x2 == 0.0) fail(ErrorCode::InfeasibleTrade, "trade releases nothing");
    return (x1 / x2) / pmm_spot_rate(r1, r2, params) - 1.0;
}

double pmm_curve_offset(double r1, double r2, const PMMParams& params) {
    check_reserves(r1, r2);
    return r2 - out_reserve(r1, params.target1, params.target2, params.oracle_price, params.amplification);
}

}  // namespace amm::pmm
