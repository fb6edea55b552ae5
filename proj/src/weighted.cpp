#include "amm/weighted.hpp"

#include <cmath>
#include <numeric>

#include "amm/error.hpp"

namespace amm::weighted {

namespace {

void check_pair(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i, std::size_t o) {
    if (reserves.size() != params.size()) fail(ErrorCode::InvalidArgument, "reserve count does not match weights");
    if (i >= reserves.size() || o >= reserves.size()) fail(ErrorCode::InvalidArgument, "asset index out of range");
    if (i == o) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
    if (!(reserves[i] > 0.0) || !(reserves[o] > 0.0)) fail(ErrorCode::NonPositiveState, "reserves must be positive");
}

// 1 - (r / (r + x))^{exponent}, accurate for small x.
double released_fraction(double r, double x, double exponent) {
    return -std::expm1(-exponent * std::log1p(x / r));
}

}  // namespace

void validate_weights(std::span<const double> weights) {
    if (weights.size() < 2) fail(ErrorCode::InvalidArgument, "a pool needs at least two assets");
    for (double w : weights) {
        if (!(w > 0.0 && w < 1.0)) fail(ErrorCode::InvalidArgument, "each weight must lie in (0,1)");
    }
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "weights must sum to 1");
}

WeightedPoolParams::WeightedPoolParams(std::vector<double> weights) : weights_(std::move(weights)) {
    validate_weights(weights_);
}

double weighted_conservation(std::span<const double> reserves, const WeightedPoolParams& params) {
    if (reserves.size() != params.size()) fail(ErrorCode::InvalidArgument, "reserve count does not match weights");
    double log_c = 0.0;
    for (std::size_t k = 0; k < reserves.size(); ++k) {
        if (!(reserves[k] > 0.0)) fail(ErrorCode::NonPositiveState, "reserves must be positive");
        log_c += params[k] * std::log(reserves[k]);
    }
    return std::exp(log_c);
}

double weighted_spot_rate(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i,
                          std::size_t o) {
    if (i == o && i < reserves.size()) return 1.0;
    check_pair(reserves, params, i, o);
    return (reserves[i] * params[o]) / (reserves[o] * params[i]);
}

double weighted_swap(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i,
                     std::size_t o, double x_i) {
    check_pair(reserves, params, i, o);
    if (x_i == 0.0) return 0.0;
    if (!(reserves[i] + x_i > 0.0)) fail(ErrorCode::ReserveDepletion, "input reserve would become non-positive");
    return reserves[o] * released_fraction(reserves[i], x_i, params[i] / params[o]);
}

double weighted_slippage(std::span<const double> reserves, const WeightedPoolParams& params, std::size_t i,
                         std::size_t o, double x_i) {
    check_pair(reserves, params, i, o);
    if (x_i == 0.0) fail(ErrorCode::InfeasibleTrade, "slippage is undefined for a zero trade");
    if (!(reserves[i] + x_i > 0.0)) fail(ErrorCode::ReserveDepletion, "input reserve would become non-positive");
    const double released = released_fraction(reserves[i], x_i, params[i] / params[o]);
    if (released == 0.0) fail(ErrorCode::InfeasibleTrade, "trade releases nothing");
    return x_i / (reserves[i] * (params[o] / params[i]) * released) - 1.0;
}

double weighted_divergence_loss(const WeightedPoolParams& params, std::size_t o, double rho) {
    if (o == 0 || o >= params.size()) fail(ErrorCode::DomainError, "shifted asset must be a non-numeraire asset");
    if (!(rho > -1.0)) fail(ErrorCode::DomainError, "rho must exceed -1");
    const double w = params[o];
    return std::exp(w * std::log1p(rho)) / (1.0 + w * rho) - 1.0;
}

}  // namespace amm::weighted
