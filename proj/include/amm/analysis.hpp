#pragma once

// Comparison series: slippage against normalized trade size, divergence loss
// against price shift, and r_i/r_o cross-sections of the conservation curve.
// Grid points are independent and may be evaluated on several threads; the
// result is ordered by grid index and does not depend on the thread count.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amm/pool.hpp"
#include "amm/valuation.hpp"

namespace amm::analysis {

enum class SeriesKind { Slippage, DivergenceLoss, ConservationCrossSection };

std::string_view to_string(SeriesKind kind);

struct PointFailure {
    std::size_t index = 0;
    double x = 0.0;
    std::string message;
};

struct CurveSeries {
    SeriesKind kind = SeriesKind::Slippage;
    std::string pool_id;
    std::string protocol;
    std::string hyperparameters;
    std::vector<double> x_values;
    std::vector<double> y_values;  // NaN where the point failed
    std::vector<PointFailure> failures;

    bool complete() const { return failures.empty(); }
};

struct NamedPool {
    std::string id;
    PoolState state;
};

struct EvalOptions {
    unsigned parallelism = 1;
};

/// 50 log-spaced normalized trade sizes on [0.01, 0.9].
std::vector<double> default_trade_grid();
/// 60 evenly spaced price shifts on [-0.9, 4].
std::vector<double> default_rho_grid();

/// L for asset o moving by rho against asset 0: closed form for weighted
/// pools, the generic rebalancing procedure for stableswap. PMM pools have no
/// divergence loss in this sense and raise NotApplicable.
double divergence_loss(const PoolState& state, std::size_t o, double rho);

/// Full valuation via the generic procedure.
ValuationReport valuation(const PoolState& state, std::size_t o, double rho);

/// S at x_i = g * r_i for each g in `x_grid` (each in (0, 0.95]).
CurveSeries slippage_curve(const NamedPool& pool, std::size_t i, std::size_t o, std::span<const double> x_grid,
                           const EvalOptions& opts = {});

CurveSeries divergence_curve(const NamedPool& pool, std::size_t o, std::span<const double> rho_grid,
                             const EvalOptions& opts = {});

/// r_o on the pool's current curve for each r_i in `r_grid`, other reserves fixed.
CurveSeries conservation_cross_section(const NamedPool& pool, std::size_t i, std::size_t o,
                                       std::span<const double> r_grid, const EvalOptions& opts = {});

struct ComparisonConfig {
    std::vector<NamedPool> pools;
    std::vector<SeriesKind> analyses{SeriesKind::Slippage};
    std::size_t input_asset = 0;
    std::size_t output_asset = 1;
    std::vector<double> trade_grid = default_trade_grid();
    std::vector<double> rho_grid = default_rho_grid();
    std::vector<double> reserve_grid;  // absolute r_i values for cross-sections
};

/// One series per (analysis, pool), analyses outermost.
std::vector<CurveSeries> compare_protocols(const ComparisonConfig& config, const EvalOptions& opts = {});

}  // namespace amm::analysis
