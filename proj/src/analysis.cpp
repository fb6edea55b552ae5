#include "amm/analysis.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "amm/error.hpp"
#include "amm/format.hpp"
#include "amm/numerics.hpp"
#include "amm/weighted.hpp"

namespace amm::analysis {

namespace {

struct PointResult {
    double y = std::numeric_limits<double>::quiet_NaN();
    std::string error;
    bool ok = false;
};

std::vector<PointResult> evaluate_points(std::size_t count, const std::function<double(std::size_t)>& fn,
                                         unsigned parallelism) {
    std::vector<PointResult> out(count);
    auto run_one = [&](std::size_t k) {
        try {
            out[k].y = fn(k);
            out[k].ok = true;
        } catch (const std::exception& e) {
            out[k].error = e.what();
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) run_one(k);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) run_one(k);
        });
    }
    threads.clear();
    return out;
}

void require_increasing(std::span<const double> grid, const char* what) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k])) fail(ErrorCode::InvalidArgument, std::string(what) + " contains a non-finite value");
        if (k && !(grid[k] > grid[k - 1])) fail(ErrorCode::InvalidArgument, std::string(what) + " must be strictly increasing");
    }
}

CurveSeries make_series(SeriesKind kind, const NamedPool& pool, std::span<const double> grid,
                        const std::function<double(std::size_t)>& fn, const EvalOptions& opts) {
    CurveSeries series;
    series.kind = kind;
    series.pool_id = pool.id;
    series.protocol = pool.state.spec.protocol_name();
    series.hyperparameters = pool.state.spec.hyperparameters();
    if (pool.state.oracle_price) series.hyperparameters += ";P=" + format_shortest(*pool.state.oracle_price);
    series.x_values.assign(grid.begin(), grid.end());
    const auto points = evaluate_points(grid.size(), fn, opts.parallelism);
    series.y_values.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        series.y_values.push_back(points[k].y);
        if (!points[k].ok) series.failures.push_back({k, grid[k], points[k].error});
    }
    return series;
}

}  // namespace

std::string_view to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::Slippage: return "slippage";
        case SeriesKind::DivergenceLoss: return "divergence_loss";
        case SeriesKind::ConservationCrossSection: return "cross_section";
    }
    return "unknown";
}

std::vector<double> default_trade_grid() {
    constexpr int kPoints = 50;
    const double lo = std::log(0.01), hi = std::log(0.9);
    std::vector<double> grid(kPoints);
    for (int k = 0; k < kPoints; ++k) grid[k] = std::exp(lo + (hi - lo) * k / (kPoints - 1));
    grid.front() = 0.01;
    grid.back() = 0.9;
    return grid;
}

std::vector<double> default_rho_grid() {
    constexpr int kPoints = 60;
    std::vector<double> grid(kPoints);
    for (int k = 0; k < kPoints; ++k) grid[k] = -0.9 + 4.9 * k / (kPoints - 1);
    return grid;
}

double divergence_loss(const PoolState& state, std::size_t o, double rho) {
    switch (state.spec.family) {
        case Family::WeightedProduct:
            return weighted::weighted_divergence_loss(weighted_params(state), o, rho);
        case Family::StableSwap:
            return valuation(state, o, rho).loss;
        case Family::PMM:
            break;
    }
    fail(ErrorCode::NotApplicable, "oracle-anchored PMM pools carry no divergence loss");
}

ValuationReport valuation(const PoolState& state, std::size_t o, double rho) {
    if (state.spec.family == Family::PMM) fail(ErrorCode::NotApplicable, "oracle-anchored PMM pools carry no divergence loss");
    return numerics::generic_divergence_loss(implicit_conservation(state), state.reserves, state.invariant, o, rho);
}

CurveSeries slippage_curve(const NamedPool& pool, std::size_t i, std::size_t o, std::span<const double> x_grid,
                           const EvalOptions& opts) {
    require_increasing(x_grid, "trade grid");
    for (double g : x_grid) {
        if (!(g > 0.0 && g <= 0.95)) fail(ErrorCode::InvalidArgument, "normalized trade sizes must lie in (0, 0.95]");
    }
    const PoolState& state = pool.state;
    if (i >= state.size() || o >= state.size()) fail(ErrorCode::InvalidArgument, "asset index out of range");
    return make_series(SeriesKind::Slippage, pool, x_grid,
                       [&](std::size_t k) { return slippage(state, i, o, x_grid[k] * state.reserves[i]); }, opts);
}

CurveSeries divergence_curve(const NamedPool& pool, std::size_t o, std::span<const double> rho_grid,
                             const EvalOptions& opts) {
    require_increasing(rho_grid, "rho grid");
    for (double rho : rho_grid) {
        if (!(rho > -1.0)) fail(ErrorCode::InvalidArgument, "price shifts must exceed -1");
    }
    if (pool.state.spec.family == Family::PMM) {
        fail(ErrorCode::NotApplicable, "pool '" + pool.id + "': oracle-anchored PMM pools carry no divergence loss");
    }
    if (o == 0 || o >= pool.state.size()) fail(ErrorCode::InvalidArgument, "shifted asset must be a non-numeraire asset");
    return make_series(SeriesKind::DivergenceLoss, pool, rho_grid,
                       [&](std::size_t k) { return divergence_loss(pool.state, o, rho_grid[k]); }, opts);
}

CurveSeries conservation_cross_section(const NamedPool& pool, std::size_t i, std::size_t o,
                                       std::span<const double> r_grid, const EvalOptions& opts) {
    require_increasing(r_grid, "reserve grid");
    for (double r : r_grid) {
        if (!(r > 0.0)) fail(ErrorCode::InvalidArgument, "reserve grid must be positive");
    }
    const PoolState& state = pool.state;
    if (i >= state.size() || o >= state.size()) fail(ErrorCode::InvalidArgument, "asset index out of range");
    if (i == o) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
    return make_series(SeriesKind::ConservationCrossSection, pool, r_grid,
                       [&](std::size_t k) {
                           const double r_o = state.reserves[o] - quote_swap(state, i, o, r_grid[k] - state.reserves[i]);
                           if (!(r_o > 0.0)) fail(ErrorCode::NoSolution, "curve has no positive branch here");
                           return r_o;
                       },
                       opts);
}

std::vector<CurveSeries> compare_protocols(const ComparisonConfig& config, const EvalOptions& opts) {
    std::vector<CurveSeries> out;
    for (SeriesKind kind : config.analyses) {
        for (const auto& pool : config.pools) {
            try {
                switch (kind) {
                    case SeriesKind::Slippage:
                        out.push_back(slippage_curve(pool, config.input_asset, config.output_asset, config.trade_grid, opts));
                        break;
                    case SeriesKind::DivergenceLoss:
                        out.push_back(divergence_curve(pool, config.output_asset, config.rho_grid, opts));
                        break;
                    case SeriesKind::ConservationCrossSection:
                        out.push_back(conservation_cross_section(pool, config.input_asset, config.output_asset,
                                                                 config.reserve_grid, opts));
                        break;
                }
            } catch (const Error& e) {
                if (e.detail().starts_with("pool '")) throw;
                throw Error(e.code(), "pool '" + pool.id + "': " + e.detail());
            }
        }
    }
    return out;
}

}  // namespace amm::analysis
