#include "amm/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "amm/error.hpp"

namespace amm::numerics {

namespace {

bool finite(double x) { return std::isfinite(x); }

double midpoint(double lo, double hi) {
    // Geometric bisection over wide positive brackets.
    if (lo > 0.0 && hi > 4.0 * lo) return std::sqrt(lo) * std::sqrt(hi);
    return lo + 0.5 * (hi - lo);
}

void require_positive(std::span<const double> reserves, const char* where) {
    for (double r : reserves) {
        if (!(r > 0.0) || !finite(r)) fail(ErrorCode::NonPositiveState, std::string(where) + ": reserves must be positive");
    }
}

void require_shape(const ImplicitConservation& z, std::span<const double> reserves, std::size_t i,
                   std::size_t o, const char* where) {
    if (reserves.size() != z.n) fail(ErrorCode::InvalidArgument, std::string(where) + ": reserve count mismatch");
    if (i >= z.n || o >= z.n) fail(ErrorCode::InvalidArgument, std::string(where) + ": asset index out of range");
}

}  // namespace

const SolverConfig& default_config() {
    static const SolverConfig cfg{};
    return cfg;
}

// ---------------------------------------------------------------------------
// Scalar root finding
// ---------------------------------------------------------------------------

RootBracket RootBracket::make(const ScalarFn& f, double lo, double hi) {
    if (!(lo < hi) || !finite(lo) || !finite(hi)) fail(ErrorCode::InvalidBracket, "bracket must satisfy lo < hi");
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (!finite(f_lo) || !finite(f_hi)) fail(ErrorCode::InvalidBracket, "function is not finite at the bracket ends");
    if ((f_lo > 0.0 && f_hi > 0.0) || (f_lo < 0.0 && f_hi < 0.0)) {
        fail(ErrorCode::InvalidBracket, "no sign change over bracket");
    }
    return RootBracket(lo, hi, f_lo, f_hi);
}

double find_root(const ScalarFn& f, const RootBracket& bracket, double rel_tol, const ScalarFn& derivative,
                 int max_iterations) {
    if (!(rel_tol >= 1e-15)) fail(ErrorCode::InvalidArgument, "rel_tol must be at least 1e-15");

    double lo = bracket.lo(), hi = bracket.hi();
    double f_lo = bracket.f_lo(), f_hi = bracket.f_hi();
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    const bool rising = f_lo < 0.0;

    // Start from the secant through the bracket ends.
    double x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) x = midpoint(lo, hi);
    double fx = f(x);
    double x_prev = (std::abs(f_lo) < std::abs(f_hi)) ? lo : hi;
    double f_prev = (x_prev == lo) ? f_lo : f_hi;
    double width_before = hi - lo;

    for (int iter = 0; iter < max_iterations; ++iter) {
        if (!finite(fx)) fail(ErrorCode::NoSolution, "function is not finite inside the bracket");
        if (fx == 0.0) return x;
        if ((fx < 0.0) == rising) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) {
            return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
        }

        double slope = std::numeric_limits<double>::quiet_NaN();
        if (derivative) {
            slope = derivative(x);
        } else if (x != x_prev) {
            slope = (fx - f_prev) / (x - x_prev);
        }
        double next = (slope != 0.0 && finite(slope)) ? x - fx / slope : std::numeric_limits<double>::quiet_NaN();

        // Newton steps are only trusted while they land inside the bracket and
        // the bracket keeps shrinking.
        const bool stalled = (iter % 3 == 2) && (hi - lo) > 0.5 * width_before;
        if (iter % 3 == 2) width_before = hi - lo;
        if (!(next > lo && next < hi) || stalled) next = midpoint(lo, hi);
        if (next == lo || next == hi) return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;

        if (std::abs(next - x) <= rel_tol * std::abs(next)) {
            const double f_next = f(next);
            if (finite(f_next)) return std::abs(f_next) <= std::abs(fx) ? next : x;
        }
        x_prev = x;
        f_prev = fx;
        x = next;
        fx = f(x);
    }
    fail(ErrorCode::ConvergenceFailure, "root finder exceeded " + std::to_string(max_iterations) + " iterations");
}

// ---------------------------------------------------------------------------
// Conservation functions
// ---------------------------------------------------------------------------

ImplicitConservation constant_product_z() {
    return {[](std::span<const double> r, std::span<const double> c) { return r[0] * r[1] - c[0]; }, 2,
            "constant-product"};
}

ImplicitConservation weighted_product_z(std::vector<double> weights) {
    const std::size_t n = weights.size();
    return {[w = std::move(weights)](std::span<const double> r, std::span<const double> c) {
                double prod = 1.0;
                for (std::size_t k = 0; k < w.size(); ++k) prod *= std::pow(r[k], w[k]);
                return prod - c[0];
            },
            n, "weighted-product"};
}

ImplicitConservation stableswap_z(double amplification, std::size_t n) {
    return {[a = amplification](std::span<const double> r, std::span<const double> c) {
                const double d = c[0];
                const double n_assets = static_cast<double>(r.size());
                double ratio = 1.0;  // (D/n)^n / prod r
                double sum = 0.0;
                for (double rk : r) {
                    ratio *= d / (n_assets * rk);
                    sum += rk;
                }
                return ratio - 1.0 - a * (sum / d - 1.0);
            },
            n, "stableswap"};
}

ImplicitConservation pmm_z(double amplification, double oracle_price) {
    return {[a = amplification, p = oracle_price](std::span<const double> r, std::span<const double> c) {
                const double c1 = c[0], c2 = c[1];
                // Token-1 value the pool gives up (or takes) moving r1 away from C1.
                const double g1 = r[0] >= c1 ? r[0] - c1 : -(c1 - r[0]) * (1.0 + a * (c1 / r[0] - 1.0));
                const double g2 = r[1] <= c2 ? p * (c2 - r[1]) * (1.0 + a * (c2 / r[1] - 1.0)) : -p * (r[1] - c2);
                return g1 - g2;
            },
            2, "pmm"};
}

// ---------------------------------------------------------------------------
// Spot rates and swaps
// ---------------------------------------------------------------------------

std::vector<double> numeric_gradient(const ImplicitConservation& z, std::span<const double> reserves,
                                     std::span<const double> invariant, const SolverConfig& cfg) {
    std::vector<double> point(reserves.begin(), reserves.end());
    std::vector<double> grad(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) {
        const double rk = point[k];
        double h = std::max(cfg.fd_rel_step * rk, cfg.fd_min_step);
        h = std::min(h, 0.5 * rk);
        const double up = rk + h;
        const double down = rk - h;
        point[k] = up;
        const double z_up = z(point, invariant);
        point[k] = down;
        const double z_down = z(point, invariant);
        point[k] = rk;
        grad[k] = (z_up - z_down) / (up - down);
    }
    return grad;
}

double numeric_spot_rate(const ImplicitConservation& z, std::span<const double> reserves,
                         std::span<const double> invariant, std::size_t i, std::size_t o, const SolverConfig& cfg) {
    require_shape(z, reserves, i, o, "numeric_spot_rate");
    require_positive(reserves, "numeric_spot_rate");
    if (i == o) return 1.0;
    const auto grad = numeric_gradient(z, reserves, invariant, cfg);
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    if (!(scale > 0.0) || std::abs(grad[i]) < cfg.degenerate_gradient * scale) {
        fail(ErrorCode::DegenerateGradient, "dZ/dr_i vanishes");
    }
    return grad[o] / grad[i];
}

double implicit_swap(const ImplicitConservation& z, std::span<const double> reserves,
                     std::span<const double> invariant, std::size_t i, std::size_t o, double x_i,
                     const SolverConfig& cfg) {
    require_shape(z, reserves, i, o, "implicit_swap");
    require_positive(reserves, "implicit_swap");
    if (i == o) fail(ErrorCode::IdenticalAssets, "input and output asset coincide");
    if (x_i == 0.0) return 0.0;
    std::vector<double> post(reserves.begin(), reserves.end());
    post[i] += x_i;
    if (!(post[i] > 0.0)) fail(ErrorCode::ReserveDepletion, "input reserve would become non-positive");

    const double r_o = reserves[o];
    auto residual = [&](double r_o_new) {
        post[o] = r_o_new;
        return z(post, invariant);
    };
    const double lo = cfg.swap_bracket_lo * r_o;
    const double hi = cfg.swap_bracket_hi * r_o;
    std::optional<RootBracket> bracket;
    try {
        bracket = RootBracket::make(residual, lo, hi);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidBracket) fail(ErrorCode::NoSolution, "conservation function has no root for r_o'");
        throw;
    }
    const double r_o_new = find_root(residual, *bracket, cfg.root_rel_tol, nullptr, cfg.root_max_iterations);
    return r_o - r_o_new;
}

// ---------------------------------------------------------------------------
// Rebalancing and divergence loss
// ---------------------------------------------------------------------------

std::vector<double> solve_rebalance(const ImplicitConservation& z, std::span<const double> reserves,
                                    std::span<const double> invariant, std::size_t o, double rho,
                                    const SolverConfig& cfg) {
    require_shape(z, reserves, o, o, "solve_rebalance");
    require_positive(reserves, "solve_rebalance");
    if (!(rho > -1.0) || !finite(rho)) fail(ErrorCode::DomainError, "rho must exceed -1");
    const std::size_t n = z.n;
    std::vector<double> base(reserves.begin(), reserves.end());
    if (rho == 0.0) return base;

    const auto grad0 = numeric_gradient(z, base, invariant, cfg);
    double z_scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) z_scale += std::abs(grad0[k]) * base[k];
    if (!(z_scale > 0.0)) fail(ErrorCode::DegenerateGradient, "conservation function is flat at the initial state");
    std::vector<double> log_rate0(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == o) continue;
        const double rate = grad0[o] / grad0[j];
        if (!(rate > 0.0) || !finite(rate)) fail(ErrorCode::DegenerateGradient, "initial spot rate is not positive");
        log_rate0[j] = std::log(rate);
    }
    const double target = std::log1p(rho);

    // Unknowns are log(r'_k / r_k) for k != o; r'_o is recovered on the curve
    // by a bracketed one-dimensional solve, so only the rate equations remain.
    using Vec = Eigen::VectorXd;
    const auto dim = static_cast<Eigen::Index>(n - 1);
    auto slot = [o](std::size_t k) { return static_cast<Eigen::Index>(k < o ? k : k - 1); };
    std::vector<double> point(n);
    const double r_o_lo = base[o] * std::exp(-cfg.rebalance_max_log_shift);
    const double r_o_hi = base[o] * std::exp(cfg.rebalance_max_log_shift);
    auto place = [&](const Vec& v) -> bool {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != o) point[k] = base[k] * std::exp(v[slot(k)]);
        }
        auto on_curve = [&](double r_o) {
            point[o] = r_o;
            return z(point, invariant);
        };
        std::optional<RootBracket> bracket;
        try {
            bracket = RootBracket::make(on_curve, r_o_lo, r_o_hi);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidBracket) return false;
            throw;
        }
        point[o] = find_root(on_curve, *bracket, cfg.root_rel_tol, nullptr, cfg.root_max_iterations);
        return true;
    };
    auto residual = [&](const Vec& v) -> std::optional<Vec> {
        if (!place(v)) return std::nullopt;
        const auto grad = numeric_gradient(z, point, invariant, cfg);
        Vec f(dim);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == o) continue;
            const double rate = grad[o] / grad[j];
            if (!(rate > 0.0) || !finite(rate)) return std::nullopt;
            f[slot(j)] = std::log(rate) - log_rate0[j] - target;
        }
        if (!f.allFinite()) return std::nullopt;
        return f;
    };
    auto converged = [&](const Vec& f) { return f.cwiseAbs().maxCoeff() <= cfg.rebalance_rate_tol; };
    auto finish = [&](const Vec& v) {
        place(v);
        if (!(std::abs(z(point, invariant)) / z_scale <= cfg.rebalance_residual_tol)) {
            fail(ErrorCode::ConvergenceFailure, "rebalanced reserves left the conservation curve");
        }
        return point;
    };

    if (n == 2) {
        // Scalar problem: expand a bracket outward from the start, then bisect.
        auto g = [&](double x) {
            const auto fx = residual(Vec::Constant(1, x));
            if (!fx) fail(ErrorCode::NoSolution, "rebalance system undefined inside the search range");
            return (*fx)[0];
        };
        const double g0 = g(0.0);
        for (double dir : {g0 < 0.0 ? 1.0 : -1.0, g0 < 0.0 ? -1.0 : 1.0}) {
            double inner = 0.0;
            for (double reach = 0.25; reach <= cfg.rebalance_max_log_shift; reach *= 2.0) {
                const auto f_reach = residual(Vec::Constant(1, dir * reach));
                if (!f_reach) break;
                if (((*f_reach)[0] > 0.0) != (g0 > 0.0)) {
                    const auto bracket = RootBracket::make(g, std::min(inner, dir * reach), std::max(inner, dir * reach));
                    const double x = find_root(g, bracket, cfg.root_rel_tol, nullptr, cfg.root_max_iterations);
                    if (!(std::abs(g(x)) <= cfg.rebalance_rate_tol)) {
                        fail(ErrorCode::ConvergenceFailure, "rebalance root does not meet the rate tolerance");
                    }
                    return finish(Vec::Constant(1, x));
                }
                inner = dir * reach;
            }
        }
        std::ostringstream msg;
        msg << "target rate change " << rho << " is not attainable on this curve";
        fail(ErrorCode::NoSolution, msg.str());
    }

    Vec v = Vec::Zero(dim);
    auto f0 = residual(v);
    if (!f0) fail(ErrorCode::DegenerateGradient, "rebalance system undefined at the initial state");
    Vec f = *f0;
    // Widened whenever a Newton direction fails to descend.
    double delta = cfg.rebalance_jacobian_step;
    constexpr double kMaxJacobianStep = 0.1;

    for (int iter = 0; iter < cfg.rebalance_max_iterations; ++iter) {
        if (converged(f)) return finish(v);

        Eigen::MatrixXd jac(dim, dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            Vec up = v, down = v;
            up[k] += delta;
            down[k] -= delta;
            auto f_up = residual(up);
            auto f_down = residual(down);
            if (f_up && f_down) {
                jac.col(k) = (*f_up - *f_down) / (2.0 * delta);
            } else if (f_up) {
                jac.col(k) = (*f_up - f) / delta;
            } else if (f_down) {
                jac.col(k) = (f - *f_down) / delta;
            } else {
                fail(ErrorCode::NoSolution, "rebalance system undefined near the current iterate");
            }
        }
        Vec step = jac.fullPivLu().solve(-f);
        if (!step.allFinite()) fail(ErrorCode::NoSolution, "singular rebalance Jacobian");
        const double longest = step.cwiseAbs().maxCoeff();
        if (longest > cfg.rebalance_max_step) step *= cfg.rebalance_max_step / longest;

        const double norm0 = f.squaredNorm();
        bool accepted = false;
        for (double lambda = 1.0; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
            Vec trial = v + lambda * step;
            if (trial.cwiseAbs().maxCoeff() > cfg.rebalance_max_log_shift) continue;
            auto f_trial = residual(trial);
            if (!f_trial) continue;
            if (f_trial->squaredNorm() <= (1.0 - 1e-4 * lambda) * norm0) {
                v = trial;
                f = *f_trial;
                accepted = true;
                break;
            }
        }
        if (accepted) {
            delta = cfg.rebalance_jacobian_step;
        } else if (delta < kMaxJacobianStep) {
            delta = std::min(10.0 * delta, kMaxJacobianStep);
        } else {
            if (converged(f)) return finish(v);
            std::ostringstream msg;
            msg << "rebalance stalled with residual " << f.cwiseAbs().maxCoeff() << "; target rate change "
                << rho << " is not attainable on this curve";
            fail(ErrorCode::NoSolution, msg.str());
        }
    }
    if (converged(f)) return finish(v);
    fail(ErrorCode::ConvergenceFailure, "rebalance exceeded iteration cap");
}

ValuationReport generic_divergence_loss(const ImplicitConservation& z, std::span<const double> reserves,
                                        std::span<const double> invariant, std::size_t o, double rho,
                                        const SolverConfig& cfg) {
    require_shape(z, reserves, o, o, "generic_divergence_loss");
    if (o == 0) fail(ErrorCode::DomainError, "asset 0 is the numeraire; the shifted asset must differ");
    if (!(rho > -1.0) || !finite(rho)) fail(ErrorCode::DomainError, "rho must exceed -1");

    // Value in units of asset 0: sum_j (dZ/dr_j / dZ/dr_0) r_j.
    auto pool_value = [&](std::span<const double> r) {
        const auto grad = numeric_gradient(z, r, invariant, cfg);
        if (!(std::abs(grad[0]) > 0.0)) fail(ErrorCode::DegenerateGradient, "dZ/dr_0 vanishes");
        double v = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) v += (j == 0 ? 1.0 : grad[j] / grad[0]) * r[j];
        return std::pair{v, grad[o] / grad[0]};
    };

    const auto [value, rate_o] = pool_value(reserves);
    const double value_held = value + rate_o * reserves[o] * rho;
    const auto shifted = solve_rebalance(z, reserves, invariant, o, rho, cfg);
    const double value_after = pool_value(shifted).first;
    return ValuationReport::from_values(rho, value, value_held, value_after);
}

}  // namespace amm::numerics
