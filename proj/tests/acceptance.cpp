// Acceptance suite: one PASS/FAIL line per criterion, with the measured error
// against its tolerance and the runtime against its budget.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "amm/analysis.hpp"
#include "amm/bonding_curve.hpp"
#include "amm/error.hpp"
#include "amm/numerics.hpp"
#include "amm/pmm.hpp"
#include "amm/pool.hpp"
#include "amm/weighted.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace amm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

// Tracks the worst measured error for one named quantity.
struct Worst {
    std::string name;
    double tolerance;
    double value = 0.0;
    long failures = 0;

    void add(double err) {
        if (!(err <= tolerance)) ++failures;
        if (std::isnan(err) || err > value) value = err;
    }
    std::string report() const {
        std::ostringstream s;
        s << name << " max=" << value << " (tol " << tolerance << ")";
        if (failures) s << " [" << failures << " over]";
        return s.str();
    }
};

Outcome summarize(const std::vector<Worst>& items, std::vector<std::string> extra = {}) {
    Outcome out;
    std::ostringstream s;
    bool first = true;
    for (const auto& w : items) {
        out.passed = out.passed && w.failures == 0;
        s << (first ? "" : "; ") << w.report();
        first = false;
    }
    for (const auto& e : extra) {
        s << (first ? "" : "; ") << e;
        first = false;
    }
    out.detail = s.str();
    return out;
}

struct Criterion {
    int number;
    std::string title;
    double budget_seconds;
    std::function<Outcome()> body;
};

// ---------------------------------------------------------------------------

Outcome uniswap_slippage_identity() {
    const analysis::NamedPool pool{"uniswap", make_pool(ProtocolSpec::uniswap(), {100.0, 100.0})};
    const auto grid = analysis::default_trade_grid();
    const auto series = analysis::slippage_curve(pool, 0, 1, grid);
    Worst err{"|S - x/r|", 1e-12};
    for (std::size_t k = 0; k < grid.size(); ++k) err.add(std::abs(series.y_values[k] - grid[k]));
    return summarize({err}, {std::to_string(grid.size()) + " grid points"});
}

Outcome divergence_closed_forms() {
    Worst uni{"|L_uni(-0.5) - desk|", 1e-9}, bal{"|L_bal(1, w=0.8) - desk|", 1e-9};
    uni.add(std::abs(weighted::weighted_divergence_loss(weighted::WeightedPoolParams::uniswap(), 1, -0.5) -
                     oracle::kUniswapLossMinusHalf));
    bal.add(std::abs(weighted::weighted_divergence_loss(weighted::WeightedPoolParams({0.2, 0.8}), 1, 1.0) -
                     oracle::kBalancerLossW08Rho1));
    Worst zero{"|L(0)|", 0.0}, sign{"max L on grid", 0.0};
    for (int k = 1; k <= 9; ++k) {
        const double w = 0.1 * k;
        const weighted::WeightedPoolParams params({1.0 - w, w});
        zero.add(std::abs(weighted::weighted_divergence_loss(params, 1, 0.0)));
        for (double rho : analysis::default_rho_grid()) {
            sign.add(std::max(0.0, weighted::weighted_divergence_loss(params, 1, rho)));
        }
    }
    return summarize({uni, bal, zero, sign});
}

// Dodo state with reserves drawn like the other protocols, an oracle price
// within a factor 5 of the reserve value ratio, and targets that put the
// reserves on the curve in either regime or at equilibrium.
PoolState dodo_state(oracle::Sampler& rng) {
    const auto r = rng.reserves(2);
    const double p = r[0] / r[1] * rng.log_uniform(0.2, 5.0);
    const double a = rng.uniform(0.01, 1.0);
    const auto spec = ProtocolSpec::pmm(a);
    switch (rng.integer(0, 2)) {
        case 0: return make_pool(spec, r, p);
        case 1: {
            // r1 above target, r2 below.
            for (double k = rng.log_uniform(1.0, 3.0);; k = 1.0 + 0.5 * (k - 1.0)) {
                const double c2 = r[1] * k;
                const double c1 = r[0] - p * (c2 - r[1]) * (1.0 + a * (c2 / r[1] - 1.0));
                if (c1 > 0.0) return make_pool(spec, r, p, std::array{c1, c2});
            }
        }
        default: {
            for (double k = rng.log_uniform(1.0, 3.0);; k = 1.0 + 0.5 * (k - 1.0)) {
                const double c1 = r[0] * k;
                const double c2 = r[1] - (c1 - r[0]) * (1.0 + a * (c1 / r[0] - 1.0)) / p;
                if (c2 > 0.0) return make_pool(spec, r, p, std::array{c1, c2});
            }
        }
    }
}

// Closed forms against the implicit solve and finite-difference rate.
Outcome oracle_equivalence() {
    oracle::Sampler rng(20240611);
    const auto& cfg = numerics::default_config();
    Worst swap{"swap", 1e-8}, spot{"spot", 1e-8}, slip{"slippage", 1e-8};
    const char* names[] = {"uniswap", "balancer", "curve", "dodo"};
    std::vector<std::string> extra;
    constexpr int kStates = 1000;
    for (int protocol = 0; protocol < 4; ++protocol) {
        int checked = 0;
        for (int k = 0; k < kStates; ++k) {
            PoolState pool;
            switch (protocol) {
                case 0: pool = make_pool(ProtocolSpec::uniswap(), rng.reserves(2)); break;
                case 1: {
                    const auto n = static_cast<std::size_t>(rng.integer(2, 4));
                    pool = make_pool(ProtocolSpec::weighted(rng.weights(n)), rng.reserves(n));
                    break;
                }
                case 2: {
                    const auto n = static_cast<std::size_t>(rng.integer(2, 4));
                    pool = make_pool(ProtocolSpec::stableswap(rng.log_uniform(0.01, 1e4)), rng.reserves(n));
                    break;
                }
                default: pool = dodo_state(rng); break;
            }
            const auto i = static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 1));
            auto o = static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 2));
            if (o >= i) ++o;
            const double x = rng.log_uniform(1e-3, 0.5) * pool.reserves[i];

            const auto z = implicit_conservation(pool);
            const double out_closed = quote_swap(pool, i, o, x);
            const double out_numeric = numerics::implicit_swap(z, pool.reserves, pool.invariant, i, o, x, cfg);
            const double e_closed = spot_rate(pool, i, o);
            const double e_numeric = numerics::numeric_spot_rate(z, pool.reserves, pool.invariant, i, o, cfg);
            const double s_closed = slippage(pool, i, o, x);
            const double s_numeric = x / (out_numeric * e_numeric) - 1.0;
            swap.add(oracle::rel_diff(out_closed, out_numeric));
            spot.add(oracle::rel_diff(e_closed, e_numeric));
            // Relative to the effective-rate ratio 1 + S.
            slip.add(std::abs(s_closed - s_numeric) / (1.0 + s_closed));
            ++checked;
        }
        extra.push_back(std::string(names[protocol]) + "=" + std::to_string(checked));
    }
    return summarize({swap, spot, slip}, {"states: " + extra[0] + " " + extra[1] + " " + extra[2] + " " + extra[3]});
}

Outcome stableswap_limits() {
    oracle::Sampler rng(4);
    Worst swap{"A=1e-8 swap rel", 1e-4}, spot{"A=1e-8 spot rel", 1e-4}, slip{"A=1e-8 |dS|", 1e-4},
        loss{"A=1e-8 |dL|", 1e-4};
    for (int k = 0; k < 60; ++k) {
        const auto r = k == 0 ? std::vector{100.0, 100.0} : rng.reserves(2, 1.0, 1e6);
        const auto curve = make_pool(ProtocolSpec::stableswap(1e-8), r);
        const auto uni = make_pool(ProtocolSpec::uniswap(), r);
        for (auto [i, o] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 0}}) {
            const double x = rng.log_uniform(1e-3, 0.5) * r[i];
            swap.add(oracle::rel_diff(quote_swap(curve, i, o, x), quote_swap(uni, i, o, x)));
            spot.add(oracle::rel_diff(spot_rate(curve, i, o), spot_rate(uni, i, o)));
            slip.add(std::abs(slippage(curve, i, o, x) - slippage(uni, i, o, x)));
        }
        const double rho = k == 0 ? -0.5 : rng.uniform(-0.9, 4.0);
        loss.add(std::abs(analysis::divergence_loss(curve, 1, rho) - analysis::divergence_loss(uni, 1, rho)));
    }
    const auto crv0 = analysis::NamedPool{"crv", make_pool(ProtocolSpec::stableswap(1e-8), {100.0, 100.0})};
    const auto uni0 = analysis::NamedPool{"uni", make_pool(ProtocolSpec::uniswap(), {100.0, 100.0})};
    const auto rho_grid = analysis::default_rho_grid();
    const auto lc = analysis::divergence_curve(crv0, 1, rho_grid), lu = analysis::divergence_curve(uni0, 1, rho_grid);
    for (std::size_t k = 0; k < rho_grid.size(); ++k) loss.add(std::abs(lc.y_values[k] - lu.y_values[k]));

    Worst flat{"A=1e8 |E - 1|", 1e-6}, tiny{"A=1e8 S", 1e-3};
    for (const auto& r : {std::vector{100.0, 100.0}, std::vector{50.0, 150.0}, std::vector{150.0, 50.0},
                          std::vector{100.0, 100.0, 100.0}, std::vector{80.0, 120.0, 100.0}}) {
        const auto pool = make_pool(ProtocolSpec::stableswap(1e8), r);
        for (std::size_t i = 0; i < r.size(); ++i) {
            for (std::size_t o = 0; o < r.size(); ++o) {
                if (i == o) continue;
                flat.add(std::abs(spot_rate(pool, i, o) - 1.0));
                for (double g = 1e-3; g <= 0.1 + 1e-12; g += 0.0033) tiny.add(slippage(pool, i, o, g * r[i]));
                tiny.add(slippage(pool, i, o, 0.1 * r[i]));
            }
        }
    }
    return summarize({swap, spot, slip, loss, flat, tiny});
}

Outcome stableswap_monotonicity() {
    const double amps[] = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<std::string> notes;
    long violations = 0;
    for (double g : {0.01, 0.1, 0.5}) {
        std::ostringstream s;
        s << "S(g=" << g << ")=";
        double prev = INFINITY;
        for (double a : amps) {
            const double v = slippage(make_pool(ProtocolSpec::stableswap(a), {100.0, 100.0}), 0, 1, g * 100.0);
            if (!(v < prev)) ++violations;
            prev = v;
            s << v << (a == 100.0 ? "" : ">");
        }
        notes.push_back(s.str());
    }
    for (double rho : {-0.5, 0.5, 2.0}) {
        std::ostringstream s;
        s << "|L(rho=" << rho << ")|=";
        double prev = 0.0;
        for (double a : amps) {
            const double v = std::abs(analysis::divergence_loss(make_pool(ProtocolSpec::stableswap(a), {100.0, 100.0}), 1, rho));
            if (!(v > prev)) ++violations;
            prev = v;
            s << v << (a == 100.0 ? "" : "<");
        }
        notes.push_back(s.str());
    }
    Outcome out;
    out.passed = violations == 0;
    std::ostringstream s;
    s << "strict-order violations=" << violations;
    for (const auto& n : notes) s << "; " << n;
    out.detail = s.str();
    return out;
}

Outcome pmm_reductions() {
    oracle::Sampler rng(6);
    long not_exact = 0;
    Worst cp{"A=1, C1=P*C2 vs r1*r2=C1*C2", 1e-9}, cont_swap{"|r2'-C2|/C2 at r1'=C1", 1e-12},
        cont_rate{"|E(C1+) - E(C1-)|/P", 1e-12};
    double typo_gap = INFINITY;
    for (int k = 0; k < 500; ++k) {
        const double p = rng.log_uniform(0.1, 10.0), a = rng.uniform(0.01, 1.0);
        const double c2 = rng.log_uniform(1.0, 1e6), c1 = p * c2 * rng.log_uniform(0.2, 5.0);
        const pmm::PMMParams params{a, p, c1, c2};
        if (pmm::pmm_spot_rate(c1, c2, params) != p) ++not_exact;

        // Constant-product reduction.
        const pmm::PMMParams unit{1.0, p, p * c2, c2};
        const double x1 = rng.uniform(-0.5, 2.0) * unit.target1;
        const double r1_new = unit.target1 + x1;
        cp.add(oracle::rel_diff(pmm::pmm_swap(unit.target1, c2, unit, x1), c2 - unit.target1 * c2 / r1_new));
        typo_gap = std::min(typo_gap, oracle::rel_diff(pmm::pmm_swap(unit.target1, c2, unit, x1),
                                                       c2 - unit.target1 * p * c2 / r1_new));

        // Branches meet at the target: swap back to C1 from either side.
        for (double side : {-1.0, 1.0}) {
            const double x0 = side * rng.uniform(0.01, 0.5) * c1;
            const double r1 = c1 + x0, r2 = c2 - pmm::pmm_swap(c1, c2, params, x0);
            const double r2_back = r2 - pmm::pmm_swap(r1, r2, params, c1 - r1);
            cont_swap.add(std::abs(r2_back - c2) / c2);
        }
        const double eps = 1e-15 * c1;
        const double up = pmm::pmm_spot_rate(c1 + eps, c2 - pmm::pmm_swap(c1, c2, params, eps), params);
        const double down = pmm::pmm_spot_rate(c1 - eps, c2 - pmm::pmm_swap(c1, c2, params, -eps), params);
        cont_rate.add(std::abs(up - down) / p);
    }
    Worst exact{"equilibrium E != P count", 0.0};
    exact.add(static_cast<double>(not_exact));
    std::ostringstream note;
    note << "printed C1*P*C2 form misses by >= " << typo_gap << " relative (curve is r1*r2 = C1*C2)";
    return summarize({exact, cp, cont_swap, cont_rate}, {note.str()});
}

Outcome bonding_identities() {
    using namespace amm::bonding;
    Worst round{"round trip", 1e-9}, ident{"C = F s P(s)", 1e-9}, power{"C = C0 (s/s0)^(1/F)", 1e-9},
        example{"|e(300) - 1000|/1000", 1e-12};
    for (double f : {0.1, 0.25, 0.5, 0.75, 1.0}) {
        const auto s0 = BondingCurveState::create(100.0, 1000.0, f);
        for (int k = 0; k <= 200; ++k) {
            const double t = 100.0 * std::pow(10.0, -6.0 + 8.0 * k / 200.0);
            const auto bought = bonding_buy(s0, t);
            const auto sold = bonding_sell(bought.state, bought.tokens);
            round.add(oracle::rel_diff(sold.currency, t));
            round.add(oracle::rel_diff(sold.state.reserve, s0.reserve));
            ident.add(reserve_identity_deviation(bought.state));
            power.add(oracle::rel_diff(bought.state.reserve,
                                       100.0 * std::pow(bought.state.supply / 1000.0, 1.0 / f)));
        }
    }
    oracle::Sampler rng(7);
    auto state = BondingCurveState::create(100.0, 1000.0, 0.3);
    for (int k = 0; k < 2000; ++k) {
        // Lean toward the genesis reserve.
        const bool buy = rng.uniform(0.0, 1.0) < (state.reserve < 100.0 ? 0.7 : 0.3);
        state = buy ? bonding_buy(state, rng.log_uniform(1e-4, 1.0) * state.reserve).state
                    : bonding_sell(state, rng.uniform(0.0, 0.5) * state.supply).state;
        ident.add(reserve_identity_deviation(state));
        power.add(oracle::rel_diff(state.reserve, 100.0 * std::pow(state.supply / 1000.0, 1.0 / 0.3)));
    }
    example.add(std::abs(bonding_buy(BondingCurveState::create(100.0, 1000.0, 0.5), 300.0).tokens - 1000.0) / 1000.0);
    return summarize({round, ident, power, example});
}

Outcome state_machine_rules() {
    oracle::Sampler rng(8);
    Worst swap_rule{"swap invariant deviation", kRuleTolerance}, liq_rule{"liquidity spot-rate deviation", kRuleTolerance};
    long receipts_failed = 0, transitions = 0;
    for (int chain = 0; chain < 150; ++chain) {
        auto pool = fixture::random_pool(rng, fixture::kFamilies[chain % 3]);
        for (int step = 0; step < 20; ++step, ++transitions) {
            if (rng.uniform(0.0, 1.0) < 0.7) {
                const auto i = static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 1));
                auto o = static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 2));
                if (o >= i) ++o;
                const auto res = apply_swap(pool, i, o, rng.uniform(-0.3, 0.5) * pool.reserves[i]);
                swap_rule.add(invariant_deviation(pool, res.state.reserves));
                if (!res.receipt.passed()) ++receipts_failed;
                pool = res.state;
            } else {
                const auto res = add_liquidity_proportional(pool, rng.uniform(-0.5, 1.0));
                liq_rule.add(max_spot_rate_deviation(pool, res.state));
                if (!res.receipt.passed()) ++receipts_failed;
                pool = res.state;
            }
        }
    }
    Worst receipts{"failed receipts", 0.0};
    receipts.add(static_cast<double>(receipts_failed));
    return summarize({swap_rule, liq_rule, receipts}, {std::to_string(transitions) + " transitions"});
}

std::vector<std::pair<std::string, std::string>> read_outputs(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream f(e.path(), std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        out.emplace_back(e.path().filename().string(), s.str());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome cli_determinism() {
    const fs::path base = fs::temp_directory_path() / "amm_acceptance_cli";
    fs::remove_all(base);
    const std::string cmd = std::string(AMMCTL_PATH) + " run " + AMM_SCENARIO_DIR + "/compare_four.json --out ";
    struct Run {
        const char* name;
        int parallel;
    };
    std::vector<std::vector<std::pair<std::string, std::string>>> outputs;
    std::vector<std::string> notes;
    bool ok = true;
    for (const Run& run : {Run{"serial_a", 1}, Run{"serial_b", 1}, Run{"parallel", 8}}) {
        const fs::path dir = base / run.name;
        const int status = std::system((cmd + dir.string() + " --parallel " + std::to_string(run.parallel) + " > /dev/null").c_str());
        if (status != 0) {
            ok = false;
            notes.push_back(std::string(run.name) + " exited with status " + std::to_string(status));
            continue;
        }
        outputs.push_back(read_outputs(dir));
    }
    std::size_t csvs = 0;
    if (!outputs.empty()) {
        for (const auto& [name, _] : outputs[0]) csvs += name.ends_with(".csv");
        for (const auto& other : outputs) ok = ok && other == outputs[0];
    }
    ok = ok && outputs.size() == 3 && csvs == 4;
    fs::remove_all(base);
    notes.push_back(std::to_string(csvs) + " CSV files; two serial runs and --parallel 8 " +
                    (ok ? "byte-identical" : "differ"));
    Outcome out;
    out.passed = ok;
    std::ostringstream s;
    for (std::size_t k = 0; k < notes.size(); ++k) s << (k ? "; " : "") << notes[k];
    out.detail = s.str();
    return out;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Uniswap slippage identity", 1.0, uniswap_slippage_identity},
        {2, "Divergence-loss closed forms", 1.0, divergence_closed_forms},
        {3, "Oracle equivalence", 30.0, oracle_equivalence},
        {4, "Stableswap limits", 5.0, stableswap_limits},
        {5, "Stableswap monotonicity", 5.0, stableswap_monotonicity},
        {6, "PMM reductions", 1.0, pmm_reductions},
        {7, "Bonding-curve identities", 1.0, bonding_identities},
        {8, "State-machine rules", 10.0, state_machine_rules},
        {9, "CLI determinism", 10.0, cli_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome result;
        try {
            result = c.body();
        } catch (const std::exception& e) {
            result = {false, std::string("threw: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.budget_seconds;
        const bool passed = result.passed && in_time;
        failed += !passed;
        std::printf("[%s] %d. %s: %s | runtime %.3f s (limit %g s)%s\n", passed ? "PASS" : "FAIL", c.number,
                    c.title.c_str(), result.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : " EXCEEDED");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
