#include "amm/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "amm/error.hpp"
#include "amm/format.hpp"

namespace amm::scenario {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::size_t kDefaultGridPoints = 50;

class Reader {
public:
    explicit Reader(ValidationReport& report) : report_(report) {}

    void error(const std::string& where, const std::string& message) { report_.errors.push_back(where + ": " + message); }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& where, bool required) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) error(where, "missing field '" + key + "'");
            return std::nullopt;
        }
        if (!it->is_number() || !std::isfinite(it->get<double>())) {
            error(where + "." + key, "expected a finite number");
            return std::nullopt;
        }
        return it->get<double>();
    }

    std::optional<std::size_t> index(const json& obj, const std::string& key, const std::string& where,
                                     std::size_t fallback) {
        const auto it = obj.find(key);
        if (it == obj.end()) return fallback;
        if (!it->is_number_unsigned()) {
            error(where + "." + key, "expected a non-negative integer asset index");
            return std::nullopt;
        }
        return it->get<std::size_t>();
    }

    std::optional<std::string> string(const json& obj, const std::string& key, const std::string& where, bool required) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) error(where, "missing field '" + key + "'");
            return std::nullopt;
        }
        if (!it->is_string()) {
            error(where + "." + key, "expected a string");
            return std::nullopt;
        }
        return it->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& obj, const std::string& key, const std::string& where,
                                               bool required) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) error(where, "missing field '" + key + "'");
            return std::nullopt;
        }
        return number_array(*it, where + "." + key);
    }

    std::optional<std::vector<double>> number_array(const json& value, const std::string& where) {
        if (!value.is_array()) {
            error(where, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& v : value) {
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                error(where, "expected an array of finite numbers");
                return std::nullopt;
            }
            out.push_back(v.get<double>());
        }
        return out;
    }

    // Either an explicit array or {"from", "to", "points", "spacing": "linear" | "log"}.
    std::optional<std::vector<double>> grid(const json& obj, const std::string& where) {
        const auto it = obj.find("grid");
        if (it == obj.end()) return std::nullopt;
        const std::string at = where + ".grid";
        if (it->is_array()) return number_array(*it, at);
        if (!it->is_object()) {
            error(at, "expected an array or a range object");
            return std::nullopt;
        }
        const auto from = number(*it, "from", at, true);
        const auto to = number(*it, "to", at, true);
        const auto points = it->find("points");
        std::size_t n = kDefaultGridPoints;
        if (points != it->end()) {
            if (!points->is_number_unsigned() || points->get<std::size_t>() < 2) {
                error(at + ".points", "expected an integer of at least 2");
                return std::nullopt;
            }
            n = points->get<std::size_t>();
        }
        const std::string spacing = string(*it, "spacing", at, false).value_or("linear");
        if (!from || !to) return std::nullopt;
        if (!(*to > *from)) {
            error(at, "'to' must exceed 'from'");
            return std::nullopt;
        }
        if (spacing == "log") {
            if (!(*from > 0.0)) {
                error(at, "log spacing needs a positive range");
                return std::nullopt;
            }
            return log_space(*from, *to, n);
        }
        if (spacing != "linear") {
            error(at + ".spacing", "expected 'linear' or 'log'");
            return std::nullopt;
        }
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = *from + (*to - *from) * static_cast<double>(k) / static_cast<double>(n - 1);
        out.back() = *to;
        return out;
    }

    static std::vector<double> log_space(double from, double to, std::size_t n) {
        std::vector<double> out(n);
        const double a = std::log(from), b = std::log(to);
        for (std::size_t k = 0; k < n; ++k) out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
        out.front() = from;
        out.back() = to;
        return out;
    }

private:
    ValidationReport& report_;
};

bool valid_identifier(const std::string& id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

std::optional<ProtocolSpec> read_spec(Reader& rd, const json& p, const std::string& where) {
    const auto family = rd.string(p, "family", where, true);
    if (!family) return std::nullopt;
    if (*family == "uniswap") return ProtocolSpec::uniswap();
    if (*family == "weighted_product" || *family == "balancer" || *family == "bancor") {
        const auto w = rd.numbers(p, "weights", where, true);
        if (!w) return std::nullopt;
        return ProtocolSpec::weighted(*w);
    }
    if (*family == "stableswap" || *family == "curve") {
        const auto a = rd.number(p, "amplification", where, true);
        if (!a) return std::nullopt;
        return ProtocolSpec::stableswap(*a);
    }
    if (*family == "pmm" || *family == "dodo") {
        const auto a = rd.number(p, "amplification", where, true);
        if (!a) return std::nullopt;
        return ProtocolSpec::pmm(*a);
    }
    rd.error(where + ".family", "unknown family '" + *family + "'");
    return std::nullopt;
}

void read_pools(Reader& rd, const json& doc, Scenario& sc, std::map<std::string, PoolState>& states) {
    const auto it = doc.find("pools");
    if (it == doc.end()) {
        rd.error("scenario", "missing field 'pools'");
        return;
    }
    if (!it->is_array()) {
        rd.error("pools", "expected an array");
        return;
    }
    for (std::size_t k = 0; k < it->size(); ++k) {
        const json& p = (*it)[k];
        std::string where = "pools[" + std::to_string(k) + "]";
        if (!p.is_object()) {
            rd.error(where, "expected an object");
            continue;
        }
        PoolDefinition def;
        const auto id = rd.string(p, "id", where, true);
        if (id) {
            def.id = *id;
            where += " '" + def.id + "'";
            if (!valid_identifier(def.id)) rd.error(where, "pool id may contain only letters, digits, '_', '-' and '.'");
            if (states.contains(def.id) ||
                std::any_of(sc.pools.begin(), sc.pools.end(), [&](const auto& q) { return q.id == def.id; })) {
                rd.error(where, "duplicate pool id '" + def.id + "'");
            }
        }
        const auto spec = read_spec(rd, p, where);
        const auto reserves = rd.numbers(p, "reserves", where, true);
        def.oracle_price = rd.number(p, "oracle_price", where, false);
        if (const auto targets = rd.numbers(p, "targets", where, false)) {
            if (targets->size() == 2) {
                def.targets = std::array{(*targets)[0], (*targets)[1]};
            } else {
                rd.error(where + ".targets", "expected two target reserves");
            }
        }
        if (!id || !spec || !reserves) {
            if (id) sc.pools.push_back(std::move(def));
            continue;
        }
        def.spec = *spec;
        def.reserves = *reserves;
        try {
            states.emplace(def.id, make_pool(def.spec, def.reserves, def.oracle_price, def.targets));
        } catch (const Error& e) {
            rd.error(where, e.detail());
        }
        sc.pools.push_back(std::move(def));
    }
}

std::optional<ActionType> action_type(const std::string& name) {
    static const std::map<std::string, ActionType> names{
        {"swap", ActionType::Swap},
        {"add_liquidity", ActionType::AddLiquidity},
        {"slippage_curve", ActionType::SlippageCurve},
        {"divergence_curve", ActionType::DivergenceCurve},
        {"cross_section", ActionType::CrossSection},
        {"compare", ActionType::Compare},
    };
    const auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

std::optional<analysis::SeriesKind> series_kind(const std::string& name) {
    if (name == "slippage") return analysis::SeriesKind::Slippage;
    if (name == "divergence_loss") return analysis::SeriesKind::DivergenceLoss;
    if (name == "cross_section") return analysis::SeriesKind::ConservationCrossSection;
    return std::nullopt;
}

void check_grid(Reader& rd, analysis::SeriesKind kind, const std::vector<double>& grid, const std::string& where) {
    if (grid.empty()) rd.error(where, "grid is empty");
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) {
            rd.error(where, "grid must be strictly increasing");
            break;
        }
    }
    const auto bad = [&](auto pred) { return std::any_of(grid.begin(), grid.end(), pred); };
    switch (kind) {
        case analysis::SeriesKind::Slippage:
            if (bad([](double g) { return !(g > 0.0 && g <= 0.95); })) rd.error(where, "normalized trade sizes must lie in (0, 0.95]");
            break;
        case analysis::SeriesKind::DivergenceLoss:
            if (bad([](double g) { return !(g > -1.0); })) rd.error(where, "price shifts must exceed -1");
            break;
        case analysis::SeriesKind::ConservationCrossSection:
            if (bad([](double g) { return !(g > 0.0); })) rd.error(where, "reserve grid must be positive");
            break;
    }
}

analysis::SeriesKind kind_of(const Action& a) {
    switch (a.type) {
        case ActionType::SlippageCurve: return analysis::SeriesKind::Slippage;
        case ActionType::DivergenceCurve: return analysis::SeriesKind::DivergenceLoss;
        case ActionType::CrossSection: return analysis::SeriesKind::ConservationCrossSection;
        default: return a.analysis;
    }
}

// Asset indices, PMM applicability and grids against one referenced pool.
void check_against_pool(Reader& rd, const Action& a, const PoolState& pool, const std::string& where) {
    const std::size_t n = pool.size();
    const auto kind = kind_of(a);
    const bool series = a.type != ActionType::Swap && a.type != ActionType::AddLiquidity;
    if (a.type == ActionType::AddLiquidity) return;
    if (series && kind == analysis::SeriesKind::DivergenceLoss) {
        if (pool.spec.family == Family::PMM) rd.error(where, "oracle-anchored PMM pools carry no divergence loss");
        if (a.output_asset == 0 || a.output_asset >= n) rd.error(where, "shifted asset must be a non-numeraire asset index below " + std::to_string(n));
        return;
    }
    if (a.input_asset >= n || a.output_asset >= n) rd.error(where, "asset index out of range for a pool of " + std::to_string(n) + " assets");
    if (a.input_asset == a.output_asset) rd.error(where, "input and output asset coincide");
    if (a.type == ActionType::Swap && a.input_asset < n && !(a.amount > -pool.reserves[a.input_asset])) {
        rd.error(where, "swap would deplete the input reserve");
    }
}

void read_actions(Reader& rd, const json& doc, Scenario& sc, const std::map<std::string, PoolState>& states) {
    const auto it = doc.find("actions");
    if (it == doc.end()) return;
    if (!it->is_array()) {
        rd.error("actions", "expected an array");
        return;
    }
    for (std::size_t k = 0; k < it->size(); ++k) {
        const json& j = (*it)[k];
        std::string where = "actions[" + std::to_string(k) + "]";
        if (!j.is_object()) {
            rd.error(where, "expected an object");
            continue;
        }
        const auto type_name = rd.string(j, "type", where, true);
        if (!type_name) continue;
        const auto type = action_type(*type_name);
        if (!type) {
            rd.error(where + ".type", "unknown action '" + *type_name + "'");
            continue;
        }
        where += " (" + *type_name + ")";
        Action a;
        a.type = *type;
        bool ok = true;

        if (a.type == ActionType::Compare) {
            const auto pools = j.find("pools");
            if (pools == j.end() || !pools->is_array() || pools->empty() ||
                !std::all_of(pools->begin(), pools->end(), [](const json& v) { return v.is_string(); })) {
                rd.error(where, "'pools' must be a non-empty array of pool ids");
                ok = false;
            } else {
                for (const auto& v : *pools) a.pools.push_back(v.get<std::string>());
            }
            const auto name = rd.string(j, "analysis", where, false).value_or("slippage");
            if (const auto kind = series_kind(name)) {
                a.analysis = *kind;
            } else {
                rd.error(where + ".analysis", "expected 'slippage', 'divergence_loss' or 'cross_section'");
                ok = false;
            }
        } else {
            const auto pool = rd.string(j, "pool", where, true);
            if (pool) a.pools.push_back(*pool);
            ok = ok && pool.has_value();
        }

        const bool divergence = kind_of(a) == analysis::SeriesKind::DivergenceLoss &&
                                (a.type == ActionType::DivergenceCurve || a.type == ActionType::Compare);
        const auto input = rd.index(j, "input", where, 0);
        const auto output = rd.index(j, divergence && j.contains("asset") ? "asset" : "output", where, 1);
        ok = ok && input && output;
        if (input) a.input_asset = *input;
        if (output) a.output_asset = *output;

        if (a.type == ActionType::Swap) {
            const auto amount = rd.number(j, "amount", where, true);
            ok = ok && amount;
            if (amount) a.amount = *amount;
        } else if (a.type == ActionType::AddLiquidity) {
            const auto fraction = rd.number(j, "fraction", where, true);
            ok = ok && fraction;
            if (fraction) {
                a.fraction = *fraction;
                if (!(a.fraction > -1.0)) rd.error(where, "fraction must exceed -1");
            }
        } else {
            a.grid = rd.grid(j, where);
            if (j.contains("grid") && !a.grid) ok = false;
            if (a.grid) check_grid(rd, kind_of(a), *a.grid, where + ".grid");
        }

        for (const auto& id : a.pools) {
            const auto st = states.find(id);
            if (st == states.end()) {
                const bool declared = std::any_of(sc.pools.begin(), sc.pools.end(), [&](const auto& p) { return p.id == id; });
                if (!declared) rd.error(where, "undefined pool id '" + id + "'");
                ok = false;
            } else if (ok) {
                check_against_pool(rd, a, st->second, where + " on pool '" + id + "'");
            }
        }
        if (ok) sc.actions.push_back(std::move(a));
    }
}

void read_output(Reader& rd, const json& doc, Scenario& sc) {
    const auto it = doc.find("output");
    if (it == doc.end()) return;
    if (!it->is_object()) {
        rd.error("output", "expected an object");
        return;
    }
    if (const auto dir = rd.string(*it, "directory", "output", false)) sc.output_directory = *dir;
    if (const auto stem = rd.string(*it, "stem", "output", false)) {
        if (valid_identifier(*stem)) {
            sc.stem = *stem;
        } else {
            rd.error("output.stem", "stem may contain only letters, digits, '_', '-' and '.'");
        }
    }
}

std::string sanitize_stem(std::string_view stem) {
    std::string out(stem);
    for (char& c : out) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
    }
    return out.empty() ? "scenario" : out;
}

// ---- execution ----

std::string two_digits(std::size_t k) {
    return (k < 10 ? "0" : "") + std::to_string(k);
}

class Runner {
public:
    Runner(const Scenario& sc, const RunOptions& opts)
        : sc_(sc), dir_(opts.output_directory.value_or(sc.output_directory)), eval_{std::max(1u, opts.parallelism)} {
        for (const auto& def : sc.pools) {
            pools_.emplace(def.id, make_pool(def.spec, def.reserves, def.oracle_price, def.targets));
        }
    }

    RunResult run() {
        fs::create_directories(dir_);
        for (std::size_t k = 0; k < sc_.actions.size(); ++k) {
            const Action& a = sc_.actions[k];
            try {
                execute(k + 1, a);
            } catch (const Error& e) {
                result_.failures.push_back("action " + std::to_string(k + 1) + " (" + std::string(to_string(a.type)) +
                                           "): " + e.what());
            }
        }
        write_file(dir_ / (sc_.stem + "_receipts.log"), receipts_.str());
        if (!result_.failures.empty()) {
            std::string manifest;
            for (const auto& f : result_.failures) manifest += f + "\n";
            write_file(dir_ / (sc_.stem + "_failures.log"), manifest);
            result_.exit_code = kExitSolverFailure;
        }
        return std::move(result_);
    }

private:
    void execute(std::size_t number, const Action& a) {
        switch (a.type) {
            case ActionType::Swap: {
                PoolState& pool = pools_.at(a.pools[0]);
                auto res = apply_swap(pool, a.input_asset, a.output_asset, a.amount);
                log_receipt(number, a, res.receipt);
                receipts_ << "  x_in=" << format_full(res.outcome.x_in) << " x_out=" << format_full(res.outcome.x_out)
                          << '\n';
                pool = std::move(res.state);
                return;
            }
            case ActionType::AddLiquidity: {
                PoolState& pool = pools_.at(a.pools[0]);
                auto res = add_liquidity_proportional(pool, a.fraction);
                log_receipt(number, a, res.receipt);
                receipts_ << "  fraction=" << format_full(a.fraction) << '\n';
                pool = std::move(res.state);
                return;
            }
            default: break;
        }

        const auto kind = kind_of(a);
        analysis::ComparisonConfig config;
        config.analyses = {kind};
        config.input_asset = a.input_asset;
        config.output_asset = a.output_asset;
        for (const auto& id : a.pools) config.pools.push_back({id, pools_.at(id)});
        if (a.grid) {
            config.trade_grid = config.rho_grid = config.reserve_grid = *a.grid;
        } else {
            const double r = config.pools.front().state.reserves.at(a.input_asset);
            config.reserve_grid = Reader::log_space(0.1 * r, 10.0 * r, kDefaultGridPoints);
        }
        for (const auto& series : analysis::compare_protocols(config, eval_)) {
            const std::string name = sc_.stem + "_" + two_digits(number) + "_" + std::string(analysis::to_string(series.kind)) +
                                     "_" + series.pool_id + ".csv";
            write_file(dir_ / name, to_csv(series));
            for (const auto& f : series.failures) {
                result_.failures.push_back(name + ": point " + std::to_string(f.index) + " x=" + format_full(f.x) + ": " +
                                           f.message);
            }
        }
    }

    void log_receipt(std::size_t number, const Action& a, const TransitionReceipt& r) {
        receipts_ << "action " << number << ' ' << to_string(a.type) << " pool=" << a.pools[0]
                  << " kind=" << to_string(r.kind) << '\n';
        for (const auto& c : r.checks) {
            receipts_ << "  rule=" << c.rule << " deviation=" << format_full(c.deviation)
                      << " tolerance=" << format_shortest(c.tolerance) << ' ' << (c.passed ? "pass" : "FAIL") << '\n';
        }
        if (!r.passed()) result_.failures.push_back("action " + std::to_string(number) + ": transition rule check failed");
    }

    static std::string to_csv(const analysis::CurveSeries& s) {
        std::string out = "x,y,pool,protocol,hyperparameters\n";
        const std::string tail = "," + s.pool_id + "," + s.protocol + "," + s.hyperparameters + "\n";
        for (std::size_t k = 0; k < s.x_values.size(); ++k) {
            if (!std::isfinite(s.y_values[k])) continue;
            out += format_full(s.x_values[k]) + "," + format_full(s.y_values[k]) + tail;
        }
        return out;
    }

    void write_file(const fs::path& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << content;
        if (!f) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
        result_.files.push_back(path);
    }

    const Scenario& sc_;
    fs::path dir_;
    analysis::EvalOptions eval_;
    std::map<std::string, PoolState> pools_;
    std::ostringstream receipts_;
    RunResult result_;
};

}  // namespace

std::string_view to_string(ActionType type) {
    switch (type) {
        case ActionType::Swap: return "swap";
        case ActionType::AddLiquidity: return "add_liquidity";
        case ActionType::SlippageCurve: return "slippage_curve";
        case ActionType::DivergenceCurve: return "divergence_curve";
        case ActionType::CrossSection: return "cross_section";
        case ActionType::Compare: return "compare";
    }
    return "unknown";
}

LoadResult load_scenario_text(std::string_view text, std::string_view default_stem) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    LoadResult out;
    out.scenario.stem = sanitize_stem(default_stem);
    Reader rd(out.report);
    if (!doc.is_object()) {
        rd.error("scenario", "expected a JSON object at the top level");
        return out;
    }
    std::map<std::string, PoolState> states;
    read_pools(rd, doc, out.scenario, states);
    read_actions(rd, doc, out.scenario, states);
    read_output(rd, doc, out.scenario);
    return out;
}

LoadResult load_scenario(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot read " + path.string());
    std::ostringstream buf;
    buf << f.rdbuf();
    return load_scenario_text(buf.str(), path.stem().string());
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    return Runner(scenario, options).run();
}

namespace {

std::optional<LoadResult> load_for_cli(const fs::path& path, std::ostream& err, int& code) {
    try {
        auto loaded = load_scenario(path);
        if (!loaded.report.ok()) {
            for (const auto& e : loaded.report.errors) err << "error: " << e << '\n';
            code = kExitValidationError;
            return std::nullopt;
        }
        return loaded;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        code = kExitParseError;
        return std::nullopt;
    }
}

}  // namespace

int run_scenario_file(const fs::path& path, const RunOptions& options, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    const auto loaded = load_for_cli(path, err, code);
    if (!loaded) return code;
    RunResult result;
    try {
        result = run_scenario(loaded->scenario, options);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }
    for (const auto& f : result.files) out << "wrote " << f.string() << '\n';
    for (const auto& f : result.failures) err << "failure: " << f << '\n';
    return result.exit_code;
}

int validate_scenario_file(const fs::path& path, std::ostream& out, std::ostream& err) {
    int code = kExitOk;
    const auto loaded = load_for_cli(path, err, code);
    if (!loaded) return code;
    out << "ok: " << loaded->scenario.pools.size() << " pools, " << loaded->scenario.actions.size() << " actions\n";
    return kExitOk;
}

}  // namespace amm::scenario
