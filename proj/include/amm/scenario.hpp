#pragma once

// Declarative scenarios: pools, an ordered list of actions, and an output
// location. Loading separates malformed input (parse errors) from input that
// parses but describes an invalid scenario (validation errors).

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amm/analysis.hpp"
#include "amm/pool.hpp"

namespace amm::scenario {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParseError = 1;
inline constexpr int kExitValidationError = 2;
inline constexpr int kExitSolverFailure = 3;

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PoolDefinition {
    std::string id;
    ProtocolSpec spec;
    std::vector<double> reserves;
    std::optional<double> oracle_price;
    std::optional<std::array<double, 2>> targets;
};

enum class ActionType { Swap, AddLiquidity, SlippageCurve, DivergenceCurve, CrossSection, Compare };

std::string_view to_string(ActionType type);

struct Action {
    ActionType type = ActionType::Swap;
    std::vector<std::string> pools;  // one entry except for Compare
    std::size_t input_asset = 0;
    std::size_t output_asset = 1;
    double amount = 0.0;    // Swap
    double fraction = 0.0;  // AddLiquidity
    analysis::SeriesKind analysis = analysis::SeriesKind::Slippage;  // Compare
    std::optional<std::vector<double>> grid;
};

struct Scenario {
    std::vector<PoolDefinition> pools;
    std::vector<Action> actions;
    std::filesystem::path output_directory = "out";
    std::string stem = "scenario";
};

struct ValidationReport {
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
};

struct LoadResult {
    Scenario scenario;
    ValidationReport report;
};

/// Throws ParseError when the text is not a JSON document.
LoadResult load_scenario_text(std::string_view text, std::string_view default_stem = "scenario");
/// Throws ParseError when the file cannot be read or parsed.
LoadResult load_scenario(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::filesystem::path> output_directory;
    unsigned parallelism = 1;
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> failures;
};

/// Executes a validated scenario and writes its CSV files and receipt log.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Command-line entry points; messages go to `out` and `err`, the return
/// value is the process exit status.
int run_scenario_file(const std::filesystem::path& path, const RunOptions& options, std::ostream& out, std::ostream& err);
int validate_scenario_file(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

}  // namespace amm::scenario
