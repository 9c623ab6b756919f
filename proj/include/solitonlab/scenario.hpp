#pragma once

// Scenario files: a soliton, a list of audit tasks and their numeric
// parameters. Running one produces a deterministic report document plus
// plot-ready CSV tables.

#include "solitonlab/soliton.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace solitonlab {

inline constexpr int kReportSchema = 1;

/// Task names in report merge order.
const std::vector<std::string>& task_names();

enum class Resolution
{
    Low,
    Default,
    High,
};

Resolution resolution_from_string(const std::string& name);

struct Tolerances
{
    double soliton = 1e-9;    ///< soliton equation residual (exact entries)
    double identities = 1e-6; ///< trace, gradient and Laplacian identities (exact entries)
    double bianchi = 1e-5;    ///< |div Ric - dR/2|
    double curvature = 1e-8;  ///< computed vs closed-form curvature
    double riccati = 1e-5;    ///< Riccati slack
};

struct ScenarioParameters
{
    int samples = 100;
    std::uint64_t seed = 1;
    std::vector<double> r_grid;          ///< volume radii, strictly increasing
    double h = 1e-3;
    int sphere_level = 0;
    int directions = 16;                 ///< rays for riccati and schouten-bounds
    double r_max = 4.0;                  ///< ray length for riccati and schouten-bounds
    std::optional<double> delta;         ///< lower bound for rho R in the weighted growth bound
    int spectral_N = 0;
    double spectral_L = 0.0;
    Tolerances tolerances;
};

struct Scenario
{
    std::string name;
    SolitonInstance soliton;
    std::vector<std::string> tasks; ///< sorted by merge order, unique
    ScenarioParameters params;
    std::string output;             ///< empty means out/<name>
};

/// Validates against the scenario schema; errors are ConfigError with the
/// JSON pointer of the offending field.
Scenario scenario_from_json(const nlohmann::json& j);
/// Reads and validates a file; unreadable or malformed JSON is a ConfigError at "".
Scenario load_scenario(const std::filesystem::path& path);

/// Low halves and high doubles the step, sphere grid level and spectral grid.
void apply_resolution(Scenario& s, Resolution r);

struct Finding
{
    std::string task;
    std::string message;
    nlohmann::json data;
};

struct TaskOutcome
{
    std::string task;
    std::string status; ///< "pass", "fail", "finding", "not-applicable" or "error"
    nlohmann::json report;
    std::vector<std::string> failures;
    std::vector<Finding> findings;
    std::vector<std::pair<std::string, std::string>> tables; ///< file name, CSV text
    std::string summary; ///< one-line headline for the console table
};

struct RunResult
{
    std::string scenario;
    std::vector<TaskOutcome> tasks;
    int exit_code = 0; ///< 0 when every hard check passed, 1 otherwise

    /// {"schema": 1, ...} with sorted keys and no timing data.
    nlohmann::json report() const;
    void write_summary(std::ostream& out) const;
};

struct RunOptions
{
    bool parallel = false; ///< run independent tasks concurrently
    int workers = 0;       ///< 0 means hardware concurrency
    std::ostream* log = nullptr; ///< timestamped progress lines
};

RunResult run_scenario(const Scenario& s, const RunOptions& opt = {});

/// Writes report.json and every task table into `dir`.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

} // namespace solitonlab
