#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "surfstokes/dynamics.hpp"

namespace surfstokes {

/// Everything a config file can set.
struct RunConfig {
    SimConfig sim;
    std::string scenario = "all";
    std::string out_dir = "surfstokes_out";
};

/// Scenario names in execution order.
const std::vector<std::string>& scenario_names();

/// Line-oriented `key = value` parser; '#' starts a comment. Throws
/// std::invalid_argument whose message names the offending line.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

struct CriterionRow {
    std::string name;
    double measured = 0.0;
    std::string relation;  ///< "<=", ">=" or "=="
    double threshold = 0.0;
    bool passed = false;
};

CriterionRow make_row(std::string name, double measured, std::string relation, double threshold);

struct ScenarioReport {
    std::string scenario;
    std::string surface;
    Grid grid;
    std::vector<CriterionRow> rows;
    double wall_seconds = 0.0;
    std::string error;  ///< set if the scenario aborted

    bool passed() const;
};

/// Runs one scenario (or "all" through run_scenarios). CSV files go to
/// out_dir/<scenario>/ unless out_dir is empty. Exceptions inside a scenario
/// become a failed report carrying the message.
ScenarioReport run_scenario(const std::string& name, const RunConfig& config);
std::vector<ScenarioReport> run_scenarios(const RunConfig& config);

/// Parts of the convergence scenario, separable for callers with their own
/// grid choices.
ScenarioReport convergence_moderate(const RunConfig& config);
ScenarioReport convergence_small_data(const RunConfig& config);
/// Geometry checks only (part of "identities").
ScenarioReport geometry_checks(const RunConfig& config);

/// Header line then one line per row; numbers printed with 17 significant
/// digits. Throws std::invalid_argument for ragged rows and
/// std::runtime_error on I/O failure.
void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows);

/// summary.csv and report.txt for a scenario.
void write_report(const std::filesystem::path& dir, const ScenarioReport& report);

/// Human readable block for stdout.
std::string format_report(const ScenarioReport& report);

}  // namespace surfstokes
