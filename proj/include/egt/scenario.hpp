#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "egt/analysis.hpp"

namespace egt {

struct ControllerConfig {
    bool automatic = true;
    bool prefer_conformity = false;
    std::optional<double> p;
    std::optional<double> q;
    // explicit mode
    std::optional<ControlMatrix> matrix;
    std::optional<RateFamily> family;
    std::optional<double> delta;
    std::optional<double> xbar;
    int sign = +1;
};

struct OutputConfig {
    std::string trajectory_path = "trajectory.csv";
    std::string metrics_path = "metrics.json";
};

struct SweepConfig {
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    unsigned jobs = 0; // 0 = hardware concurrency
};

/// One scenario file: sections [payoff] [problem] [controller] [initial]
/// [integrator] [output] ([sweep]), key = value lines, # comments.
struct ScenarioConfig {
    PayoffMatrix payoff;
    std::optional<ProblemSpec> problem;
    ControllerConfig controller;
    SystemState initial{0.5, 0.01};
    IntegratorConfig integrator;
    OutputConfig output;
    SweepConfig sweep;
};

/// Parses a scenario file; unknown sections or keys are rejected with
/// file:line context (ConfigError).
ScenarioConfig parse_scenario_file(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin);

/// Target value of the configured problem (consensus targets as 0/1).
double problem_target(const ProblemSpec& problem);

struct ResolvedController {
    ControllerSpec spec;
    std::optional<DesignResult> design; // present when the factory chose it
};

/// Auto mode runs the design factory (which enforces the impossibility
/// guards); explicit mode assembles the requested matrix and rate.
ResolvedController resolve_controller(const ScenarioConfig& cfg);

/// Shortest-of-12-significant-digits decimal rendering used by every CSV.
std::string format_number(double v);

/// CSV with header `t,x,g`, one row per recorded sample, LF endings.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Flat JSON object with keys
/// x_final,g_final,J_g,g_max,converged,settle_time,terminal_reason.
void write_metrics_json(std::ostream& os, const RunMetrics& m, TerminalReason reason);

/// Long-format CSV `p,q,J_g,g_max,g_final,x_final,converged,settle_time`.
void write_sweep_csv(std::ostream& os, const SweepResult& result);

/// Controller JSON: matrix, rate family, parameters, predicted steady gain
/// when applicable, and the condition report.
std::string design_json(const DesignResult& result);

} // namespace egt
