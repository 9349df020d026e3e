#pragma once

#include <optional>
#include <vector>

#include "egt/dynamics.hpp"

namespace egt {

struct RunMetrics {
    double J_g = 0.0;    // trapezoidal integral of g over the run
    double g_max = 0.0;  // max of g over samples
    double g_final = 0.0;
    double x_final = 0.0;
    bool converged = false;
    /// First sample time after which |x - target| stays below eps_x through
    /// the end of the run; absent when the run ends outside the band.
    std::optional<double> settle_time;
};

/// Pure function of the recorded samples.
RunMetrics metrics(const Trajectory& traj, double target, double eps_x);

enum class RateFamily { PowerShifted, Power, PowerShiftedMirror, PowerMirror, Proportional, Atan, Cubic };

/// Shape parameters of a rate family with (p, q) left free for sweeps.
struct RateShape {
    RateFamily family = RateFamily::PowerShifted;
    double delta = 0.4; // sign-flip point of the shifted power families
    double xbar = 0.5;  // anchor of proportional/atan/cubic
    int sign = +1;
};

AdaptationRate make_rate(const RateShape& shape, double p, double q);

struct SweepScenario {
    PayoffMatrix payoff;
    ControlMatrix matrix = ControlMatrix::G3;
    RateShape shape;
    SystemState s0{0.7, 0.01};
    IntegratorConfig cfg;
    double target = 0.0;
    double eps_x = 1e-3;
};

struct SweepCell {
    double p = 0.0;
    double q = 0.0;
    RunMetrics metrics;
    TerminalReason reason = TerminalReason::HorizonReached;
};

struct SweepResult {
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    /// Row-major: cell (i,j) = cells[i * q_grid.size() + j] for p_grid[i],
    /// q_grid[j]; ordering independent of the execution schedule.
    std::vector<SweepCell> cells;

    const SweepCell& at(std::size_t pi, std::size_t qi) const {
        return cells[pi * q_grid.size() + qi];
    }
};

/// Runs the |p_grid| x |q_grid| simulations on up to `parallelism` threads.
/// Cell failures (step failure, gain cap) are recorded, never thrown.
SweepResult sweep(const SweepScenario& scenario, const std::vector<double>& p_grid,
                  const std::vector<double>& q_grid, unsigned parallelism = 0);

/// Default grid of the effort/peak-gain and final-gain studies.
const std::vector<double>& default_p_grid();
const std::vector<double>& default_q_grid();

} // namespace egt
