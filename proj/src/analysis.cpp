#include "egt/analysis.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace egt {

RunMetrics metrics(const Trajectory& traj, double target, double eps_x) {
    if (traj.samples.empty()) throw DomainError("metrics of an empty trajectory");
    RunMetrics out;
    const auto& ss = traj.samples;
    for (std::size_t i = 0; i < ss.size(); ++i) {
        out.g_max = std::max(out.g_max, ss[i].state.g);
        if (i + 1 < ss.size())
            out.J_g += 0.5 * (ss[i + 1].t - ss[i].t) * (ss[i].state.g + ss[i + 1].state.g);
    }
    out.g_final = ss.back().state.g;
    out.x_final = ss.back().state.x;

    // scan from the end for the last sample outside the target band
    std::size_t last_bad = ss.size();
    for (std::size_t i = ss.size(); i-- > 0;) {
        if (std::abs(ss[i].state.x - target) >= eps_x) {
            last_bad = i;
            break;
        }
    }
    if (last_bad == ss.size()) {
        out.converged = true;
        out.settle_time = ss.front().t;
    } else if (last_bad + 1 < ss.size()) {
        out.converged = true;
        out.settle_time = ss[last_bad + 1].t;
    }
    return out;
}

AdaptationRate make_rate(const RateShape& shape, double p, double q) {
    switch (shape.family) {
    case RateFamily::PowerShifted: return {PowerShifted{p, q, shape.delta}};
    case RateFamily::Power: return {Power{p, q}};
    case RateFamily::PowerShiftedMirror: return {PowerShiftedMirror{p, q, shape.delta}};
    case RateFamily::PowerMirror: return {PowerMirror{p, q}};
    case RateFamily::Proportional: return {Proportional{p, shape.xbar, shape.sign}};
    case RateFamily::Atan: return {Atan{shape.xbar}};
    case RateFamily::Cubic: return {Cubic{shape.xbar}};
    }
    throw DomainError("unknown rate family");
}

SweepResult sweep(const SweepScenario& scenario, const std::vector<double>& p_grid,
                  const std::vector<double>& q_grid, unsigned parallelism) {
    if (p_grid.empty() || q_grid.empty()) throw DomainError("sweep grids must be non-empty");
    SweepResult result;
    result.p_grid = p_grid;
    result.q_grid = q_grid;
    result.cells.resize(p_grid.size() * q_grid.size());

    const auto run_cell = [&](std::size_t idx) {
        const std::size_t pi = idx / q_grid.size();
        const std::size_t qi = idx % q_grid.size();
        SweepCell cell;
        cell.p = p_grid[pi];
        cell.q = q_grid[qi];
        ControllerSpec spec{scenario.matrix, make_rate(scenario.shape, cell.p, cell.q)};
        const Trajectory traj = integrate_controlled(scenario.payoff, spec, scenario.s0, scenario.cfg);
        cell.reason = traj.reason;
        cell.metrics = metrics(traj, scenario.target, scenario.eps_x);
        if (traj.reason == TerminalReason::StepFailure || traj.reason == TerminalReason::GainCapReached)
            cell.metrics.converged = false;
        result.cells[idx] = cell;
    };

    unsigned workers = parallelism == 0 ? std::thread::hardware_concurrency() : parallelism;
    workers = std::max(1u, std::min<unsigned>(workers, result.cells.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
        return result;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < result.cells.size(); i = next.fetch_add(1))
                run_cell(i);
        });
    }
    for (auto& th : pool) th.join();
    return result;
}

const std::vector<double>& default_p_grid() {
    static const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    return grid;
}

const std::vector<double>& default_q_grid() {
    static const std::vector<double> grid{0.5, 1.0, 2.0, 3.0, 4.0};
    return grid;
}

} // namespace egt
