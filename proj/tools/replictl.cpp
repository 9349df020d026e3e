// replictl: classify games, simulate gain-controlled replicator dynamics,
// synthesize certified controllers, and run (p,q) sweep studies.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "egt/scenario.hpp"
#include "egt/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitDesign = 3;
constexpr int kExitIntegration = 4;

void print_classification(const egt::PayoffMatrix& m) {
    const egt::GameClass cls = egt::classify(m);
    switch (cls.tag) {
    case egt::GameClassTag::Coordination:
        std::printf("coordination, x* = %s\n", egt::format_number(*cls.mixed_ne).c_str());
        break;
    case egt::GameClassTag::DominantAction1:
        std::printf("dominant-strategy, NE = all action 1\n");
        break;
    case egt::GameClassTag::DominantAction2:
        std::printf("dominant-strategy, NE = all action 2\n");
        break;
    case egt::GameClassTag::AntiCoordination:
        std::printf("anti-coordination, x* = %s\n", egt::format_number(*cls.mixed_ne).c_str());
        break;
    case egt::GameClassTag::Degenerate:
        std::printf("degenerate (a = c or d = b), outside the strict classification\n");
        return;
    }
    std::printf("uncontrolled limits:");
    for (double x0 : {0.1, 0.25, 0.5, 0.75, 0.9})
        std::printf("  x0=%s -> %s", egt::format_number(x0).c_str(),
                    egt::format_number(egt::uncontrolled_limit(m, x0)).c_str());
    std::printf("\n");
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream os(path, std::ios::binary); // LF endings everywhere
    if (!os) throw egt::ConfigError(path + ": cannot open for writing");
    writer(os);
}

int run_simulate(const std::string& config_path, bool force) {
    egt::ScenarioConfig cfg = egt::parse_scenario_file(config_path);
    if (!cfg.problem)
        throw egt::ConfigError(config_path + ": simulate needs a [problem] section");
    const egt::ResolvedController resolved = egt::resolve_controller(cfg);
    const auto verdict =
        egt::guard_impossible(*cfg.problem, resolved.spec, egt::classify(cfg.payoff));
    if (verdict.rejected && !force) throw egt::ImpossibleDesignError(verdict.message);

    const double target = egt::problem_target(*cfg.problem);
    cfg.integrator.convergence.target_x = target;
    const egt::Trajectory traj =
        egt::integrate_controlled(cfg.payoff, resolved.spec, cfg.initial, cfg.integrator);
    egt::RunMetrics met = egt::metrics(traj, target, cfg.integrator.convergence.eps_x);
    if (traj.reason == egt::TerminalReason::StepFailure ||
        traj.reason == egt::TerminalReason::GainCapReached)
        met.converged = false;

    write_file(cfg.output.trajectory_path,
               [&](std::ostream& os) { egt::write_trajectory_csv(os, traj); });
    write_file(cfg.output.metrics_path,
               [&](std::ostream& os) { egt::write_metrics_json(os, met, traj.reason); });
    std::printf("%s: terminal %s at t=%s, x=%s, g=%s\n", config_path.c_str(),
                egt::to_string(traj.reason), egt::format_number(traj.t_end).c_str(),
                egt::format_number(met.x_final).c_str(),
                egt::format_number(met.g_final).c_str());
    return traj.reason == egt::TerminalReason::StepFailure ? kExitIntegration : kExitOk;
}

int run_design(const std::string& config_path) {
    egt::ScenarioConfig cfg = egt::parse_scenario_file(config_path);
    if (!cfg.problem) throw egt::ConfigError(config_path + ": design needs a [problem] section");
    egt::DesignOptions opts;
    opts.p = cfg.controller.p;
    if (cfg.controller.q) opts.q = *cfg.controller.q;
    opts.prefer_conformity = cfg.controller.prefer_conformity;
    const egt::DesignResult result =
        egt::design(egt::classify(cfg.payoff), *cfg.problem, opts, &cfg.payoff);
    std::fputs(egt::design_json(result).c_str(), stdout);
    return kExitOk;
}

int run_sweep(const std::string& config_path, std::string p_grid_arg, std::string q_grid_arg,
              unsigned jobs, const std::string& out_path) {
    egt::ScenarioConfig cfg = egt::parse_scenario_file(config_path);
    if (!cfg.problem) throw egt::ConfigError(config_path + ": sweep needs a [problem] section");
    if (cfg.controller.automatic || !cfg.controller.matrix || !cfg.controller.family)
        throw egt::ConfigError(config_path +
                               ": sweep needs an explicit [controller] (matrix + rate family)");

    const auto parse_grid_arg = [](const std::string& arg) {
        std::vector<double> grid;
        std::stringstream ss(arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                grid.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw egt::ConfigError("invalid grid element '" + item + "'");
            }
        }
        if (grid.empty()) throw egt::ConfigError("empty grid argument");
        return grid;
    };

    egt::SweepScenario scenario;
    scenario.payoff = cfg.payoff;
    scenario.matrix = *cfg.controller.matrix;
    scenario.shape.family = *cfg.controller.family;
    if (cfg.controller.delta) scenario.shape.delta = *cfg.controller.delta;
    if (cfg.controller.xbar) scenario.shape.xbar = *cfg.controller.xbar;
    scenario.shape.sign = cfg.controller.sign;
    scenario.s0 = cfg.initial;
    scenario.cfg = cfg.integrator;
    scenario.target = egt::problem_target(*cfg.problem);
    scenario.cfg.convergence.target_x = scenario.target;
    scenario.eps_x = cfg.integrator.convergence.eps_x;

    std::vector<double> p_grid = !p_grid_arg.empty() ? parse_grid_arg(p_grid_arg)
                                 : !cfg.sweep.p_grid.empty() ? cfg.sweep.p_grid
                                                             : egt::default_p_grid();
    std::vector<double> q_grid = !q_grid_arg.empty() ? parse_grid_arg(q_grid_arg)
                                 : !cfg.sweep.q_grid.empty() ? cfg.sweep.q_grid
                                                             : egt::default_q_grid();
    const unsigned workers = jobs != 0 ? jobs : cfg.sweep.jobs;

    const egt::SweepResult result = egt::sweep(scenario, p_grid, q_grid, workers);
    write_file(out_path, [&](std::ostream& os) { egt::write_sweep_csv(os, result); });
    std::printf("%zu cells -> %s\n", result.cells.size(), out_path.c_str());
    return kExitOk;
}

int run_verify(const std::string& config_path) {
    egt::ScenarioConfig cfg = egt::parse_scenario_file(config_path);
    const egt::ResolvedController resolved = egt::resolve_controller(cfg);

    const auto reports = egt::equilibria_controlled(cfg.payoff, resolved.spec);
    std::printf("equilibria of the controlled system:\n");
    for (const auto& r : reports) {
        std::printf("  (x=%s, g=%s)  eigenvalues %s%+gi, %s%+gi  [%s]\n",
                    egt::format_number(r.point.x).c_str(), egt::format_number(r.point.g).c_str(),
                    egt::format_number(r.eig1.real()).c_str(), r.eig1.imag(),
                    egt::format_number(r.eig2.real()).c_str(), r.eig2.imag(),
                    egt::to_string(r.stability));
    }

    if (cfg.problem && std::holds_alternative<egt::SetPointRegulation>(cfg.problem->kind)) {
        const auto* pr = std::get_if<egt::Proportional>(&resolved.spec.rate.v);
        if (pr) {
            egt::IntegratorConfig icfg = cfg.integrator;
            icfg.convergence.target_x = egt::problem_target(*cfg.problem);
            const egt::Trajectory traj =
                egt::integrate_controlled(cfg.payoff, resolved.spec, cfg.initial, icfg);
            const egt::LyapunovAudit audit =
                egt::audit_lyapunov(traj, cfg.payoff, pr->xbar, pr->p);
            const double slack = 10.0 * icfg.rel_tol;
            std::printf("energy audit: max increase %s (slack %s) -> %s\n",
                        egt::format_number(audit.max_increase).c_str(),
                        egt::format_number(slack).c_str(),
                        audit.max_increase <= slack ? "non-increasing" : "VIOLATION");
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-gain equilibrium selection for replicator dynamics"};
    app.require_subcommand(1);

    std::vector<double> payoff_args;
    auto* cmd_classify = app.add_subcommand("classify", "classify a 2x2 game: a b c d");
    cmd_classify->add_option("payoff", payoff_args, "payoff entries a b c d")
        ->expected(4)
        ->required();

    std::string config_path;
    bool force = false;
    auto* cmd_simulate = app.add_subcommand("simulate", "integrate a scenario file");
    cmd_simulate->add_option("-c,--config", config_path, "scenario file")->required();
    cmd_simulate->add_flag("--force", force, "run even if the impossibility guard rejects");

    std::string design_config;
    auto* cmd_design = app.add_subcommand("design", "synthesize a certified controller");
    cmd_design->add_option("-c,--config", design_config, "scenario file")->required();

    std::string sweep_config, p_grid_arg, q_grid_arg, sweep_out = "sweep.csv";
    unsigned jobs = 0;
    auto* cmd_sweep = app.add_subcommand("sweep", "run a (p,q) grid of simulations");
    cmd_sweep->add_option("-c,--config", sweep_config, "scenario file")->required();
    cmd_sweep->add_option("--p-grid", p_grid_arg, "comma-separated p values");
    cmd_sweep->add_option("--q-grid", q_grid_arg, "comma-separated q values");
    cmd_sweep->add_option("-j,--jobs", jobs, "worker threads (0 = all cores)");
    cmd_sweep->add_option("-o,--output", sweep_out, "output CSV path");

    std::string verify_config;
    auto* cmd_verify = app.add_subcommand("verify", "equilibrium and energy report");
    cmd_verify->add_option("-c,--config", verify_config, "scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        if (cmd_classify->parsed()) {
            print_classification(
                {payoff_args[0], payoff_args[1], payoff_args[2], payoff_args[3]});
            return kExitOk;
        }
        if (cmd_simulate->parsed()) return run_simulate(config_path, force);
        if (cmd_design->parsed()) return run_design(design_config);
        if (cmd_sweep->parsed()) return run_sweep(sweep_config, p_grid_arg, q_grid_arg, jobs, sweep_out);
        if (cmd_verify->parsed()) return run_verify(verify_config);
    } catch (const egt::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    } catch (const egt::ImpossibleDesignError& e) {
        std::fprintf(stderr, "design rejected: %s\n", e.what());
        return kExitDesign;
    } catch (const egt::MissingKnowledgeError& e) {
        std::fprintf(stderr, "design rejected (missing knowledge): %s\n", e.what());
        return kExitDesign;
    } catch (const egt::ClassMismatchError& e) {
        std::fprintf(stderr, "design rejected (class mismatch): %s\n", e.what());
        return kExitDesign;
    } catch (const egt::UnsupportedClassError& e) {
        std::fprintf(stderr, "design rejected (unsupported class): %s\n", e.what());
        return kExitDesign;
    } catch (const egt::UnsupportedConfigurationError& e) {
        std::fprintf(stderr, "unsupported configuration: %s\n", e.what());
        return kExitDesign;
    } catch (const egt::DomainError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitParse;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
