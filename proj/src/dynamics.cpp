#include "egt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ode.hpp"

namespace egt {

const char* to_string(TerminalReason r) {
    switch (r) {
    case TerminalReason::HorizonReached: return "horizon";
    case TerminalReason::Converged: return "converged";
    case TerminalReason::StepFailure: return "step_failure";
    case TerminalReason::GainCapReached: return "gain_cap";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double y) {
    if (y >= 0.0) {
        const double e = std::exp(-y);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(y);
    return e / (1.0 + e);
}

double logit(double x) { return std::log(x / (1.0 - x)); }

double safe_exp(double u) { return std::exp(std::min(u, 700.0)); }

void validate_config(const IntegratorConfig& cfg) {
    if (cfg.method == IntegratorConfig::Method::AdaptiveRk45) {
        if (!(cfg.rel_tol > 0.0 && cfg.rel_tol <= 1e-2))
            throw DomainError("rel_tol must lie in (0, 1e-2]");
        if (!(cfg.abs_tol > 0.0 && cfg.abs_tol <= 1e-2))
            throw DomainError("abs_tol must lie in (0, 1e-2]");
        if (!(cfg.dt_min > 0.0 && cfg.dt_min <= cfg.dt_max))
            throw DomainError("need 0 < dt_min <= dt_max");
    } else {
        if (!(cfg.dt > 0.0)) throw DomainError("dt must be positive");
    }
    if (!(cfg.horizon > 0.0)) throw DomainError("horizon must be positive");
    if (!(cfg.record_stride > 0.0)) throw DomainError("record_stride must be positive");
    if (!(cfg.convergence.window > 0.0)) throw DomainError("convergence window must be positive");
    if (!(cfg.convergence.eps_x > 0.0) || !(cfg.convergence.eps_g_settle > 0.0))
        throw DomainError("convergence tolerances must be positive");
}

// Declares convergence once every recorded sample in a trailing window of
// length `window` satisfied both bounds.
class ConvergenceTracker {
public:
    explicit ConvergenceTracker(const ConvergenceSpec& spec) : spec_(spec) {}

    bool update(double t, double x, double abs_dg) {
        if (!spec_.target_x) return false;
        const bool ok = std::abs(x - *spec_.target_x) < spec_.eps_x && abs_dg < spec_.eps_g_settle;
        if (!ok) last_bad_ = t;
        return t >= spec_.window && t - last_bad_ >= spec_.window;
    }

private:
    ConvergenceSpec spec_;
    double last_bad_ = -kInf;
};

// Integrates a chart-space field between record times and hands every
// recorded sample to `post`, which may terminate the run.
template <std::size_t N, class Rhs, class MakeSample, class Post>
void drive(const Rhs& rhs, ode::State<N> y, const IntegratorConfig& cfg,
           const MakeSample& make_sample, const Post& post, Trajectory& traj) {
    const double T = cfg.horizon;
    const double rec = 1.0 / cfg.record_stride;
    double t = 0.0;
    double dt_next = std::min(cfg.dt_max, rec);

    if (auto r = post(traj.samples.front())) {
        traj.reason = *r;
        traj.t_end = 0.0;
        return;
    }

    for (long k = 1;; ++k) {
        const double tk = std::min(T, static_cast<double>(k) * rec);
        while (t < tk) {
            if (cfg.method == IntegratorConfig::Method::FixedRk4) {
                double dt = cfg.dt;
                bool landing = false;
                if (tk - t <= cfg.dt * (1.0 + 1e-12)) {
                    dt = tk - t;
                    landing = true;
                }
                y = ode::rk4_step(rhs, t, y, dt);
                t = landing ? tk : t + dt;
            } else {
                double dt = std::clamp(dt_next, cfg.dt_min, cfg.dt_max);
                bool landing = false;
                if (dt >= tk - t) {
                    dt = tk - t;
                    landing = true;
                }
                const auto step = ode::dopri45_step(rhs, t, y, dt, cfg.rel_tol, cfg.abs_tol);
                if (step.err <= 1.0) {
                    y = step.y;
                    t = landing ? tk : t + dt;
                    const double fac = step.err > 0.0 ? 0.9 * std::pow(step.err, -0.2) : 5.0;
                    dt_next = dt * std::clamp(fac, 0.2, 5.0);
                } else {
                    if (dt <= cfg.dt_min * (1.0 + 1e-12)) {
                        traj.samples.push_back(make_sample(t, y));
                        traj.reason = TerminalReason::StepFailure;
                        traj.t_end = t;
                        return;
                    }
                    dt_next = dt * std::clamp(0.9 * std::pow(step.err, -0.2), 0.1, 0.9);
                }
            }
        }
        traj.samples.push_back(make_sample(tk, y));
        if (auto r = post(traj.samples.back())) {
            traj.reason = *r;
            traj.t_end = tk;
            return;
        }
        if (tk >= T) {
            traj.reason = TerminalReason::HorizonReached;
            traj.t_end = T;
            return;
        }
    }
}

// x pinned exactly on the simplex boundary: the gain ODE is linear in the
// log chart and integrated in closed form.
Trajectory integrate_boundary_pinned(double x0, double u0, double phi_at_boundary,
                                     const IntegratorConfig& cfg) {
    Trajectory traj;
    ConvergenceTracker conv(cfg.convergence);
    const double rec = 1.0 / cfg.record_stride;
    const double logit_x = x0 == 0.0 ? -kInf : kInf;
    for (long k = 0;; ++k) {
        const double t = std::min(cfg.horizon, static_cast<double>(k) * rec);
        const double u = u0 + phi_at_boundary * t;
        const double g = u0 == -kInf ? 0.0 : safe_exp(u);
        traj.samples.push_back({t, {x0, g}, logit_x, u});
        traj.t_end = t;
        if (u > cfg.gain_log_cap) {
            traj.reason = TerminalReason::GainCapReached;
            return traj;
        }
        if (conv.update(t, x0, std::abs(phi_at_boundary) * g) && cfg.stop_on_convergence) {
            traj.reason = TerminalReason::Converged;
            return traj;
        }
        if (t >= cfg.horizon) {
            traj.reason = TerminalReason::HorizonReached;
            return traj;
        }
    }
}

} // namespace

Trajectory integrate_uncontrolled(const PayoffMatrix& m, double x0, const IntegratorConfig& cfg) {
    validate_config(cfg);
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("x0 must lie in [0,1]");
    if (x0 == 0.0 || x0 == 1.0) return integrate_boundary_pinned(x0, -kInf, 0.0, cfg);

    const double lam = m.a + m.d - m.b - m.c;
    const double bd = m.b - m.d;
    const auto rhs = [&](double, const ode::State<1>& z) -> ode::State<1> {
        return {lam * sigmoid(z[0]) + bd};
    };
    Trajectory traj;
    traj.samples.push_back({0.0, {x0, 0.0}, logit(x0), -kInf});
    ConvergenceTracker conv(cfg.convergence);
    const auto make_sample = [](double t, const ode::State<1>& z) -> TrajectorySample {
        return {t, {sigmoid(z[0]), 0.0}, z[0], -kInf};
    };
    const auto post = [&](const TrajectorySample& s) -> std::optional<TerminalReason> {
        if (conv.update(s.t, s.state.x, 0.0) && cfg.stop_on_convergence)
            return TerminalReason::Converged;
        return std::nullopt;
    };
    drive<1>(rhs, {logit(x0)}, cfg, make_sample, post, traj);
    return traj;
}

Trajectory integrate_controlled(const PayoffMatrix& m, const ControllerSpec& spec, SystemState s0,
                                const IntegratorConfig& cfg) {
    validate_config(cfg);
    if (!(s0.x >= 0.0 && s0.x <= 1.0)) throw DomainError("x0 must lie in [0,1]");
    if (!(s0.g > 0.0)) throw DomainError("initial gain must be positive");
    if (s0.x == 0.0 || s0.x == 1.0)
        return integrate_boundary_pinned(s0.x, std::log(s0.g), spec.rate(s0.x), cfg);

    double k1 = 0.0, k2 = 0.0;
    switch (spec.matrix) {
    case ControlMatrix::G1: k1 = +1.0; break;
    case ControlMatrix::G2: k2 = +1.0; break;
    case ControlMatrix::G3: k1 = -1.0; break;
    case ControlMatrix::G4: k2 = -1.0; break;
    }
    const double lam = m.a + m.d - m.b - m.c;
    const double bd = m.b - m.d;
    const auto rhs = [&, k1, k2](double, const ode::State<2>& z) -> ode::State<2> {
        const double x = sigmoid(z[0]);
        const double xc = sigmoid(-z[0]); // accurate 1-x
        const double g = safe_exp(z[1]);
        return {lam * x + bd + k1 * g * x + k2 * g * xc, spec.rate(x)};
    };
    Trajectory traj;
    traj.samples.push_back({0.0, s0, logit(s0.x), std::log(s0.g)});
    ConvergenceTracker conv(cfg.convergence);
    const auto make_sample = [](double t, const ode::State<2>& z) -> TrajectorySample {
        return {t, {sigmoid(z[0]), safe_exp(z[1])}, z[0], z[1]};
    };
    const auto post = [&](const TrajectorySample& s) -> std::optional<TerminalReason> {
        if (s.log_g > cfg.gain_log_cap) return TerminalReason::GainCapReached;
        if (conv.update(s.t, s.state.x, std::abs(spec.rate(s.state.x)) * s.state.g) &&
            cfg.stop_on_convergence)
            return TerminalReason::Converged;
        return std::nullopt;
    };
    drive<2>(rhs, {logit(s0.x), std::log(s0.g)}, cfg, make_sample, post, traj);
    return traj;
}

Trajectory integrate_custom_planar(const PlanarRhs& rhs, SystemState s0,
                                   const IntegratorConfig& cfg) {
    validate_config(cfg);
    if (!(s0.x > 0.0 && s0.x < 1.0)) throw DomainError("x0 must lie in (0,1)");
    if (!(s0.g > 0.0)) throw DomainError("initial gain must be positive");

    const auto chart_rhs = [&](double, const ode::State<2>& z) -> ode::State<2> {
        const double x = sigmoid(z[0]);
        const double xc = sigmoid(-z[0]);
        const double g = safe_exp(z[1]);
        const Derivatives d = rhs(x, g);
        const double denom = x * xc;
        // the field vanishes on the boundary, where denom underflows
        const double dy = denom > 0.0 ? d.dx / denom : 0.0;
        return {dy, d.dg / g};
    };
    Trajectory traj;
    traj.samples.push_back({0.0, s0, logit(s0.x), std::log(s0.g)});
    ConvergenceTracker conv(cfg.convergence);
    const auto make_sample = [](double t, const ode::State<2>& z) -> TrajectorySample {
        return {t, {sigmoid(z[0]), safe_exp(z[1])}, z[0], z[1]};
    };
    const auto post = [&](const TrajectorySample& s) -> std::optional<TerminalReason> {
        if (s.log_g > cfg.gain_log_cap) return TerminalReason::GainCapReached;
        double abs_dg = 0.0;
        if (cfg.convergence.target_x) abs_dg = std::abs(rhs(s.state.x, s.state.g).dg);
        if (conv.update(s.t, s.state.x, abs_dg) && cfg.stop_on_convergence)
            return TerminalReason::Converged;
        return std::nullopt;
    };
    drive<2>(chart_rhs, {logit(s0.x), std::log(s0.g)}, cfg, make_sample, post, traj);
    return traj;
}

} // namespace egt
