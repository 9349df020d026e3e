#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "egt/control.hpp"
#include "egt/game.hpp"

namespace egt {

/// Convergence is declared when, over a trailing time window, both
/// |x - target_x| < eps_x and |dg/dt| = |phi(x)| g < eps_g_settle hold at
/// every recorded sample. Without target_x no detection happens.
struct ConvergenceSpec {
    std::optional<double> target_x;
    double eps_x = 1e-4;
    double eps_g_settle = 1e-7;
    double window = 5.0;
};

struct IntegratorConfig {
    enum class Method { FixedRk4, AdaptiveRk45 };
    Method method = Method::AdaptiveRk45;

    double dt = 1e-3; // FixedRk4 step

    // AdaptiveRk45 controls
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double dt_min = 1e-9;
    double dt_max = 1.0;

    double horizon = 200.0;
    double record_stride = 10.0; // recorded samples per unit time

    ConvergenceSpec convergence;
    bool stop_on_convergence = true;

    /// Terminal condition flagging gain blow-up: the run stops once
    /// ln g exceeds this cap and is reported as diverged, never as inf.
    double gain_log_cap = 50.0;
};

enum class TerminalReason { HorizonReached, Converged, StepFailure, GainCapReached };
const char* to_string(TerminalReason r);

/// The state is advanced in the (logit x, ln g) chart, which makes the
/// invariance of [0,1] x [0,inf) structural and keeps resolution near the
/// boundaries; samples carry both the plain and the chart values.
struct TrajectorySample {
    double t = 0.0;
    SystemState state;
    double logit_x = 0.0; // ln(x/(1-x)); +-inf only on boundary-pinned runs
    double log_g = 0.0;   // ln g; -inf for uncontrolled runs (g == 0)
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    TerminalReason reason = TerminalReason::HorizonReached;
    double t_end = 0.0;

    const TrajectorySample& back() const { return samples.back(); }
};

/// Scalar imitation dynamics of the uncontrolled game.
Trajectory integrate_uncontrolled(const PayoffMatrix& m, double x0, const IntegratorConfig& cfg);

/// Planar gain-controlled dynamics; requires g0 > 0. Starts with x0 exactly
/// on the simplex boundary stay there, with the gain integrated exactly.
Trajectory integrate_controlled(const PayoffMatrix& m, const ControllerSpec& spec, SystemState s0,
                                const IntegratorConfig& cfg);

/// Integrates an arbitrary planar field given by its (dx, dg) derivatives.
/// The field must vanish on the simplex boundary (replicator-like factor)
/// and dg must vanish with g; used for reduced/test systems.
using PlanarRhs = std::function<Derivatives(double x, double g)>;
Trajectory integrate_custom_planar(const PlanarRhs& rhs, SystemState s0,
                                   const IntegratorConfig& cfg);

} // namespace egt
