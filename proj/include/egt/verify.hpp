#pragma once

#include <array>
#include <complex>
#include <vector>

#include "egt/dynamics.hpp"

namespace egt {

enum class StabilityTag { Stable, Saddle, Source, CenterLike };
const char* to_string(StabilityTag t);

/// An equilibrium of the controlled planar system with the eigenvalues of
/// its 2x2 Jacobian, from re-derived closed forms (cross-checked against
/// finite differences in the test suite).
struct EquilibriumReport {
    SystemState point;
    std::complex<double> eig1;
    std::complex<double> eig2;
    StabilityTag stability = StabilityTag::Saddle;
};

/// Analytic equilibrium list for the supported controller scenarios:
/// coordination games under G3/G4 sign-flip control (consensus reaching) and
/// dominant-action-1 / anti-coordination games under G3 anchored-proportional
/// control (set-point). Mirrored configurations (G1/G2) are handled through
/// the relabeling symmetry. Throws UnsupportedConfigurationError elsewhere.
std::vector<EquilibriumReport> equilibria_controlled(const PayoffMatrix& m,
                                                     const ControllerSpec& spec);

/// Normalizing constant making V(xbar, gbar) = 0.
double lyapunov_constant(double xbar, double gbar, double p);

/// V(x,g) = xbar/x + (1-xbar) ln(x/(1-x)) + (g - gbar ln g)/p + K.
/// Defined on (0,1) x (0,inf); positive away from (xbar,gbar), divergent at
/// the domain boundary.
double lyapunov_V(double x, double g, double xbar, double gbar, double p);

/// Same function evaluated from the integration chart (logit x, ln g); exact
/// where x has rounded to a boundary value in doubles.
double lyapunov_V_chart(double logit_x, double log_g, double xbar, double gbar, double p);

struct LyapunovAudit {
    std::vector<double> values;  // V along the recorded samples
    double max_increase = 0.0;   // largest positive jump between samples
    double K = 0.0;
};

/// Evaluates V along a set-point trajectory for game m and target xbar; the
/// steady gain comes from the game's closed form. Throws if the scenario is
/// not a set-point one or a sample sits on the simplex boundary.
LyapunovAudit audit_lyapunov(const Trajectory& traj, const PayoffMatrix& m, double xbar, double p);

/// The conservative core of the set-point dynamics:
///   dx = -x^2 (1-x)(g - gbar),  dg = p g (x - xbar).
/// V is a first integral of this field; used by the conservation and
/// integrator-order tests.
Trajectory integrate_conservative_core(double xbar, double gbar, double p, SystemState s0,
                                       const IntegratorConfig& cfg);

/// Central-difference Jacobian of the controlled field, row-major
/// [dfx/dx, dfx/dg, dfg/dx, dfg/dg]; step 1e-6 * max(1, |coordinate|).
std::array<double, 4> numerical_jacobian(const PayoffMatrix& m, const ControllerSpec& spec,
                                         const SystemState& at);

/// Eigenvalues of a row-major 2x2 matrix.
std::pair<std::complex<double>, std::complex<double>> eigenvalues_2x2(
    const std::array<double, 4>& j);

enum class NegativeVerdict { FailsAsPredicted, Unexpected };

/// Runs a configuration the impossibility guard rejects and checks the
/// failure signature: terminal state at least 1e-2 away from the target, or
/// the gain cap reached. Throws std::invalid_argument if the guard does not
/// reject the configuration.
NegativeVerdict negative_test(const ProblemSpec& problem, const ControllerSpec& forbidden,
                              const PayoffMatrix& m, SystemState s0, const IntegratorConfig& cfg);

} // namespace egt
