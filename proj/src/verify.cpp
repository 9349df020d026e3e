#include "egt/verify.hpp"

#include <cmath>
#include <stdexcept>

namespace egt {

const char* to_string(StabilityTag t) {
    switch (t) {
    case StabilityTag::Stable: return "stable";
    case StabilityTag::Saddle: return "saddle";
    case StabilityTag::Source: return "source";
    case StabilityTag::CenterLike: return "center-like";
    }
    return "?";
}

namespace {

StabilityTag classify_eigenvalues(std::complex<double> l1, std::complex<double> l2) {
    constexpr double kZero = 1e-9;
    if (std::abs(l1.real()) <= kZero && std::abs(l2.real()) <= kZero &&
        (l1.imag() != 0.0 || l2.imag() != 0.0))
        return StabilityTag::CenterLike;
    if (l1.real() < 0.0 && l2.real() < 0.0) return StabilityTag::Stable;
    if (l1.real() > 0.0 && l2.real() > 0.0) return StabilityTag::Source;
    return StabilityTag::Saddle;
}

EquilibriumReport report_from_eigs(SystemState pt, std::complex<double> l1,
                                   std::complex<double> l2) {
    return {pt, l1, l2, classify_eigenvalues(l1, l2)};
}

// d/dx of the uncontrolled field x(1-x)((a+d-b-c)x + b-d) at a free
// equilibrium; with g = 0 the g-terms drop out of this entry for every
// control matrix, so the Jacobian is triangular with phi(x) below.
double free_eq_x_eigenvalue(const PayoffMatrix& m, double x) {
    const double lam = m.a + m.d - m.b - m.c;
    const double b0 = lam * x + m.b - m.d;
    return (1.0 - 2.0 * x) * b0 + x * (1.0 - x) * lam;
}

std::vector<EquilibriumReport> reaching_equilibria(const PayoffMatrix& m,
                                                   const ControllerSpec& spec,
                                                   const GameClass& cls) {
    const double xs = *cls.mixed_ne;
    std::vector<EquilibriumReport> out;
    out.push_back(report_from_eigs({0.0, 0.0}, free_eq_x_eigenvalue(m, 0.0), spec.rate(0.0)));
    out.push_back(report_from_eigs({1.0, 0.0}, free_eq_x_eigenvalue(m, 1.0), spec.rate(1.0)));
    out.push_back(report_from_eigs({xs, 0.0}, free_eq_x_eigenvalue(m, xs), spec.rate(xs)));
    return out;
}

std::vector<EquilibriumReport> setpoint_equilibria(const PayoffMatrix& m,
                                                   const ControllerSpec& spec,
                                                   const GameClass& cls) {
    const auto* pr = std::get_if<Proportional>(&spec.rate.v);
    if (!pr || pr->sign != +1)
        throw UnsupportedConfigurationError(
            "set-point equilibria require the anchored proportional rate");
    const double xbar = pr->xbar;
    const double gbar = cls.tag == GameClassTag::DominantAction1
                            ? gbar_dominant(m, xbar)
                            : gbar_anticoordination(m, xbar);
    std::vector<EquilibriumReport> out;
    out.push_back(report_from_eigs({0.0, 0.0}, free_eq_x_eigenvalue(m, 0.0), spec.rate(0.0)));
    out.push_back(report_from_eigs({1.0, 0.0}, free_eq_x_eigenvalue(m, 1.0), spec.rate(1.0)));

    // At (xbar, gbar): trace -beta(1-xbar), determinant gbar p xbar^2 (1-xbar),
    // with beta = b-d > 0 in both supported classes.
    const double beta = m.b - m.d;
    const double tr = -beta * (1.0 - xbar);
    const double det = gbar * pr->p * xbar * xbar * (1.0 - xbar);
    const double disc = tr * tr - 4.0 * det;
    std::complex<double> l1, l2;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        l1 = (tr + s) / 2.0;
        l2 = (tr - s) / 2.0;
    } else {
        const double s = std::sqrt(-disc);
        l1 = {tr / 2.0, s / 2.0};
        l2 = {tr / 2.0, -s / 2.0};
    }
    out.push_back(report_from_eigs({xbar, gbar}, l1, l2));
    return out;
}

SystemState reflect_state(const SystemState& s) { return {1.0 - s.x, s.g}; }

} // namespace

std::vector<EquilibriumReport> equilibria_controlled(const PayoffMatrix& m,
                                                     const ControllerSpec& spec) {
    // Mirrored control matrices reduce to the base scenarios on the
    // relabeled game; eigenvalues are relabel-invariant.
    if (spec.matrix == ControlMatrix::G1 || spec.matrix == ControlMatrix::G2) {
        ControllerSpec base{spec.matrix == ControlMatrix::G1 ? ControlMatrix::G4
                                                             : ControlMatrix::G3,
                            spec.rate.reflected()};
        auto reports = equilibria_controlled(swap_actions(m), base);
        for (auto& r : reports) r.point = reflect_state(r.point);
        return reports;
    }

    const GameClass cls = classify(m);
    switch (cls.tag) {
    case GameClassTag::Coordination:
        // consensus-reaching configurations; equilibria all sit at g = 0
        if (!std::holds_alternative<PowerShifted>(spec.rate.v))
            throw UnsupportedConfigurationError(
                "coordination equilibria require a sign-flip (shifted power) rate");
        return reaching_equilibria(m, spec, cls);
    case GameClassTag::DominantAction1:
    case GameClassTag::AntiCoordination:
        if (spec.matrix == ControlMatrix::G3) return setpoint_equilibria(m, spec, cls);
        throw UnsupportedConfigurationError(
            "analytic equilibria are available for G3 set-point control on this class");
    default:
        throw UnsupportedConfigurationError(
            "analytic equilibria are available for coordination reaching and set-point scenarios");
    }
}

double lyapunov_constant(double xbar, double gbar, double p) {
    return -1.0 - (1.0 - xbar) * (std::log(xbar) - std::log(1.0 - xbar)) -
           (gbar / p) * (1.0 - std::log(gbar));
}

double lyapunov_V(double x, double g, double xbar, double gbar, double p) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("V is defined for x in (0,1)");
    if (!(g > 0.0)) throw DomainError("V is defined for g > 0");
    return xbar / x + (1.0 - xbar) * std::log(x / (1.0 - x)) + (g - gbar * std::log(g)) / p +
           lyapunov_constant(xbar, gbar, p);
}

double lyapunov_V_chart(double logit_x, double log_g, double xbar, double gbar, double p) {
    if (!std::isfinite(logit_x) || !std::isfinite(log_g))
        throw DomainError("V is defined in the open domain");
    // 1/x = 1 + e^{-y}, ln(x/(1-x)) = y, ln g = u
    return xbar * (1.0 + std::exp(-logit_x)) + (1.0 - xbar) * logit_x +
           (std::exp(log_g) - gbar * log_g) / p + lyapunov_constant(xbar, gbar, p);
}

LyapunovAudit audit_lyapunov(const Trajectory& traj, const PayoffMatrix& m, double xbar,
                             double p) {
    if (!(xbar > 0.0 && xbar < 1.0))
        throw UnsupportedConfigurationError("the audit applies to interior set-point targets");
    if (!(p > 0.0)) throw DomainError("p must be positive");
    const GameClass cls = classify(m);
    double gbar = 0.0;
    if (cls.tag == GameClassTag::DominantAction1) gbar = gbar_dominant(m, xbar);
    else if (cls.tag == GameClassTag::AntiCoordination) gbar = gbar_anticoordination(m, xbar);
    else
        throw UnsupportedConfigurationError(
            "the audit applies to dominant-action-1 or anti-coordination set-point runs");
    if (traj.samples.empty()) throw DomainError("empty trajectory");

    LyapunovAudit audit;
    audit.K = lyapunov_constant(xbar, gbar, p);
    audit.values.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        if (!std::isfinite(s.logit_x) || !std::isfinite(s.log_g))
            throw DomainError("trajectory touches the domain boundary");
        audit.values.push_back(lyapunov_V_chart(s.logit_x, s.log_g, xbar, gbar, p));
    }
    for (std::size_t i = 1; i < audit.values.size(); ++i)
        audit.max_increase = std::max(audit.max_increase, audit.values[i] - audit.values[i - 1]);
    return audit;
}

Trajectory integrate_conservative_core(double xbar, double gbar, double p, SystemState s0,
                                       const IntegratorConfig& cfg) {
    const PlanarRhs rhs = [xbar, gbar, p](double x, double g) -> Derivatives {
        return {-x * x * (1.0 - x) * (g - gbar), p * g * (x - xbar)};
    };
    return integrate_custom_planar(rhs, s0, cfg);
}

std::array<double, 4> numerical_jacobian(const PayoffMatrix& m, const ControllerSpec& spec,
                                         const SystemState& at) {
    // The field is polynomial in (x, g); evaluate it without domain clamping
    // so central differences work at boundary equilibria.
    double k1 = 0.0, k2 = 0.0;
    switch (spec.matrix) {
    case ControlMatrix::G1: k1 = +1.0; break;
    case ControlMatrix::G2: k2 = +1.0; break;
    case ControlMatrix::G3: k1 = -1.0; break;
    case ControlMatrix::G4: k2 = -1.0; break;
    }
    const auto fx = [&](double x, double g) {
        const double bracket = (m.a + m.d - m.b - m.c) * x + (m.b - m.d) + k1 * g * x +
                               k2 * g * (1.0 - x);
        return x * (1.0 - x) * bracket;
    };
    const auto fg = [&](double x, double g) { return spec.rate(x) * g; };

    const double hx = 1e-6 * std::max(1.0, std::abs(at.x));
    const double hg = 1e-6 * std::max(1.0, std::abs(at.g));
    return {
        (fx(at.x + hx, at.g) - fx(at.x - hx, at.g)) / (2.0 * hx),
        (fx(at.x, at.g + hg) - fx(at.x, at.g - hg)) / (2.0 * hg),
        (fg(at.x + hx, at.g) - fg(at.x - hx, at.g)) / (2.0 * hx),
        (fg(at.x, at.g + hg) - fg(at.x, at.g - hg)) / (2.0 * hg),
    };
}

std::pair<std::complex<double>, std::complex<double>> eigenvalues_2x2(
    const std::array<double, 4>& j) {
    const double tr = j[0] + j[3];
    const double det = j[0] * j[3] - j[1] * j[2];
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {{(tr + s) / 2.0, 0.0}, {(tr - s) / 2.0, 0.0}};
    }
    const double s = std::sqrt(-disc);
    return {{tr / 2.0, s / 2.0}, {tr / 2.0, -s / 2.0}};
}

NegativeVerdict negative_test(const ProblemSpec& problem, const ControllerSpec& forbidden,
                              const PayoffMatrix& m, SystemState s0, const IntegratorConfig& cfg) {
    const auto verdict = guard_impossible(problem, forbidden, classify(m));
    if (!verdict.rejected)
        throw std::invalid_argument("negative_test requires an impossibility scenario");

    const double target = std::visit(
        [](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetPointRegulation>) return k.target;
            else return static_cast<double>(k.target);
        },
        problem.kind);

    const Trajectory traj = integrate_controlled(m, forbidden, s0, cfg);
    if (traj.reason == TerminalReason::GainCapReached) return NegativeVerdict::FailsAsPredicted;
    constexpr double kFailureMargin = 1e-2;
    if (std::abs(traj.back().state.x - target) >= kFailureMargin)
        return NegativeVerdict::FailsAsPredicted;
    return NegativeVerdict::Unexpected;
}

} // namespace egt
