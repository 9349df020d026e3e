#include "egt/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace egt {

ControllerClass controller_class(ControlMatrix m) {
    switch (m) {
    case ControlMatrix::G1:
    case ControlMatrix::G4: return ControllerClass::Conformity;
    case ControlMatrix::G2:
    case ControlMatrix::G3: return ControllerClass::Innovation;
    }
    throw std::logic_error("bad ControlMatrix");
}

const char* to_string(ControlMatrix m) {
    switch (m) {
    case ControlMatrix::G1: return "G1";
    case ControlMatrix::G2: return "G2";
    case ControlMatrix::G3: return "G3";
    case ControlMatrix::G4: return "G4";
    }
    return "?";
}

const char* to_string(ControllerClass c) {
    return c == ControllerClass::Conformity ? "conformity" : "innovation";
}

const char* to_string(DesignRule r) {
    switch (r) {
    case DesignRule::ReachingConformity: return "reaching-conformity";
    case DesignRule::ReachingInnovation: return "reaching-innovation";
    case DesignRule::StabilizationConformity: return "stabilization-conformity";
    case DesignRule::SetPointDominant: return "set-point-dominant";
    case DesignRule::SetPointAnticoordination: return "set-point-anticoordination";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Adaptation rates.

double AdaptationRate::operator()(double x) const {
    return std::visit(
        [x](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PowerShifted>)
                return r.p * (std::pow(x, r.q) - std::pow(r.delta, r.q));
            else if constexpr (std::is_same_v<T, Power>)
                return r.p * std::pow(x, r.q);
            else if constexpr (std::is_same_v<T, PowerShiftedMirror>)
                return r.p * (std::pow(1.0 - x, r.q) - std::pow(1.0 - r.delta, r.q));
            else if constexpr (std::is_same_v<T, PowerMirror>)
                return r.p * std::pow(1.0 - x, r.q);
            else if constexpr (std::is_same_v<T, Proportional>)
                return r.sign * r.p * (x - r.xbar);
            else if constexpr (std::is_same_v<T, Atan>)
                return std::atan(x - r.xbar);
            else
                return (x - r.xbar) * (x - r.xbar) * (x - r.xbar);
        },
        v);
}

double AdaptationRate::derivative(double x) const {
    return std::visit(
        [x](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PowerShifted> || std::is_same_v<T, Power>)
                return r.p * r.q * std::pow(x, r.q - 1.0);
            else if constexpr (std::is_same_v<T, PowerShiftedMirror> || std::is_same_v<T, PowerMirror>)
                return -r.p * r.q * std::pow(1.0 - x, r.q - 1.0);
            else if constexpr (std::is_same_v<T, Proportional>)
                return r.sign * r.p;
            else if constexpr (std::is_same_v<T, Atan>)
                return 1.0 / (1.0 + (x - r.xbar) * (x - r.xbar));
            else
                return 3.0 * (x - r.xbar) * (x - r.xbar);
        },
        v);
}

const char* AdaptationRate::family_name() const {
    return std::visit(
        [](const auto& r) -> const char* {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PowerShifted>) return "power_shifted";
            else if constexpr (std::is_same_v<T, Power>) return "power";
            else if constexpr (std::is_same_v<T, PowerShiftedMirror>) return "power_shifted_mirror";
            else if constexpr (std::is_same_v<T, PowerMirror>) return "power_mirror";
            else if constexpr (std::is_same_v<T, Proportional>) return "proportional";
            else if constexpr (std::is_same_v<T, Atan>) return "atan";
            else return "cubic";
        },
        v);
}

AdaptationRate AdaptationRate::reflected() const {
    return std::visit(
        [](const auto& r) -> AdaptationRate {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PowerShifted>)
                return {PowerShiftedMirror{r.p, r.q, 1.0 - r.delta}};
            else if constexpr (std::is_same_v<T, PowerShiftedMirror>)
                return {PowerShifted{r.p, r.q, 1.0 - r.delta}};
            else if constexpr (std::is_same_v<T, Power>)
                return {PowerMirror{r.p, r.q}};
            else if constexpr (std::is_same_v<T, PowerMirror>)
                return {Power{r.p, r.q}};
            else if constexpr (std::is_same_v<T, Proportional>)
                return {Proportional{r.p, 1.0 - r.xbar, -r.sign}};
            else
                throw DomainError("this rate family has no representable reflection");
        },
        v);
}

// ---------------------------------------------------------------------------

Derivatives controlled_rhs(const PayoffMatrix& m, const ControllerSpec& spec, const SystemState& s) {
    if (!(s.x >= 0.0 && s.x <= 1.0)) throw DomainError("state x must lie in [0,1]");
    if (!(s.g >= 0.0)) throw DomainError("gain must be non-negative");
    double k1 = 0.0, k2 = 0.0; // coefficients of g*x and g*(1-x) in the reward gap
    switch (spec.matrix) {
    case ControlMatrix::G1: k1 = +1.0; break;
    case ControlMatrix::G2: k2 = +1.0; break;
    case ControlMatrix::G3: k1 = -1.0; break;
    case ControlMatrix::G4: k2 = -1.0; break;
    }
    const double bracket = (m.a + m.d - m.b - m.c) * s.x + (m.b - m.d) + k1 * s.g * s.x +
                           k2 * s.g * (1.0 - s.x);
    return {s.x * (1.0 - s.x) * bracket, spec.rate(s.x) * s.g};
}

double gbar_dominant(const PayoffMatrix& m, double xbar) {
    if (classify(m).tag != GameClassTag::DominantAction1)
        throw ClassMismatchError("steady-gain formula requires a dominant-action-1 game");
    if (!(xbar > 0.0 && xbar < 1.0)) throw DomainError("target must lie in (0,1)");
    return m.a - m.c + (m.b - m.d) * (1.0 - xbar) / xbar;
}

double gbar_anticoordination(const PayoffMatrix& m, double xbar) {
    const GameClass cls = classify(m);
    if (cls.tag != GameClassTag::AntiCoordination)
        throw ClassMismatchError("steady-gain formula requires an anti-coordination game");
    if (!(xbar > 0.0 && xbar < 1.0)) throw DomainError("target must lie in (0,1)");
    if (!(xbar < *cls.mixed_ne))
        throw DomainError("target must lie strictly below the free interior equilibrium");
    return m.a + m.d - m.c - m.b + (m.b - m.d) / xbar;
}

// ---------------------------------------------------------------------------
// Impossibility guards.

namespace {

bool is_stable_free_equilibrium(const GameClass& cls, double target) {
    switch (cls.tag) {
    case GameClassTag::Coordination:
        return target == 0.0 || target == 1.0; // the interior point is a saddle
    case GameClassTag::DominantAction1:
        return target == 1.0;
    case GameClassTag::DominantAction2:
        return target == 0.0;
    case GameClassTag::AntiCoordination:
        return cls.mixed_ne && target == *cls.mixed_ne;
    case GameClassTag::Degenerate:
        return false;
    }
    return false;
}

} // namespace

ImpossibilityVerdict guard_impossible(const ProblemSpec& problem, const ControllerSpec& spec,
                                      const GameClass& cls) {
    double target = 0.0;
    bool vanishing = problem.require_vanishing_gain;
    bool stabilization = false;
    int stab_target = -1;
    if (const auto* r = std::get_if<ConsensusReaching>(&problem.kind)) {
        target = r->target;
        vanishing = true; // reaching demands g -> 0 by definition
    } else if (const auto* s = std::get_if<ConsensusStabilization>(&problem.kind)) {
        target = s->target;
        stabilization = true;
        stab_target = s->target;
    } else {
        target = std::get<SetPointRegulation>(problem.kind).target;
    }

    if (vanishing && cls.tag != GameClassTag::Degenerate &&
        !is_stable_free_equilibrium(cls, target)) {
        return {true, ImpossibilityReason::VanishingGainAtUnstableTarget,
                "rejected: a controller whose gain must vanish cannot hold a target that is "
                "unstable for the uncontrolled dynamics"};
    }
    if (stabilization &&
        ((stab_target == 0 && spec.matrix == ControlMatrix::G3) ||
         (stab_target == 1 && spec.matrix == ControlMatrix::G2))) {
        return {true, ImpossibilityReason::InnovationGainCannotStabilize,
                "rejected: innovation-type gain control cannot stabilize an unstable consensus; "
                "use the matching conformity matrix"};
    }
    return {false, std::nullopt, "not rejected (no impossibility result applies)"};
}

// ---------------------------------------------------------------------------
// Rate condition verification.

namespace {

constexpr int kGridPoints = 20000;
constexpr double kTrailingWindow = 0.05; // conditions enforced on [1-window, 1]

struct SignCheck {
    bool passed = true;
    std::optional<double> witness;
};

// Strict sign of phi over an interval sampled densely; `lo_closed`/`hi_closed`
// control endpoint inclusion.
SignCheck check_sign(const AdaptationRate& rate, double lo, double hi, int sign, bool lo_closed,
                     bool hi_closed) {
    SignCheck out;
    if (hi <= lo) return out; // empty interval, vacuously true
    const int i0 = lo_closed ? 0 : 1;
    const int i1 = hi_closed ? kGridPoints : kGridPoints - 1;
    for (int i = i0; i <= i1; ++i) {
        const double x = lo + (hi - lo) * (static_cast<double>(i) / kGridPoints);
        const double v = rate(x);
        if ((sign > 0 && !(v > 0.0)) || (sign < 0 && !(v < 0.0))) {
            out.passed = false;
            out.witness = x;
            return out;
        }
    }
    return out;
}

SignCheck check_above(const AdaptationRate& rate, double lo, double hi, double bound) {
    SignCheck out;
    for (int i = 0; i <= kGridPoints; ++i) {
        const double x = lo + (hi - lo) * (static_cast<double>(i) / kGridPoints);
        if (!(rate(x) > bound)) {
            out.passed = false;
            out.witness = x;
            return out;
        }
    }
    return out;
}

std::optional<double> builtin_root(const AdaptationRate& rate) {
    return std::visit(
        [](const auto& r) -> std::optional<double> {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PowerShifted> || std::is_same_v<T, PowerShiftedMirror>)
                return r.delta;
            else if constexpr (std::is_same_v<T, Power>)
                return 0.0;
            else if constexpr (std::is_same_v<T, PowerMirror>)
                return 1.0;
            else
                return r.xbar;
        },
        rate.v);
}

ConditionCheck make_check(std::string id, std::string desc, const SignCheck& s,
                          CheckMethod method = CheckMethod::Sampled) {
    ConditionCheck c;
    c.id = std::move(id);
    c.description = std::move(desc);
    c.passed = s.passed;
    c.method = method;
    c.witness_x = s.witness;
    if (!s.passed && s.witness) c.detail = "fails at x = " + std::to_string(*s.witness);
    return c;
}

ConditionCheck exact_root_check(const AdaptationRate& rate, double expected_root) {
    ConditionCheck c;
    c.id = "exact-root";
    c.description = "rate vanishes exactly at its analytic sign-flip point";
    c.method = CheckMethod::Analytic;
    const auto root = builtin_root(rate);
    if (root && *root == expected_root && rate(*root) == 0.0) {
        c.passed = true;
    } else if (root) {
        c.passed = std::abs(rate(expected_root)) < 1e-12;
        if (!c.passed) {
            c.witness_x = expected_root;
            c.detail = "rate does not vanish at the expected flip point";
        }
    } else {
        c.passed = std::abs(rate(expected_root)) < 1e-12;
    }
    return c;
}

// Probes lim_{x->0+} phi(x)/x^h over a geometric grid for candidate exponents.
// Reported as heuristic evidence only, never as a certificate.
ConditionCheck probe_small_x_limit(const AdaptationRate& rate) {
    ConditionCheck c;
    c.id = "small-x-power-limit";
    c.description = "phi(x)/x^h tends to a positive constant as x -> 0+";
    c.method = CheckMethod::Heuristic;
    if (std::abs(rate(0.0)) > 1e-12) {
        c.passed = false;
        c.witness_x = 0.0;
        c.detail = "phi(0) != 0, no finite positive power limit exists";
        return c;
    }
    for (double h : {0.5, 1.0, 2.0, 3.0}) {
        double prev = 0.0;
        bool ok = true;
        double k = 0.0;
        for (int j = 4; j <= 20; ++j) {
            const double x = std::ldexp(1.0, -j);
            const double r = rate(x) / std::pow(x, h);
            if (!std::isfinite(r) || r <= 0.0) {
                ok = false;
                break;
            }
            if (j > 16 && std::abs(r - prev) > 0.02 * std::abs(r)) ok = false;
            prev = r;
            k = r;
        }
        if (ok) {
            c.passed = true;
            c.detail = "heuristic fit: h ~ " + std::to_string(h) + ", k ~ " + std::to_string(k);
            return c;
        }
    }
    c.passed = false;
    c.detail = "no candidate exponent in {0.5,1,2,3} gave a converging positive ratio";
    return c;
}

} // namespace

bool ConditionReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

ConditionReport verify_rate_conditions(const AdaptationRate& rate, DesignRule rule,
                                       const RateConditionParams& params) {
    ConditionReport rep;
    rep.rule = rule;
    bool heuristic_used = false;

    switch (rule) {
    case DesignRule::ReachingConformity:
    case DesignRule::ReachingInnovation: {
        if (!params.delta) throw MissingKnowledgeError("attraction radius required");
        const double delta = *params.delta;
        rep.checks.push_back(make_check("negative-below-flip",
                                        "phi < 0 on [0, delta)",
                                        check_sign(rate, 0.0, delta, -1, true, false)));
        rep.checks.push_back(make_check("positive-above-flip",
                                        "phi > 0 on (delta, 1]",
                                        check_sign(rate, delta, 1.0, +1, false, true)));
        rep.checks.push_back(exact_root_check(rate, delta));
        if (rule == DesignRule::ReachingConformity) {
            if (!params.payoff_bound)
                throw MissingKnowledgeError("payoff bound required for the conformity route");
            rep.checks.push_back(make_check(
                "trailing-dominance", "phi exceeds the payoff bound near x = 1",
                check_above(rate, 1.0 - kTrailingWindow, 1.0, *params.payoff_bound)));
        }
        break;
    }
    case DesignRule::StabilizationConformity: {
        rep.checks.push_back(make_check("positive-interior", "phi > 0 on (0, 1]",
                                        check_sign(rate, 0.0, 1.0, +1, false, true)));
        ConditionCheck limit;
        if (const auto* pw = std::get_if<Power>(&rate.v)) {
            limit.id = "small-x-power-limit";
            limit.description = "phi(x)/x^h tends to a positive constant as x -> 0+";
            limit.method = CheckMethod::Analytic;
            limit.passed = pw->p > 0.0 && pw->q > 0.0;
            limit.detail = "exact: h = q = " + std::to_string(pw->q) +
                           ", k = p = " + std::to_string(pw->p);
        } else {
            limit = probe_small_x_limit(rate);
            heuristic_used = true;
        }
        rep.checks.push_back(std::move(limit));
        if (params.payoff_bound) {
            rep.checks.push_back(make_check(
                "trailing-dominance", "phi exceeds the payoff bound near x = 1",
                check_above(rate, 1.0 - kTrailingWindow, 1.0, *params.payoff_bound)));
        }
        break;
    }
    case DesignRule::SetPointDominant:
    case DesignRule::SetPointAnticoordination: {
        ConditionCheck form;
        form.id = "proportional-form";
        form.description = "rate is p(x - xbar) with p > 0, anchored at the target";
        form.method = CheckMethod::Analytic;
        const auto* pr = std::get_if<Proportional>(&rate.v);
        form.passed = pr && pr->p > 0.0 && pr->sign == +1 &&
                      (!params.xbar || pr->xbar == *params.xbar);
        if (!form.passed) form.detail = "rate is not the anchored proportional family";
        rep.checks.push_back(std::move(form));
        break;
    }
    }

    rep.certified = rep.all_passed() && !heuristic_used;
    return rep;
}

// ---------------------------------------------------------------------------
// Design factory.

namespace {

constexpr double kBoundMargin = 2.0; // raised-p safety factor over the payoff bound

GameClass reflect_class(const GameClass& cls) {
    GameClass out = cls;
    if (cls.tag == GameClassTag::DominantAction1) out.tag = GameClassTag::DominantAction2;
    else if (cls.tag == GameClassTag::DominantAction2) out.tag = GameClassTag::DominantAction1;
    if (cls.mixed_ne) out.mixed_ne = 1.0 - *cls.mixed_ne;
    return out;
}

ControlMatrix reflect_matrix(ControlMatrix m) {
    switch (m) {
    case ControlMatrix::G1: return ControlMatrix::G4;
    case ControlMatrix::G4: return ControlMatrix::G1;
    case ControlMatrix::G2: return ControlMatrix::G3;
    case ControlMatrix::G3: return ControlMatrix::G2;
    }
    throw std::logic_error("bad ControlMatrix");
}

ProblemSpec reflect_problem(const ProblemSpec& p) {
    ProblemSpec out = p;
    if (const auto* r = std::get_if<ConsensusReaching>(&p.kind))
        out.kind = ConsensusReaching{1 - r->target, r->delta};
    else if (const auto* s = std::get_if<ConsensusStabilization>(&p.kind))
        out.kind = ConsensusStabilization{1 - s->target};
    else
        out.kind = SetPointRegulation{1.0 - std::get<SetPointRegulation>(p.kind).target};
    if (p.side == MixedNeSide::Below) out.side = MixedNeSide::Above;
    else if (p.side == MixedNeSide::Above) out.side = MixedNeSide::Below;
    return out;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

} // namespace

DesignResult design(const GameClass& cls, const ProblemSpec& problem, const DesignOptions& opts,
                    const PayoffMatrix* payoff) {
    if (cls.tag == GameClassTag::Degenerate)
        throw UnsupportedClassError("degenerate games are outside the design scope");
    require_positive(opts.q, "q");
    if (opts.p) require_positive(*opts.p, "p");

    // Mirrored targets reduce to the base case on the relabeled game.
    const bool mirror = std::visit(
        [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ConsensusReaching>) return k.target == 1;
            else if constexpr (std::is_same_v<T, ConsensusStabilization>) return k.target == 1;
            else return false;
        },
        problem.kind);
    const auto* sp = std::get_if<SetPointRegulation>(&problem.kind);
    const bool mirror_setpoint =
        sp && (cls.tag == GameClassTag::DominantAction2 ||
               (cls.tag == GameClassTag::AntiCoordination && problem.side == MixedNeSide::Above));

    if (sp && cls.tag == GameClassTag::AntiCoordination && problem.side == MixedNeSide::Unknown)
        throw MissingKnowledgeError(
            "side of the free interior equilibrium must be known for anti-coordination set-point designs");

    if (mirror || mirror_setpoint) {
        PayoffMatrix relabeled;
        const PayoffMatrix* relabeled_ptr = nullptr;
        if (payoff) {
            relabeled = swap_actions(*payoff);
            relabeled_ptr = &relabeled;
        }
        DesignResult base = design(reflect_class(cls), reflect_problem(problem), opts, relabeled_ptr);
        DesignResult out;
        out.spec.matrix = reflect_matrix(base.spec.matrix);
        out.spec.rate = base.spec.rate.reflected();
        out.predicted_gbar = base.predicted_gbar; // gain magnitude is relabel-invariant
        out.certificate = base.certificate;
        ConditionCheck note;
        note.id = "mirror-transform";
        note.description = "conditions verified in relabeled coordinates (x -> 1-x)";
        note.method = CheckMethod::Analytic;
        note.passed = true;
        out.certificate.checks.push_back(std::move(note));
        return out;
    }

    DesignResult out;

    if (const auto* r = std::get_if<ConsensusReaching>(&problem.kind)) {
        if (cls.tag != GameClassTag::Coordination)
            throw ClassMismatchError("consensus reaching applies to coordination games");
        if (!(r->delta > 0.0 && r->delta < 1.0))
            throw DomainError("attraction radius must lie in (0,1)");
        const double q = opts.q;
        double p = opts.p.value_or(1.0);
        DesignRule rule;
        if (opts.prefer_conformity) {
            if (!problem.payoff_bound)
                throw MissingKnowledgeError("payoff bound required for the conformity reaching route");
            const double denom = std::pow(1.0 - kTrailingWindow, q) - std::pow(r->delta, q);
            if (!(denom > 0.0))
                throw DomainError("attraction radius too large for the fixed trailing window");
            p = std::max(p, kBoundMargin * *problem.payoff_bound / denom);
            out.spec.matrix = ControlMatrix::G4;
            rule = DesignRule::ReachingConformity;
        } else {
            out.spec.matrix = ControlMatrix::G3;
            rule = DesignRule::ReachingInnovation;
        }
        out.spec.rate = {PowerShifted{p, q, r->delta}};
        out.certificate = verify_rate_conditions(
            out.spec.rate, rule, {r->delta, problem.payoff_bound, std::nullopt});
    } else if (std::get_if<ConsensusStabilization>(&problem.kind)) {
        if (cls.tag != GameClassTag::DominantAction1 && cls.tag != GameClassTag::AntiCoordination)
            throw ClassMismatchError(
                "consensus stabilization applies where the target consensus is unstable");
        const double q = opts.q;
        double p = opts.p.value_or(1.0);
        if (cls.tag == GameClassTag::DominantAction1) {
            if (!problem.payoff_bound)
                throw MissingKnowledgeError(
                    "payoff bound required to stabilize a dominant-action game");
            p = std::max(p, kBoundMargin * *problem.payoff_bound /
                                std::pow(1.0 - kTrailingWindow, q));
        }
        out.spec.matrix = ControlMatrix::G4;
        out.spec.rate = {Power{p, q}};
        // the trailing bound only constrains dominant-action games
        const auto bound = cls.tag == GameClassTag::DominantAction1 ? problem.payoff_bound
                                                                    : std::nullopt;
        out.certificate = verify_rate_conditions(out.spec.rate, DesignRule::StabilizationConformity,
                                                 {std::nullopt, bound, std::nullopt});
    } else {
        const double target = sp->target;
        if (!(target > 0.0 && target < 1.0))
            throw DomainError("set-point target must lie in (0,1)");
        const double p = opts.p.value_or(0.5);
        DesignRule rule;
        if (cls.tag == GameClassTag::DominantAction1) {
            rule = DesignRule::SetPointDominant;
        } else if (cls.tag == GameClassTag::AntiCoordination) {
            rule = DesignRule::SetPointAnticoordination;
        } else {
            throw ClassMismatchError(
                "set-point regulation is designed for dominant-action and anti-coordination games");
        }
        out.spec.matrix = ControlMatrix::G3;
        out.spec.rate = {Proportional{p, target, +1}};
        if (!payoff)
            throw MissingKnowledgeError("payoff matrix required to predict the steady gain");
        out.predicted_gbar = rule == DesignRule::SetPointDominant
                                 ? gbar_dominant(*payoff, target)
                                 : gbar_anticoordination(*payoff, target);
        out.certificate =
            verify_rate_conditions(out.spec.rate, rule, {std::nullopt, std::nullopt, target});
    }

    if (!out.certificate.all_passed())
        throw std::logic_error("design factory produced a rate violating its own conditions");

    const auto verdict = guard_impossible(problem, out.spec, cls);
    if (verdict.rejected) throw ImpossibleDesignError(verdict.message);
    return out;
}

} // namespace egt
