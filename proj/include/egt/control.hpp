#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "egt/game.hpp"

namespace egt {

/// Which single payoff entry receives the additive gain.
enum class ControlMatrix {
    G1, ///< entry (1,1): rewards coordinating on action 1
    G2, ///< entry (1,2): rewards playing 1 against 2
    G3, ///< entry (2,1): rewards playing 2 against 1
    G4, ///< entry (2,2): rewards coordinating on action 2
};

enum class ControllerClass { Conformity, Innovation };

/// G1/G4 act on a diagonal entry (conformity), G2/G3 off-diagonal (innovation).
ControllerClass controller_class(ControlMatrix m);

const char* to_string(ControlMatrix m);
const char* to_string(ControllerClass c);

// ---------------------------------------------------------------------------
// Adaptation rate families phi(x), driving dg/dt = phi(x) * g.

struct PowerShifted {        // phi(x) = p (x^q - delta^q)
    double p, q, delta;
};
struct Power {               // phi(x) = p x^q
    double p, q;
};
struct PowerShiftedMirror {  // phi(x) = p ((1-x)^q - (1-delta)^q), sign flip at x=delta
    double p, q, delta;
};
struct PowerMirror {         // phi(x) = p (1-x)^q
    double p, q;
};
struct Proportional {        // phi(x) = sign * p (x - xbar)
    double p, xbar;
    int sign = +1;
};
struct Atan {                // phi(x) = atan(x - xbar)
    double xbar;
};
struct Cubic {               // phi(x) = (x - xbar)^3
    double xbar;
};

struct AdaptationRate {
    std::variant<PowerShifted, Power, PowerShiftedMirror, PowerMirror, Proportional, Atan, Cubic> v;

    double operator()(double x) const;
    double derivative(double x) const;

    const char* family_name() const;
    /// Conjugation by x -> 1-x. Defined for the families the mirror designs
    /// need; throws DomainError for Atan/Cubic (their reflections fall
    /// outside this family set).
    AdaptationRate reflected() const;
};

/// Feedback law: controlled payoff A + G*g with dg/dt = phi(x) g.
struct ControllerSpec {
    ControlMatrix matrix = ControlMatrix::G3;
    AdaptationRate rate;
};

// ---------------------------------------------------------------------------
// Problem statements.

struct ConsensusReaching { // steer to a locally stable consensus, gain must vanish
    int target = 0;        // 0 or 1
    double delta = 0.0;    // known attraction radius: |x0 - target| <= delta implies capture
};
struct ConsensusStabilization { // hold an unstable consensus, gain settles to a constant
    int target = 0;
};
struct SetPointRegulation { // hold an interior point, gain settles to a constant
    double target = 0.5;
};

enum class MixedNeSide { Unknown, Below, Above };

struct ProblemSpec {
    std::variant<ConsensusReaching, ConsensusStabilization, SetPointRegulation> kind;
    /// Upper estimate of max(a-c, c-a); required where the trailing-bound
    /// conditions apply (conformity reaching, dominant-game stabilization).
    std::optional<double> payoff_bound;
    /// For anti-coordination set-point designs: which side of the free
    /// interior equilibrium the target lies on.
    MixedNeSide side = MixedNeSide::Unknown;
    /// Extra constraint: also demand g -> 0 (only consensus-reaching has it
    /// implicitly; setting it elsewhere trips the impossibility guard).
    bool require_vanishing_gain = false;
};

// ---------------------------------------------------------------------------
// Design rules and their certificates.

enum class DesignRule {
    ReachingConformity,       // G4 (or G1 mirror) with sign-flip rate + trailing bound
    ReachingInnovation,       // G3 (or G2 mirror) with sign-flip rate
    StabilizationConformity,  // G4 (or G1 mirror) with power rate
    SetPointDominant,         // G3 (or G2 mirror) with proportional rate
    SetPointAnticoordination, // same, target below (or above) the free equilibrium
};

const char* to_string(DesignRule r);

enum class CheckMethod { Analytic, Sampled, Heuristic };

struct ConditionCheck {
    std::string id;          // short stable identifier, e.g. "negative-below-flip"
    std::string description;
    bool passed = false;
    CheckMethod method = CheckMethod::Sampled;
    std::optional<double> witness_x; // a failing point, when one exists
    std::string detail;
};

struct ConditionReport {
    DesignRule rule = DesignRule::ReachingInnovation;
    std::vector<ConditionCheck> checks;
    /// True when every check passed and none was merely heuristic.
    bool certified = false;

    bool all_passed() const;
};

struct DesignResult {
    ControllerSpec spec;
    std::optional<double> predicted_gbar; // present exactly for set-point designs
    ConditionReport certificate;
};

struct DesignOptions {
    std::optional<double> p; // default: 1 for reaching/stabilization, 0.5 for set-point
    double q = 1.0;
    bool prefer_conformity = false; // reaching: pick the conformity route
};

// ---------------------------------------------------------------------------
// Operations.

struct Derivatives {
    double dx = 0.0;
    double dg = 0.0;
};

struct SystemState {
    double x = 0.0; // fraction playing action 1
    double g = 0.0; // control gain, >= 0
};

/// Planar vector field of the gain-controlled imitation dynamics:
///   dx = x(1-x)[(a+d-b-c)x + b-d + (G11-G21) g x + (G12-G22) g (1-x)]
///   dg = phi(x) g
/// dx vanishes exactly on the simplex boundary, dg vanishes exactly at g=0.
Derivatives controlled_rhs(const PayoffMatrix& m, const ControllerSpec& spec, const SystemState& s);

/// Steady gain a-c + (b-d)(1-xbar)/xbar for holding a dominant-action-1 game
/// at the interior point xbar. Throws ClassMismatchError otherwise.
double gbar_dominant(const PayoffMatrix& m, double xbar);

/// Steady gain a+d-c-b + (b-d)/xbar for an anti-coordination game with
/// xbar strictly below the free equilibrium. Throws ClassMismatchError /
/// DomainError when the side condition fails.
double gbar_anticoordination(const PayoffMatrix& m, double xbar);

enum class ImpossibilityReason {
    VanishingGainAtUnstableTarget, // gain must vanish but the target is not a stable free equilibrium
    InnovationGainCannotStabilize, // off-diagonal gain cannot hold an unstable consensus
};

struct ImpossibilityVerdict {
    bool rejected = false;
    std::optional<ImpossibilityReason> reason;
    std::string message;
};

/// Screens a (problem, controller, class) combination against the two
/// impossibility results. NotRejected does not certify success.
ImpossibilityVerdict guard_impossible(const ProblemSpec& problem, const ControllerSpec& spec,
                                      const GameClass& cls);

/// Checks the sufficient conditions of one design rule against a rate:
/// dense sampling (>= 10^4 points) plus exact root checks for the built-in
/// families; the small-x limit condition is analytic for the power families
/// and a heuristic probe otherwise.
struct RateConditionParams {
    std::optional<double> delta;
    std::optional<double> payoff_bound;
    std::optional<double> xbar;
};
ConditionReport verify_rate_conditions(const AdaptationRate& rate, DesignRule rule,
                                       const RateConditionParams& params);

/// Controller factory. Decisions use only the game class and the declared
/// knowledge in `problem`; `payoff` (optional) is used solely to evaluate the
/// predicted steady gain of set-point designs and is required there.
DesignResult design(const GameClass& cls, const ProblemSpec& problem,
                    const DesignOptions& opts = {}, const PayoffMatrix* payoff = nullptr);

} // namespace egt
