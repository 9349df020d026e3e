#pragma once

#include <optional>

#include "egt/errors.hpp"

namespace egt {

/// Symmetric 2x2 matrix game. Entry (i,j) is the row player's payoff for
/// choosing action i against an opponent playing action j:
///
///     A = [ a  b ]   a = payoff(1 vs 1), b = payoff(1 vs 2)
///         [ c  d ]   c = payoff(2 vs 1), d = payoff(2 vs 2)
struct PayoffMatrix {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// Strict sign-pattern classes of 2x2 symmetric games.
enum class GameClassTag {
    Coordination,     ///< d>b and a>c: two stable consensus equilibria
    DominantAction1,  ///< d<b and a>c: everyone ends up playing action 1
    DominantAction2,  ///< d>b and a<c: everyone ends up playing action 2
    AntiCoordination, ///< d<b and a<c: stable interior mixed equilibrium
    Degenerate,       ///< a==c or d==b: outside the strict classification
};

struct GameClass {
    GameClassTag tag = GameClassTag::Degenerate;
    /// Interior equilibrium (d-b)/(a+d-b-c); present exactly for
    /// Coordination and AntiCoordination, always in (0,1).
    std::optional<double> mixed_ne;
};

/// Average rewards of the two actions at population state x.
struct RewardPair {
    double r1 = 0.0;
    double r2 = 0.0;
};

const char* to_string(GameClassTag tag);

/// Classification is a pure function of the sign pattern of (a-c, d-b).
/// Comparisons are exact; payoffs are inputs, not measurements.
GameClass classify(const PayoffMatrix& m);

/// r1 = a*x + b*(1-x), r2 = c*x + d*(1-x). Throws DomainError for x outside [0,1].
RewardPair rewards(const PayoffMatrix& m, double x);

/// Right-hand side x(1-x)((a+d-b-c)x + b-d) of the imitation dynamics.
/// Exactly zero at x=0 and x=1.
double replicator_rhs(const PayoffMatrix& m, double x);

/// Analytic asymptotic value of the uncontrolled dynamics started at x0.
/// Throws UnsupportedClassError for degenerate games.
double uncontrolled_limit(const PayoffMatrix& m, double x0);

/// Relabels the two actions: (a,b,c,d) -> (d,c,b,a). Population state maps
/// as x -> 1-x; used to derive every mirrored design from the base one.
PayoffMatrix swap_actions(const PayoffMatrix& m);

} // namespace egt
