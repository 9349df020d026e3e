#include "egt/game.hpp"

#include <cmath>

namespace egt {

const char* to_string(GameClassTag tag) {
    switch (tag) {
    case GameClassTag::Coordination: return "coordination";
    case GameClassTag::DominantAction1: return "dominant-action-1";
    case GameClassTag::DominantAction2: return "dominant-action-2";
    case GameClassTag::AntiCoordination: return "anti-coordination";
    case GameClassTag::Degenerate: return "degenerate";
    }
    return "?";
}

namespace {

void require_finite(const PayoffMatrix& m) {
    if (!std::isfinite(m.a) || !std::isfinite(m.b) || !std::isfinite(m.c) || !std::isfinite(m.d))
        throw DomainError("payoff entries must be finite");
}

void require_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError(std::string(what) + " must lie in [0,1]");
}

} // namespace

GameClass classify(const PayoffMatrix& m) {
    require_finite(m);
    if (m.a == m.c || m.d == m.b) return {GameClassTag::Degenerate, std::nullopt};
    const bool a1 = m.a > m.c; // action 1 best reply to action 1
    const bool a2 = m.d > m.b; // action 2 best reply to action 2
    if (a1 && a2) {
        const double xs = (m.d - m.b) / (m.a + m.d - m.b - m.c);
        return {GameClassTag::Coordination, xs};
    }
    if (a1 && !a2) return {GameClassTag::DominantAction1, std::nullopt};
    if (!a1 && a2) return {GameClassTag::DominantAction2, std::nullopt};
    const double xs = (m.d - m.b) / (m.a + m.d - m.b - m.c);
    return {GameClassTag::AntiCoordination, xs};
}

RewardPair rewards(const PayoffMatrix& m, double x) {
    require_finite(m);
    require_unit_interval(x, "x");
    return {m.a * x + m.b * (1.0 - x), m.c * x + m.d * (1.0 - x)};
}

double replicator_rhs(const PayoffMatrix& m, double x) {
    require_finite(m);
    require_unit_interval(x, "x");
    return x * (1.0 - x) * ((m.a + m.d - m.b - m.c) * x + m.b - m.d);
}

double uncontrolled_limit(const PayoffMatrix& m, double x0) {
    require_unit_interval(x0, "x0");
    const GameClass cls = classify(m);
    switch (cls.tag) {
    case GameClassTag::Coordination: {
        const double xs = *cls.mixed_ne;
        // x0 == xs is the saddle; predicted exactly, measure zero in practice.
        if (x0 < xs) return 0.0;
        if (x0 > xs) return 1.0;
        return xs;
    }
    case GameClassTag::DominantAction1:
        return x0 > 0.0 ? 1.0 : 0.0;
    case GameClassTag::DominantAction2:
        return x0 < 1.0 ? 0.0 : 1.0;
    case GameClassTag::AntiCoordination:
        return (x0 > 0.0 && x0 < 1.0) ? *cls.mixed_ne : x0;
    case GameClassTag::Degenerate:
        break;
    }
    throw UnsupportedClassError("uncontrolled_limit: degenerate game has no strict classification");
}

PayoffMatrix swap_actions(const PayoffMatrix& m) {
    return {m.d, m.c, m.b, m.a};
}

} // namespace egt
