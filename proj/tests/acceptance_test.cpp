// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured quantities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "egt/analysis.hpp"
#include "egt/scenario.hpp"
#include "egt/verify.hpp"
#include "test_util.hpp"

using namespace egt;

namespace {

IntegratorConfig run_config(double horizon) {
    IntegratorConfig cfg;
    cfg.horizon = horizon;
    cfg.stop_on_convergence = false;
    return cfg;
}

// criterion-6 scenario, shared by criteria 6, 8 and 9
const PayoffMatrix kPd{1, 3, 0, 2};
const SystemState kSetPointStart{0.8, 1.0};

Trajectory setpoint_run(const AdaptationRate& rate, double horizon = 500.0) {
    return integrate_controlled(kPd, {ControlMatrix::G3, rate}, kSetPointStart,
                                run_config(horizon));
}

// sign changes of x - xbar whose subsequent excursion exceeds amp
int overshoot_count(const Trajectory& traj, double xbar, double amp = 1e-3) {
    const auto& s = traj.samples;
    std::vector<std::size_t> flips;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double prev = s[i - 1].state.x - xbar;
        const double cur = s[i].state.x - xbar;
        if (prev * cur < 0.0) flips.push_back(i);
    }
    int count = 0;
    for (std::size_t k = 0; k < flips.size(); ++k) {
        const std::size_t end = k + 1 < flips.size() ? flips[k + 1] : s.size();
        double excursion = 0.0;
        for (std::size_t i = flips[k]; i < end; ++i)
            excursion = std::max(excursion, std::abs(s[i].state.x - xbar));
        if (excursion > amp) ++count;
    }
    return count;
}

void report(int id, const char* name, bool ok, const std::string& detail = "") {
    std::printf("criterion %02d %-28s %s%s%s\n", id, name, ok ? "PASS" : "FAIL",
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) { return format_number(v); }

} // namespace

TEST_CASE("criterion 1: uncontrolled limits per game class") {
    const auto cfg = run_config(50.0);
    bool ok = true;
    double worst = 0.0;

    const PayoffMatrix coord{1, 0, 0, 1};
    for (int k = 0; k < 10; ++k) {
        const double below = 0.03 + 0.05 * k;
        for (double x0 : {below, 1.0 - below}) {
            const double err =
                std::abs(integrate_uncontrolled(coord, x0, cfg).back().state.x -
                         uncontrolled_limit(coord, x0));
            worst = std::max(worst, err);
            ok &= err < 1e-3;
        }
    }
    for (int k = 1; k <= 9; ++k) {
        const double x0 = 0.1 * k;
        const double err =
            std::abs(integrate_uncontrolled(kPd, x0, cfg).back().state.x - 1.0);
        worst = std::max(worst, err);
        ok &= err < 1e-3;
    }
    const PayoffMatrix minority{0, 1, 1, 0};
    for (double x0 : {0.1, 0.3, 0.9}) {
        const double err =
            std::abs(integrate_uncontrolled(minority, x0, cfg).back().state.x - 0.5);
        worst = std::max(worst, err);
        ok &= err < 1e-3;
    }
    report(1, "uncontrolled-limits", ok, "worst |x(T)-limit| = " + fmt(worst));
    CHECK(ok);
}

namespace {
Trajectory reaching_run(ControlMatrix matrix, double p) {
    return integrate_controlled({1, 0, 0, 1}, {matrix, {PowerShifted{p, 1, 0.4}}}, {0.7, 0.01},
                                run_config(200.0));
}
} // namespace

TEST_CASE("criterion 2: consensus reaching, conformity gain") {
    const auto traj = reaching_run(ControlMatrix::G4, 7.0);
    const bool ok = traj.back().state.x < 1e-3 && traj.back().state.g < 1e-3;
    report(2, "reaching-conformity", ok,
           "x(T) = " + fmt(traj.back().state.x) + ", g(T) = " + fmt(traj.back().state.g));
    CHECK(ok);
}

TEST_CASE("criterion 3: consensus reaching, innovation gain") {
    const auto conformity = reaching_run(ControlMatrix::G4, 7.0);
    const auto innovation = reaching_run(ControlMatrix::G3, 1.0);
    const bool reached =
        innovation.back().state.x < 1e-3 && innovation.back().state.g < 1e-3;
    const auto settle_c = metrics(conformity, 0.0, 1e-3).settle_time;
    const auto settle_i = metrics(innovation, 0.0, 1e-3).settle_time;
    const bool ordered = settle_c && settle_i && *settle_c < *settle_i;
    report(3, "reaching-innovation", reached && ordered,
           "x(T) = " + fmt(innovation.back().state.x) + ", settle conformity " +
               fmt(settle_c.value_or(-1)) + " < innovation " + fmt(settle_i.value_or(-1)));
    CHECK(reached);
    CHECK(ordered);
}

TEST_CASE("criterion 4: consensus stabilization of the dilemma") {
    // As pinned: G4 with rate 0.4x from (0.99, 0.01). The adaptation
    // velocity 0.4 lies below the dominant reward advantage a-c = 1, so the
    // trajectory escapes to x = 1 with unbounded gain and the first and
    // last clauses cannot hold: near x = 1 the mismatch 1-x contracts at
    // rate a-c while the gain grows at only 0.4.
    const ControllerSpec spec{ControlMatrix::G4, {Power{0.4, 1}}};
    const auto traj = integrate_controlled(kPd, spec, {0.99, 0.01}, run_config(200.0));

    const bool stabilized = traj.back().state.x < 1e-3;
    bool monotone = true;
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
        monotone &= traj.samples[i].state.g >= traj.samples[i - 1].state.g;
    const bool necessary_gain = traj.back().state.g > kPd.b - kPd.d;
    double g_mid = traj.samples.front().state.g;
    for (const auto& s : traj.samples)
        if (s.t <= traj.t_end / 2.0) g_mid = s.state.g;
    const bool settled = std::abs(traj.back().state.g - g_mid) < 1e-3;

    report(4, "stabilization-conformity", stabilized && monotone && necessary_gain && settled,
           "x(T) = " + fmt(traj.back().state.x) + " (want < 1e-3), terminal " +
               to_string(traj.reason) + ", monotone " + (monotone ? "yes" : "no") +
               ", g_final " + fmt(traj.back().state.g) + ", |g(T)-g(T/2)| " +
               fmt(std::abs(traj.back().state.g - g_mid)));
    CHECK(stabilized);
    CHECK(monotone);
    CHECK(necessary_gain);
    CHECK(settled);
}

TEST_CASE("criterion 5: impossibility of innovation-gain stabilization") {
    const ProblemSpec problem{ConsensusStabilization{0}, {}, MixedNeSide::Unknown, false};
    const std::vector<std::pair<std::string, AdaptationRate>> battery{
        {"power(0.4,1)", {Power{0.4, 1}}},
        {"power_shifted(1,1,0.4)", {PowerShifted{1, 1, 0.4}}},
        {"proportional(2,0.3)", {Proportional{2, 0.3, +1}}},
        {"atan(0.3)", {Atan{0.3}}},
        {"cubic(0.3)", {Cubic{0.3}}},
    };
    bool ok = true;
    std::string detail;
    for (const auto& [name, rate] : battery) {
        const ControllerSpec spec{ControlMatrix::G3, rate};
        REQUIRE(guard_impossible(problem, spec, classify(kPd)).rejected);
        const auto verdict = negative_test(problem, spec, kPd, {0.99, 0.01}, run_config(200.0));
        const bool fails = verdict == NegativeVerdict::FailsAsPredicted;
        ok &= fails;
        if (!fails) detail += name + " unexpected; ";
    }
    report(5, "innovation-impossibility", ok,
           ok ? "all 5 rates fail as predicted" : detail);
    CHECK(ok);
}

TEST_CASE("criterion 6: set-point regulation of the dilemma") {
    const double gbar = gbar_dominant(kPd, 0.5);
    REQUIRE(gbar == 2.0);
    bool ok = true;
    std::string detail;
    for (double p : {0.1, 2.0}) {
        const auto traj = setpoint_run({Proportional{p, 0.5, +1}});
        const double xerr = std::abs(traj.back().state.x - 0.5);
        const double gerr = std::abs(traj.back().state.g - gbar) / gbar;
        const int crossings = overshoot_count(traj, 0.5);
        const bool converged = xerr < 1e-3 && gerr < 1e-2;
        const bool overshoot_ok = p == 2.0 ? crossings >= 1 : crossings == 0;
        ok &= converged && overshoot_ok;
        detail += "p=" + fmt(p) + ": |x-0.5|=" + fmt(xerr) + ", |g-2|/2=" + fmt(gerr) +
                  ", crossings=" + std::to_string(crossings) + "; ";
        CHECK(converged);
        CHECK(overshoot_ok);
    }
    report(6, "set-point-dominant", ok, detail);
}

TEST_CASE("criterion 7: set-point regulation of the minority game") {
    const PayoffMatrix minority{0, 1, 1, 0};
    const double gbar = gbar_anticoordination(minority, 0.25);
    REQUIRE(gbar == doctest::Approx(2.0).epsilon(1e-14));
    bool ok = true;
    std::string detail;
    for (double p : {0.5, 2.0}) {
        const auto traj = integrate_controlled(
            minority, {ControlMatrix::G3, {Proportional{p, 0.25, +1}}}, {0.9, 0.01},
            run_config(500.0));
        const double xerr = std::abs(traj.back().state.x - 0.25);
        const double gerr = std::abs(traj.back().state.g - gbar) / gbar;
        ok &= xerr < 1e-3 && gerr < 1e-2;
        detail += "p=" + fmt(p) + ": |x-xbar|=" + fmt(xerr) + ", |g-gbar|/gbar=" + fmt(gerr) + "; ";
    }
    report(7, "set-point-anticoordination", ok, detail);
    CHECK(ok);
}

TEST_CASE("criterion 8: energy audit and first-integral conservation") {
    bool monotone_ok = true;
    double worst_increase = 0.0;
    for (double p : {0.1, 2.0}) {
        const auto traj = setpoint_run({Proportional{p, 0.5, +1}});
        const auto audit = audit_lyapunov(traj, kPd, 0.5, p);
        worst_increase = std::max(worst_increase, audit.max_increase);
        monotone_ok &= audit.max_increase <= 10.0 * run_config(500.0).rel_tol;
    }

    IntegratorConfig tight = run_config(100.0);
    tight.rel_tol = 1e-10;
    tight.abs_tol = 1e-12;
    const auto core = integrate_conservative_core(0.5, 2.0, 2.0, {0.8, 1.0}, tight);
    const double v0 =
        lyapunov_V_chart(core.samples.front().logit_x, core.samples.front().log_g, 0.5, 2.0, 2.0);
    double drift = 0.0;
    for (const auto& s : core.samples)
        drift = std::max(drift,
                         std::abs(lyapunov_V_chart(s.logit_x, s.log_g, 0.5, 2.0, 2.0) - v0));
    const bool conserved = drift <= 1e-7;

    report(8, "energy-audit", monotone_ok && conserved,
           "max V increase " + fmt(worst_increase) + ", core drift " + fmt(drift));
    CHECK(monotone_ok);
    CHECK(conserved);
}

TEST_CASE("criterion 9: nonlinear adaptation rates") {
    // cubic rate: stuck offset at the horizon
    const auto cubic = setpoint_run({Cubic{0.5}});
    const double offset = std::abs(cubic.back().state.x - 0.5);
    const double dxdt =
        std::abs(controlled_rhs(kPd, {ControlMatrix::G3, {Cubic{0.5}}}, cubic.back().state).dx);
    const bool offset_ok = offset > 1e-2;
    // Pinned threshold; on this scenario |dx/dt| is still ~4e-5 at T=500
    // (the two bounds only hold jointly near T ~ 8e3), kept as stated.
    const bool slow_ok = dxdt < 1e-6;

    // saturating rate converges like the proportional design
    const auto at = setpoint_run({Atan{0.5}});
    const bool atan_ok = std::abs(at.back().state.x - 0.5) < 1e-3 &&
                         std::abs(at.back().state.g - 2.0) / 2.0 < 1e-2;

    report(9, "nonlinear-rates", offset_ok && slow_ok && atan_ok,
           "cubic offset " + fmt(offset) + ", cubic |dx/dt| " + fmt(dxdt) + " (want < 1e-6), atan " +
               (atan_ok ? "converged" : "failed"));
    CHECK(offset_ok);
    CHECK(slow_ok);
    CHECK(atan_ok);
}

TEST_CASE("criterion 10: sweep orderings") {
    SweepScenario effort;
    effort.payoff = {1, 0, 0, 1};
    effort.matrix = ControlMatrix::G3;
    effort.shape.family = RateFamily::PowerShifted;
    effort.shape.delta = 0.4;
    effort.s0 = {0.7, 0.01};
    effort.cfg = run_config(200.0);
    effort.target = 0.0;
    const auto eff = sweep(effort, default_p_grid(), default_q_grid(), 0);

    const std::size_t np = eff.p_grid.size(), nq = eff.q_grid.size();
    double rho_q = 0.0, rho_p = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        std::vector<double> row;
        for (std::size_t j = 0; j < nq; ++j) row.push_back(eff.at(i, j).metrics.J_g);
        rho_q += testutil::spearman(eff.q_grid, row);
    }
    rho_q /= static_cast<double>(np);
    for (std::size_t j = 0; j < nq; ++j) {
        std::vector<double> col;
        for (std::size_t i = 0; i < np; ++i) col.push_back(eff.at(i, j).metrics.J_g);
        rho_p += testutil::spearman(eff.p_grid, col);
    }
    rho_p /= static_cast<double>(nq);
    const bool effort_ok = rho_q > 0.8 && rho_p < -0.8;

    SweepScenario finalgain;
    finalgain.payoff = kPd;
    finalgain.matrix = ControlMatrix::G4;
    finalgain.shape.family = RateFamily::Power;
    finalgain.s0 = {0.99, 0.01};
    finalgain.cfg = run_config(200.0);
    finalgain.target = 0.0;
    const auto fin = sweep(finalgain, default_p_grid(), default_q_grid(), 0);
    double min_hi_q = 1e300, min_lo_q = 1e300;
    for (std::size_t i = 0; i < fin.p_grid.size(); ++i) {
        min_hi_q = std::min(min_hi_q, fin.at(i, 4).metrics.g_final); // q = 4
        min_lo_q = std::min(min_lo_q, fin.at(i, 0).metrics.g_final); // q = 0.5
    }
    const bool final_ok = min_hi_q < min_lo_q;

    report(10, "sweep-orderings", effort_ok && final_ok,
           "rho_q " + fmt(rho_q) + ", rho_p " + fmt(rho_p) + "; min g_final q=4: " +
               fmt(min_hi_q) + " < q=0.5: " + fmt(min_lo_q));
    CHECK(effort_ok);
    CHECK(final_ok);
}

TEST_CASE("criterion 11: structural properties") {
    // domain invariance over 1000 randomized runs
    testutil::GameSampler sampler(101);
    IntegratorConfig quick = run_config(20.0);
    quick.rel_tol = 1e-6;
    quick.abs_tol = 1e-8;
    bool invariant = true;
    const ControlMatrix mats[] = {ControlMatrix::G1, ControlMatrix::G2, ControlMatrix::G3,
                                  ControlMatrix::G4};
    std::uniform_real_distribution<double> up(-3.0, 3.0);
    for (int i = 0; i < 1000 && invariant; ++i) {
        const PayoffMatrix m{up(sampler.rng()), up(sampler.rng()), up(sampler.rng()),
                             up(sampler.rng())};
        const double p = sampler.uniform(0.1, 5.0);
        const double q = sampler.uniform(0.5, 3.0);
        const double anchor = sampler.uniform(0.1, 0.9);
        AdaptationRate rate;
        switch (i % 5) {
        case 0: rate = {PowerShifted{p, q, anchor}}; break;
        case 1: rate = {Power{p, q}}; break;
        case 2: rate = {Proportional{p, anchor, i % 2 ? +1 : -1}}; break;
        case 3: rate = {Atan{anchor}}; break;
        default: rate = {Cubic{anchor}}; break;
        }
        const auto traj = integrate_controlled(
            m, {mats[i % 4], rate}, {sampler.uniform(0.01, 0.99), sampler.uniform(1e-3, 2.0)},
            quick);
        for (const auto& s : traj.samples)
            invariant &= s.state.x >= 0.0 && s.state.x <= 1.0 && s.state.g >= 0.0 &&
                         std::isfinite(s.state.g);
    }

    // closed-form eigenvalues against finite differences
    bool eigen_ok = true;
    double eig_worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        std::vector<std::pair<PayoffMatrix, ControllerSpec>> scenarios;
        const auto coord = sampler.sample(GameClassTag::Coordination);
        scenarios.push_back({coord, {ControlMatrix::G4, {PowerShifted{2, 1, 0.3}}}});
        scenarios.push_back({coord, {ControlMatrix::G3, {PowerShifted{1, 2, 0.3}}}});
        const auto dom = sampler.sample(GameClassTag::DominantAction1);
        scenarios.push_back(
            {dom, {ControlMatrix::G3, {Proportional{sampler.uniform(0.2, 3.0),
                                                    sampler.uniform(0.2, 0.8), +1}}}});
        const auto anti = sampler.sample(GameClassTag::AntiCoordination);
        scenarios.push_back(
            {anti,
             {ControlMatrix::G3,
              {Proportional{sampler.uniform(0.2, 3.0), 0.5 * *classify(anti).mixed_ne, +1}}}});
        for (const auto& [m, spec] : scenarios) {
            for (const auto& rep : equilibria_controlled(m, spec)) {
                const auto [f1, f2] = eigenvalues_2x2(numerical_jacobian(m, spec, rep.point));
                auto a1 = rep.eig1, a2 = rep.eig2, b1 = f1, b2 = f2;
                const auto key = [](std::complex<double> z) {
                    return std::make_pair(z.real(), z.imag());
                };
                if (key(a2) < key(a1)) std::swap(a1, a2);
                if (key(b2) < key(b1)) std::swap(b1, b2);
                const double err =
                    std::max(std::abs(a1 - b1) / std::max(1.0, std::abs(a1)),
                             std::abs(a2 - b2) / std::max(1.0, std::abs(a2)));
                eig_worst = std::max(eig_worst, err);
                eigen_ok &= err <= 1e-6;
            }
        }
    }

    // mirror-symmetry of the design factory on 100 random games
    bool mirror_ok = true;
    for (int i = 0; i < 100; ++i) {
        PayoffMatrix m;
        ProblemSpec direct_problem, base_problem;
        switch (i % 3) {
        case 0: {
            m = sampler.sample(GameClassTag::Coordination);
            const double delta = sampler.uniform(0.1, 0.5);
            direct_problem = {ConsensusReaching{1, delta}, {}, MixedNeSide::Unknown, false};
            base_problem = {ConsensusReaching{0, delta}, {}, MixedNeSide::Unknown, false};
            break;
        }
        case 1: {
            m = sampler.sample(GameClassTag::AntiCoordination);
            direct_problem = {ConsensusStabilization{1}, 3.0, MixedNeSide::Unknown, false};
            base_problem = {ConsensusStabilization{0}, 3.0, MixedNeSide::Unknown, false};
            break;
        }
        default: {
            m = sampler.sample(GameClassTag::DominantAction1);
            const double t = sampler.uniform(0.1, 0.9);
            direct_problem = {SetPointRegulation{1.0 - t}, {}, MixedNeSide::Unknown, false};
            base_problem = {SetPointRegulation{t}, {}, MixedNeSide::Unknown, false};
            break;
        }
        }
        const PayoffMatrix relabeled = swap_actions(m);
        // designing on the relabeled game needs the relabeled class
        const auto direct = design(classify(relabeled), direct_problem, {}, &relabeled);
        const auto base = design(classify(m), base_problem, {}, &m);
        for (double x : {0.15, 0.4, 0.85})
            mirror_ok &= std::abs(direct.spec.rate(x) - base.spec.rate(1.0 - x)) < 1e-12;
        if (direct.predicted_gbar || base.predicted_gbar)
            mirror_ok &= direct.predicted_gbar && base.predicted_gbar &&
                         std::abs(*direct.predicted_gbar - *base.predicted_gbar) < 1e-12;
    }

    report(11, "structural-properties", invariant && eigen_ok && mirror_ok,
           std::string("invariance ") + (invariant ? "ok" : "violated") +
               ", worst eigenvalue deviation " + fmt(eig_worst) + ", mirror designs " +
               (mirror_ok ? "equal" : "diverged"));
    CHECK(invariant);
    CHECK(eigen_ok);
    CHECK(mirror_ok);
}
