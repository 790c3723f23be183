#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/grid.hpp"
#include "core/integrator.hpp"
#include "core/operators.hpp"
#include "core/rng.hpp"
#include "core/variational.hpp"

using namespace conewave;

namespace {

ModelParams make_model(const GridPtr& g, double p, double m, double gamma,
                       PotentialTag tag, double gconst) {
    ModelParams mp;
    mp.p = p;
    mp.m = m;
    mp.gamma = gamma;
    mp.potential_tag = tag;
    if (tag != PotentialTag::None) mp.potential = potential_field(g, tag);
    if (gconst > 0.0) {
        mp.g = Field(g);
        for (double& x : mp.g.v) x = gconst;
        mp.alpha = mp.beta = gconst;
    } else {
        mp.alpha = mp.beta = 0.0;
    }
    return mp;
}

WellConstants linear_constants(const GridPtr& g) {
    WellConstants wc;
    wc.lambda1 = smallest_eigenpair(g).lambda1;
    wc.embedding_const = 0.0;
    wc.hardy_const = 0.0;
    wc.c1 = wc.c2 = 1.0;
    wc.d = std::numeric_limits<double>::infinity();
    return wc;
}

} // namespace

TEST_CASE("stability limit formula") {
    GridPtr g = build_grid(GridSpec{});
    const double want = 2.0 / std::sqrt(4.0 / (g->hs * g->hs) + 4.0 * 2.0 / (g->hx * g->hx));
    CHECK(cfl_limit(*g) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("damping solve: closed forms and pinned root") {
    CHECK(damping_solve(3.0, 0.5, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    // m = 3, dt = 1: x + x^2 = 2 has the root x = 1.
    CHECK(damping_solve(2.0, 1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(damping_solve(0.0, 1.0, 3.0) == 0.0);
    CHECK(damping_solve(5.0, 0.0, 3.0) == 5.0);
}

TEST_CASE("damping solve satisfies the implicit update across regimes") {
    for (double m : {2.0, 2.5, 3.0, 4.0, 6.0}) {
        for (double dt : {1e-3, 0.1, 1.0, 10.0}) {
            for (double vp : {1e-15, 1e-6, 0.5, 3.0, 100.0}) {
                const double v = damping_solve(vp, dt, m);
                CHECK(std::fabs(v) <= vp * (1.0 + 1e-12));
                const double resid = v + dt * std::pow(std::fabs(v), m - 2.0) * v - vp;
                CHECK(std::fabs(resid) <= 1e-12 * vp);
                // Odd in the predicted velocity.
                CHECK(damping_solve(-vp, dt, m) == doctest::Approx(-v).epsilon(1e-15));
            }
        }
    }
    CHECK_THROWS_AS(damping_solve(1.0, -0.1, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(damping_solve(1.0, 0.1, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(damping_solve(1.0, 0.1, 3.0, 0.0), std::invalid_argument);
}

TEST_CASE("damping flow: closed forms, semigroup, contraction") {
    CHECK(damping_flow(2.0, 0.7, 2.0) == doctest::Approx(2.0 * std::exp(-0.7)).epsilon(1e-15));
    // m = 4: v / sqrt(1 + 2 v^2 h).
    CHECK(damping_flow(3.0, 0.5, 4.0) ==
          doctest::Approx(3.0 / std::sqrt(1.0 + 2.0 * 9.0 * 0.5)).epsilon(1e-14));
    for (double m : {2.0, 3.0, 4.0, 5.5}) {
        for (double v0 : {-4.0, -0.3, 0.2, 7.0}) {
            const double two = damping_flow(damping_flow(v0, 0.3, m), 0.5, m);
            const double one = damping_flow(v0, 0.8, m);
            CHECK(two == doctest::Approx(one).epsilon(1e-12));
            CHECK(std::fabs(damping_flow(v0, 0.8, m)) < std::fabs(v0));
            CHECK(damping_flow(v0, 0.8, m) * v0 > 0.0); // sign preserved
        }
    }
    // The flow saturates: huge velocities collapse to an amplitude set by h alone.
    const double a = damping_flow(1e8, 0.25, 4.0);
    const double b = damping_flow(1e12, 0.25, 4.0);
    CHECK(a == doctest::Approx(1.0 / std::sqrt(2.0 * 0.25)).epsilon(1e-7));
    CHECK(b == doctest::Approx(a).epsilon(1e-7));
}

TEST_CASE("scheme validation rejects bad parameters") {
    GridPtr g = build_grid(GridSpec{});
    WellConstants wc = linear_constants(g);
    ModelParams mp = make_model(g, 3.0, 2.0, 0.0, PotentialTag::None, 0.0);
    Field u0(g), u1(g);
    u0.v[0] = 1.0;

    SchemeParams s;
    s.dt = 0.01;
    s.t_max = 1.0;
    s.blowup_cap = 100.0;
    CHECK_NOTHROW(run_simulation(u0, u1, s, mp, wc, 1));

    SchemeParams bad = s;
    bad.dt = 0.0;
    CHECK_THROWS_AS(run_simulation(u0, u1, bad, mp, wc, 1), std::invalid_argument);
    bad = s;
    bad.t_max = 0.0;
    CHECK_THROWS_AS(run_simulation(u0, u1, bad, mp, wc, 1), std::invalid_argument);
    bad = s;
    bad.blowup_cap = 0.0;
    CHECK_THROWS_AS(run_simulation(u0, u1, bad, mp, wc, 1), std::invalid_argument);
    bad = s;
    bad.cfl_safety = 1.5;
    CHECK_THROWS_AS(run_simulation(u0, u1, bad, mp, wc, 1), std::invalid_argument);
    bad = s;
    bad.dt = 10.0; // far beyond the stability limit
    CHECK_THROWS_AS(run_simulation(u0, u1, bad, mp, wc, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_simulation(u0, u1, s, mp, wc, 0), std::invalid_argument);
}

TEST_CASE("linear eigenmode run tracks the damped oscillator") {
    GridPtr g = build_grid(GridSpec{});
    const EigenPair ep = smallest_eigenpair(g);
    WellConstants wc = linear_constants(g);
    ModelParams mp = make_model(g, 3.0, 2.0, 0.0, PotentialTag::None, 0.0);

    Field u0 = ep.omega1;
    field_scale(u0, 0.7);
    Field u1(g);

    SchemeParams s;
    s.dt = 1e-3;
    s.t_max = 1.0;
    s.blowup_cap = 100.0;
    const SimResult r = run_simulation(u0, u1, s, mp, wc, 100);
    REQUIRE(r.outcome == RunOutcome::CompletedHorizon);

    const double lam = ep.lambda1;
    const double om = std::sqrt(lam - 0.25);
    double worst = 0.0;
    for (const SeriesRow& row : r.series.rows) {
        const double t = row.t;
        const double phi = std::exp(-0.5 * t) *
                           (std::cos(om * t) + 0.5 / om * std::sin(om * t));
        worst = std::max(worst, std::fabs(row.L2 - 0.7 * std::fabs(phi)));
    }
    CHECK(worst <= 1e-4 * 0.7);
}

TEST_CASE("a non-finite step leaves the state untouched") {
    GridPtr g = build_grid(GridSpec{});
    ModelParams mp = make_model(g, 4.0, 2.0, 0.0, PotentialTag::None, 1.0);
    SimState st;
    st.u = Field(g);
    st.v = Field(g);
    for (double& x : st.u.v) x = 1e130; // |u|^2 u overflows
    st.t = 3.0;
    const std::vector<double> u_before = st.u.v;
    CHECK(step(st, 0.01, mp) == StepStatus::NonFinite);
    CHECK(st.t == 3.0);
    CHECK(st.u.v == u_before);
    for (double x : st.v.v) CHECK(x == 0.0);
}

TEST_CASE("energy identity residual shrinks at second order") {
    GridPtr g = build_grid(GridSpec{});
    const EigenPair ep = smallest_eigenpair(g);
    WellConstants wc = linear_constants(g);
    ModelParams mp = make_model(g, 3.0, 2.0, 0.0, PotentialTag::None, 0.0);

    Field u0 = ep.omega1;
    Field u1(g);
    auto max_resid = [&](double dt) {
        SchemeParams s;
        s.dt = dt;
        s.t_max = 2.0;
        s.blowup_cap = 100.0;
        const SimResult r = run_simulation(u0, u1, s, mp, wc, 1);
        double worst = 0.0;
        for (double x : energy_balance_residual(r.series)) worst = std::max(worst, std::fabs(x));
        return worst;
    };
    const double r1 = max_resid(0.04);
    const double r2 = max_resid(0.02);
    const double r4 = max_resid(0.01);
    CHECK(r1 / r2 >= 3.5);
    CHECK(r2 / r4 >= 3.5);
}

TEST_CASE("energy is dissipated monotonically up to the identity residual") {
    GridPtr g = build_grid(GridSpec{});
    const EigenPair ep = smallest_eigenpair(g);
    ModelParams mp = make_model(g, 3.0, 3.0, 0.0, PotentialTag::None, 1.0);
    WellConstants wc = compute_well_constants(g, mp, 40, 5);

    Field u0 = ep.omega1;
    field_scale(u0, 0.2);
    Field u1 = ep.omega1;
    field_scale(u1, 0.1);

    SchemeParams s;
    s.dt = 0.05;
    s.t_max = 5.0;
    s.blowup_cap = 1e6;
    const SimResult r = run_simulation(u0, u1, s, mp, wc, 1);
    REQUIRE(r.outcome == RunOutcome::CompletedHorizon);

    double band = 1e-12;
    for (double x : energy_balance_residual(r.series)) band = std::max(band, std::fabs(x));
    for (std::size_t k = 1; k < r.series.rows.size(); ++k)
        CHECK(r.series.rows[k].E <= r.series.rows[k - 1].E + 2.0 * band);
    // The damping integral is nonnegative and nondecreasing.
    for (std::size_t k = 1; k < r.series.rows.size(); ++k)
        CHECK(r.series.rows[k].damping_integral >= r.series.rows[k - 1].damping_integral);
}

TEST_CASE("supercritical eigenmode data blows up, insensitive to the cap") {
    GridPtr g = build_grid(GridSpec{});
    const EigenPair ep = smallest_eigenpair(g);
    ModelParams mp = make_model(g, 4.0, 2.0, 0.0, PotentialTag::None, 1.0);
    WellConstants wc = compute_well_constants(g, mp, 40, 5);

    const FiberScaling fs = lambda_star(ep.omega1, mp);
    REQUIRE(fs.status == FiberStatus::Ok);
    Field u0 = ep.omega1;
    field_scale(u0, 3.0 * fs.value); // far beyond the Nehari crossing
    Field u1(g);

    auto blowup_time = [&](double cap) {
        SchemeParams s;
        s.dt = 0.02;
        s.t_max = 50.0;
        s.blowup_cap = cap;
        const SimResult r = run_simulation(u0, u1, s, mp, wc, 1);
        REQUIRE(r.outcome == RunOutcome::Blowup);
        CHECK((r.blowup_trigger == "cap" || r.blowup_trigger == "nonfinite"));
        CHECK(r.blowup_time > 0.0);
        return r.blowup_time;
    };
    const double t1 = blowup_time(1e5);
    const double t2 = blowup_time(1e6);
    CHECK(std::fabs(t1 - t2) <= 0.05 * std::max(t1, t2));
}

TEST_CASE("overdamped large-amplitude run stays finite via stiffness refinement") {
    GridPtr g = build_grid(GridSpec{});
    const EigenPair ep = smallest_eigenpair(g);
    ModelParams mp = make_model(g, 3.0, 4.0, 0.0, PotentialTag::None, 1.0);
    WellConstants wc = compute_well_constants(g, mp, 40, 5);

    Field u0 = ep.omega1;
    field_scale(u0, 500.0);
    Field u1(g);

    SchemeParams s;
    s.dt = 0.5 * cfl_limit(*g);
    s.cfl_safety = 0.5;
    s.t_max = 2.0;
    s.blowup_cap = 1e9;
    const SimResult r = run_simulation(u0, u1, s, mp, wc, 10);
    CHECK(r.outcome == RunOutcome::CompletedHorizon);
    // The nonlinear stability rule forces more steps than t_max/dt.
    CHECK(r.steps_taken > static_cast<std::uint64_t>(s.t_max / s.dt) + 10);
    const double E0 = r.series.rows.front().E;
    for (const SeriesRow& row : r.series.rows) CHECK(row.E <= E0 + 1e-6 * std::fabs(E0));
}

TEST_CASE("paired runs: degenerate and perturbed probes") {
    GridPtr g = build_grid(GridSpec{});
    const EigenPair ep = smallest_eigenpair(g);
    ModelParams mp = make_model(g, 3.0, 2.0, 0.0, PotentialTag::None, 0.0);

    Field u0 = ep.omega1;
    Field u1(g);

    SchemeParams s;
    s.dt = 0.01;
    s.t_max = 4.0;
    s.blowup_cap = 1e6;

    const ProbeReport same = continuous_dependence_probe(u0, u1, u0, u1, s, mp, 10);
    CHECK(same.degenerate);

    Field u0b = ep.omega1;
    field_scale(u0b, 1.0 + 1e-6);
    const ProbeReport rep = continuous_dependence_probe(u0, u1, u0b, u1, s, mp, 10);
    REQUIRE(!rep.degenerate);
    REQUIRE(!rep.truncated);
    CHECK(rep.gap0 > 0.0);
    // The gap difference solves the same linear damped equation, so both
    // rates sit near -1/2 and certify contraction.
    CHECK(rep.fitted_rate == doctest::Approx(-0.5).epsilon(0.2));
    CHECK(rep.certified_rate < 0.0);
    CHECK(rep.certified_rate >= rep.fitted_rate - 0.5);
}
