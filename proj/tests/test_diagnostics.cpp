#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/diagnostics.hpp"
#include "core/grid.hpp"
#include "core/integrator.hpp"
#include "core/operators.hpp"
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

SeriesRow row_at(double t, double E, double J, double I, double L2, WellLabel label) {
    SeriesRow r;
    r.t = t;
    r.E = E;
    r.J = J;
    r.I = I;
    r.L2 = L2;
    r.label = label;
    return r;
}

} // namespace

TEST_CASE("decay fit recovers an exact exponential tail") {
    EnergySeries s;
    for (int k = 0; k <= 120; ++k) {
        const double t = 0.25 * k;
        s.rows.push_back(row_at(t, 3.0 * std::exp(-0.7 * t), 0, 0, 1, WellLabel::InsideW));
    }
    const DecayReport r = fit_decay(s, 2.0);
    CHECK(r.mode == DecayMode::Exponential);
    CHECK(r.rate == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(r.amplitude == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.samples >= 55);
    // The window is the tail half of the usable records.
    CHECK(r.window_begin >= 14.9);
    CHECK(r.window_end == doctest::Approx(30.0));
}

TEST_CASE("decay fit recovers an exact power law in 1 + t") {
    EnergySeries s;
    for (int k = 0; k <= 200; ++k) {
        const double t = 0.5 * k;
        s.rows.push_back(row_at(t, 5.0 * std::pow(1.0 + t, -1.3), 0, 0, 1, WellLabel::InsideW));
    }
    const DecayReport r = fit_decay(s, 4.0);
    CHECK(r.mode == DecayMode::Algebraic);
    CHECK(r.rate == doctest::Approx(-1.3).epsilon(1e-9));
    CHECK(r.amplitude == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decay fit refuses starved windows") {
    EnergySeries s;
    for (int k = 0; k < 9; ++k)
        s.rows.push_back(row_at(k, std::exp(-0.1 * k), 0, 0, 1, WellLabel::InsideW));
    CHECK_THROWS_AS(fit_decay(s, 2.0), std::runtime_error);

    // Rows at or below the floor do not count as usable samples.
    EnergySeries dead;
    for (int k = 0; k < 40; ++k)
        dead.rows.push_back(row_at(k, k < 8 ? 1.0 / (k + 1) : 1e-13, 0, 0, 1, WellLabel::InsideW));
    CHECK_THROWS_AS(fit_decay(dead, 2.0), std::runtime_error);
}

TEST_CASE("difference-inequality majorant: pinned values") {
    // r = 0, k0 = 2: k1 = log 2, so phi(2) = phi0 / 2.
    CHECK(nakao_bound(1.0, 2.0, 0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    // Early times return the seed.
    CHECK(nakao_bound(1.0, 2.0, 0.0, 0.3) == 1.0);
    CHECK(nakao_bound(0.7, 0.5, 1.0, 1.0) == doctest::Approx(0.7).epsilon(1e-15));
    // r > 0 closed form: (phi0^-r + k0 r (t-1))^(-1/r).
    CHECK(nakao_bound(0.25, 0.5, 1.0, 3.0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("difference-inequality majorant dominates the extremal recurrence") {
    // phi_{k+1} = phi_k - phi_k^{1+r}/k0 realizes equality in the hypothesis;
    // the bound evaluated at t = k + 1 must stay above it.  For r > 0 that
    // holds on k0 <= 1 (where the stated constant arrangement is a true
    // majorant); for r = 0 the bound traces the recurrence exactly.
    for (auto [phi0, k0, r] : {std::tuple{0.25, 0.5, 1.0},
                               std::tuple{0.5, 1.0, 0.5},
                               std::tuple{0.25, 0.9, 0.7}}) {
        double phi = phi0;
        for (int k = 0; k < 300; ++k) {
            const double bound = nakao_bound(phi0, k0, r, k + 1.0);
            CHECK(bound >= phi - 1e-12);
            phi -= std::pow(phi, 1.0 + r) / k0;
            REQUIRE(phi > 0.0);
        }
    }
    // r = 0: phi_k = phi0 (1 - 1/k0)^k equals the bound at integer times.
    const double phi0 = 0.8, k0 = 3.0;
    double phi = phi0;
    for (int k = 0; k < 50; ++k) {
        CHECK(nakao_bound(phi0, k0, 0.0, k + 1.0) == doctest::Approx(phi).epsilon(1e-12));
        phi *= 1.0 - 1.0 / k0;
    }
}

TEST_CASE("difference-inequality majorant rejects bad parameters") {
    CHECK_THROWS_AS(nakao_bound(0.0, 2.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(nakao_bound(1.0, 0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(nakao_bound(1.0, 1.0, 0.0, 2.0), std::domain_error); // r = 0 needs k0 > 1
    CHECK_THROWS_AS(nakao_bound(1.0, 2.0, -0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(nakao_bound(1.0, 2.0, 0.5, -1.0), std::domain_error);
}

TEST_CASE("blow-up detection finds the first capped record") {
    SchemeParams scheme;
    scheme.blowup_cap = 1.0; // threshold 1024
    EnergySeries s;
    s.rows.push_back(row_at(0.0, 1, 0, 0, 10.0, WellLabel::InsideV));
    s.rows.push_back(row_at(1.0, 1, 0, 0, 900.0, WellLabel::InsideV));
    s.rows.push_back(row_at(2.0, 1, 0, 0, 1500.0, WellLabel::InsideV));
    s.rows.push_back(row_at(3.0, 1, 0, 0, 9000.0, WellLabel::InsideV));
    const auto hit = detect_blowup(s, scheme);
    REQUIRE(hit.has_value());
    CHECK(*hit == 2.0);

    EnergySeries calm;
    calm.rows.push_back(row_at(0.0, 1, 0, 0, 10.0, WellLabel::InsideW));
    CHECK(!detect_blowup(calm, scheme).has_value());
}

TEST_CASE("subcritical exponent range and time bound") {
    auto eta = subcritical_eta_upper(4.0, 2.0);
    REQUIRE(eta.has_value());
    CHECK(*eta == doctest::Approx(0.25).epsilon(1e-15));
    eta = subcritical_eta_upper(3.0, 2.0);
    REQUIRE(eta.has_value());
    CHECK(*eta == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(!subcritical_eta_upper(3.0, 3.0).has_value());
    CHECK(!subcritical_eta_upper(2.5, 4.0).has_value());

    const double T = subcritical_time_bound(2.0, 0.25, 3.0);
    CHECK(T == doctest::Approx((0.75 / (3.0 * 0.25)) * std::pow(2.0, -0.25 / 0.75)).epsilon(1e-14));
    // Calibration inverts the bound.
    const double C = calibrate_subcritical_C(2.0, 0.25, T);
    CHECK(C == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(subcritical_time_bound(0.0, 0.25, 1.0), std::domain_error);
    CHECK_THROWS_AS(subcritical_time_bound(1.0, 1.5, 1.0), std::domain_error);
}

TEST_CASE("threshold mass: pinned root and scaling law") {
    const HighEnergyThreshold thr = high_energy_threshold(4.0, 2.0, 1.0, 1.0, 0.0);
    CHECK(thr.M0 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(thr.M == doctest::Approx(2.572893310794392).epsilon(1e-10));
    // At the root, K/eta equals the drift term.
    CHECK(thr.K / thr.eta == doctest::Approx(0.5 * thr.M).epsilon(1e-9));

    // M0 scales exactly like 0.5 / (lambda1 c1) at m = 2, p = 4, alpha = 1.
    for (double lam : {0.3, 1.0, 2.5}) {
        for (double csq : {0.0, 0.2, 0.7}) {
            const HighEnergyThreshold t2 = high_energy_threshold(4.0, 2.0, 1.0, lam, csq);
            CHECK(t2.M0 == doctest::Approx(0.5 / (lam * (1.0 - csq))).epsilon(1e-13));
        }
    }

    // The reported root brackets a sign change of the defining function.
    auto phi = [&](double M) {
        const double K = 4.0 - 0.0 / M; // p - (m-2)/(alpha (p-2) M) at m = 2
        const double inner = (K + 2.0) * ((K - 2.0) * 1.0 - 2.0 / (2.0 * M));
        return K / std::sqrt(inner) - 0.5 * M;
    };
    CHECK(phi(thr.M * (1.0 - 1e-4)) > 0.0);
    CHECK(phi(thr.M * (1.0 + 1e-4)) < 0.0);

    CHECK_THROWS_AS(high_energy_threshold(3.0, 3.0, 1.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(high_energy_threshold(4.0, 2.0, 0.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(high_energy_threshold(4.0, 2.0, 1.0, -1.0, 0.0), std::domain_error);
}

TEST_CASE("arbitrary-energy check compares the pairing against the threshold") {
    GridPtr g = build_grid(GridSpec{});
    ModelParams mp = make_model(g, 4.0, 2.0, 0.0, PotentialTag::None, 1.0);
    const EigenPair ep = smallest_eigenpair(g);
    const HighEnergyThreshold thr = high_energy_threshold(4.0, 2.0, 1.0, ep.lambda1, 0.0);

    Field u0 = ep.omega1;
    field_scale(u0, 2.0);
    Field u1 = ep.omega1;
    const HighEnergyCheck chk = high_energy_blowup_check(u0, u1, mp, thr);
    CHECK(chk.inner == doctest::Approx(2.0).epsilon(1e-12));
    const double E0 = total_energy(u0, u1, mp);
    CHECK(chk.E0 == doctest::Approx(E0).epsilon(1e-12));
    CHECK(chk.threshold == doctest::Approx(0.5 * thr.M * E0).epsilon(1e-12));
    CHECK(chk.satisfied == (E0 >= 0.0 && chk.inner > chk.threshold));
}

TEST_CASE("two-mode construction hits the target energy and passes the check") {
    GridPtr g = build_grid(GridSpec{});
    ModelParams mp = make_model(g, 4.0, 2.0, 0.0, PotentialTag::None, 1.0);
    const WellConstants wc = compute_well_constants(g, mp, 60, 3);
    const EigenPair ep = smallest_eigenpair(g);
    const HighEnergyThreshold thr = high_energy_threshold(mp, wc);

    // Second direction: radial first overtone, orthogonalized.
    Field omega2(g);
    for (std::size_t i = 0; i < omega2.size(); ++i)
        omega2.v[i] = std::sin(2.0 * 3.14159265358979323846 * g->radial_index(i) / g->spec.Ns);
    const double proj = weighted_inner(omega2, ep.omega1) / weighted_inner(ep.omega1, ep.omega1);
    field_axpy(omega2, -proj, ep.omega1);
    REQUIRE(std::fabs(weighted_inner(omega2, ep.omega1)) <= 1e-10);

    const double R = 2.0 * wc.d;
    const HighEnergyData data = construct_high_energy_data(R, ep.omega1, omega2, mp, thr);
    CHECK(total_energy(data.u0, data.u1, mp) == doctest::Approx(R).epsilon(1e-10));
    CHECK(data.r1 > 0.0);
    CHECK(data.r2 > 0.0);
    // u0 is the scaled ground direction.
    for (std::size_t i = 0; i < data.u0.size(); ++i)
        CHECK(data.u0.v[i] == doctest::Approx(data.r1 * ep.omega1.v[i]).epsilon(1e-12));
    const HighEnergyCheck chk = high_energy_blowup_check(data.u0, data.u1, mp, thr);
    CHECK(chk.satisfied);
}

TEST_CASE("concavity bound: passing data and structured failures") {
    GridPtr g = build_grid(GridSpec{});
    ModelParams mp = make_model(g, 4.0, 2.0, 0.0, PotentialTag::None, 1.0);
    const WellConstants wc = compute_well_constants(g, mp, 60, 3);
    const EigenPair ep = smallest_eigenpair(g);

    // Scale the ground mode until its static energy is slightly negative,
    // then add a small aligned velocity; the hypothesis set wants large mass
    // at small positive total energy with a positive pairing.
    const FiberScaling fs = lambda_star(ep.omega1, mp);
    REQUIRE(fs.status == FiberStatus::Ok);
    double lo = fs.value, hi = 10.0 * fs.value;
    auto J_of = [&](double A) {
        Field u = ep.omega1;
        field_scale(u, A);
        return functional_J(u, mp);
    };
    REQUIRE(J_of(hi) < -0.004);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (J_of(mid) > -0.004) lo = mid; else hi = mid;
    }
    Field u0 = ep.omega1;
    field_scale(u0, hi);
    Field u1 = ep.omega1;
    field_scale(u1, 0.1);
    REQUIRE(total_energy(u0, u1, mp) > 0.0);

    const ConcavityBound cb = concavity_time_bound(u0, u1, mp, wc);
    CHECK(cb.sigma == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cb.eps2 >= 2.0);
    CHECK(cb.rho1 > 0.0);
    CHECK(cb.rho2 > 0.0);
    CHECK(cb.F0 > 0.0);
    CHECK(cb.hypothesis_ok);
    CHECK(cb.T_upper > 0.0);
    CHECK(std::isfinite(cb.T_upper));

    // Reversed velocity: the pairing goes negative and the bound reports why.
    Field u1neg = ep.omega1;
    field_scale(u1neg, -0.1);
    const ConcavityBound bad = concavity_time_bound(u0, u1neg, mp, wc);
    CHECK(!bad.hypothesis_ok);
    CHECK(!bad.failure.empty());

    ModelParams even = make_model(g, 3.0, 3.0, 0.0, PotentialTag::None, 1.0);
    CHECK_THROWS_AS(concavity_time_bound(u0, u1, even, wc), std::domain_error);
}

TEST_CASE("well monitor: stable, unstable, and negative-energy rules") {
    WellConstants wc;
    wc.d = 0.25;

    EnergySeries clean;
    clean.rows.push_back(row_at(0, 0.1, 0.05, 0.2, 1, WellLabel::InsideW));
    clean.rows.push_back(row_at(1, 0.08, 0.04, 0.1, 1, WellLabel::InsideW));
    clean.rows.push_back(row_at(2, 0.0, 0.0, 0.0, 0, WellLabel::Zero));
    const MonitorReport ok = invariant_set_monitor(clean, wc);
    CHECK(ok.violations.empty());
    CHECK(ok.stable_triggered);

    EnergySeries leak = clean;
    leak.rows.push_back(row_at(3, 0.07, 0.03, -0.1, 1, WellLabel::InsideV));
    const MonitorReport bad = invariant_set_monitor(leak, wc);
    REQUIRE(!bad.violations.empty());
    CHECK(bad.violations.front().rule == "stable-set");
    CHECK(bad.violations.front().row == 3);

    EnergySeries escape;
    escape.rows.push_back(row_at(0, 0.1, 0.05, -0.2, 1, WellLabel::InsideV));
    escape.rows.push_back(row_at(1, 0.09, 0.04, 0.2, 1, WellLabel::InsideW));
    const MonitorReport esc = invariant_set_monitor(escape, wc);
    REQUIRE(!esc.violations.empty());
    CHECK(esc.violations.front().rule == "unstable-set");
    CHECK(esc.unstable_triggered);

    EnergySeries negative;
    negative.rows.push_back(row_at(0, -0.1, -0.2, 0.3, 1, WellLabel::InsideW));
    const MonitorReport neg = invariant_set_monitor(negative, wc);
    REQUIRE(!neg.violations.empty());
    CHECK(neg.violations.front().rule == "negative-energy");
    CHECK(neg.negative_triggered);
}

TEST_CASE("well-side summary recovers the functional split from the records") {
    const double p = 4.0;
    // Rows are built from chosen (a, b) via J = a/2 - b/p and I = a - b, so the
    // summary must recover margin |I| / (|a| + |b|) from (J, I) alone.
    EnergySeries s;
    s.rows.push_back(row_at(0.0, 0.3, 0.45, 0.8, 1, WellLabel::InsideW));   // a = 1, b = 0.2
    s.rows.push_back(row_at(1.0, 0.1, 0.0, -1.0, 1, WellLabel::InsideV));   // a = 1, b = 2
    s.rows.push_back(row_at(2.0, -0.2, -0.5, -3.0, 1, WellLabel::InsideV)); // a = 1, b = 4
    const WellSideSummary sum = summarize_well_side(s, 0.25, p);
    CHECK(sum.entered_V_below_d);
    REQUIRE(sum.first_V_entry.has_value());
    CHECK(*sum.first_V_entry == doctest::Approx(1.0));
    // margins: 0.8/1.2, 1/3, 3/5 -> the minimum is 1/3.
    CHECK(sum.min_boundary_margin == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    EnergySeries stay;
    stay.rows.push_back(row_at(0.0, 0.3, 0.25, 0.5, 1, WellLabel::InsideW));
    const WellSideSummary none = summarize_well_side(stay, 0.25, p);
    CHECK(!none.entered_V_below_d);
    CHECK(!none.first_V_entry.has_value());
}
