#pragma once

// Time integration of  u_tt = Lap u + gamma V u + g |u|^{p-2} u - |u_t|^{m-2} u_t
// by Strang splitting: a half-step of the exact nodal damping flow, a full
// velocity-Verlet step of the conservative part, and a second damping
// half-step.  The damping subflow has a closed form at every node, so the
// dissipative substep is solved exactly (it can only shrink |u_t|) and the
// overall scheme is second order in dt.

#include <cstdint>
#include <string>
#include <vector>

#include "grid.hpp"
#include "series.hpp"
#include "variational.hpp"

namespace conewave {

struct SchemeParams {
    double dt = 0.0;          // base step; must satisfy the CFL bound below
    double cfl_safety = 0.5;  // fraction of the linear stability limit
    double blowup_cap = 0.0;  // L2 threshold driving adaptive refinement
    double newton_tol = 1e-14; // relative tolerance of damping_solve
    double t_max = 0.0;       // simulation horizon
};

// Linear stability limit 2 / sqrt(4/hs^2 + 4(n-1)/hx^2) of the explicit core.
double cfl_limit(const ConeGrid& grid);

// Root of  v + dt |v|^{m-2} v = v_pred  (backward-Euler damping update at one
// node).  Odd in v_pred, |v| <= |v_pred|.  Closed form at m = 2; otherwise a
// safeguarded Newton iteration on [0, |v_pred|], started from the bracket
// midpoint when |v_pred| < 1e-12 and m < 3 (the Jacobian degenerates there).
double damping_solve(double v_pred, double dt, double m, double tol = 1e-14);

// Exact solution at time h of  v' = -|v|^{m-2} v  from v(0) = v.  Used for
// the damping half-steps; strictly shrinks |v| and preserves its sign.
double damping_flow(double v, double h, double m);

struct SimState {
    double t = 0.0;
    Field u;
    Field v;
    double damping_integral = 0.0; // trapezoid accumulation of ||u_t||_m^m
};

enum class StepStatus { Ok, NonFinite };

// One Strang step of size dt.  Returns NonFinite if the update produced a
// non-finite value anywhere; the state is then left untouched.
StepStatus step(SimState& state, double dt, const ModelParams& mp);

enum class RunOutcome { CompletedHorizon, Blowup };

struct SimResult {
    EnergySeries series;
    RunOutcome outcome = RunOutcome::CompletedHorizon;
    double blowup_time = 0.0;      // meaningful when outcome == Blowup
    std::string blowup_trigger;    // "cap" or "nonfinite"
    SimState final_state;
    std::uint64_t steps_taken = 0;
};

// Advances (u0, u1) to scheme.t_max, recording every `record_every`-th step
// (plus the initial and final states).  Three refinement rules shrink the
// base dt: min(1, blowup_cap/||u||_2), floored at dt/2^10; the nonlinear
// stability bound 2 cfl_safety / sqrt(lambda_lin + mu) with mu the largest
// nodal rate of the zeroth-order terms; and, for m > 2 only, the damping
// relaxation bound 2 cfl_safety * fmax^{-(m-2)/(m-1)} with fmax the largest
// nodal zeroth-order force (without these, large-amplitude states in the
// damping-dominant regime m >= p overshoot the slow manifold and fabricate
// blow-up).  Once the cap-rule floor is active the L2 norm has exceeded
// 2^10 * blowup_cap and blow-up is declared at the first such time.  A
// non-finite update declares blow-up at the last finite state.  Throws
// std::invalid_argument on parameter or grid violations, including dt above
// the CFL bound.
SimResult run_simulation(const Field& u0, const Field& u1, const SchemeParams& scheme,
                         const ModelParams& mp, const WellConstants& wc, int record_every);

// Residual of the discrete energy identity E(t) + int_0^t ||u_tau||_m^m - E(0)
// per recorded row.
std::vector<double> energy_balance_residual(const EnergySeries& series);

struct ProbeReport {
    std::vector<double> times;
    std::vector<double> gaps;      // energy-norm distance between the two runs
    double gap0 = 0.0;
    double fitted_rate = 0.0;      // least-squares slope of log gap vs t
    double certified_rate = 0.0;   // max over t > 0 of log(gap/gap0)/t
    bool degenerate = false;       // identical initial pairs
    bool truncated = false;        // one of the runs blew up before t_max
};

// Evolves two initial pairs side by side and reports the growth rate of the
// energy-norm gap sqrt(||va - vb||^2 + a(ua - ub)).  The certified rate is a
// pointwise bound over the recorded samples; the fitted rate is the
// regression slope.
ProbeReport continuous_dependence_probe(const Field& u0a, const Field& u1a,
                                        const Field& u0b, const Field& u1b,
                                        const SchemeParams& scheme, const ModelParams& mp,
                                        int record_every);

} // namespace conewave
