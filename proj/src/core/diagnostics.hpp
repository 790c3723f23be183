#pragma once

// Post-processing: decay-rate fits, the difference-inequality decay bound,
// blow-up detection and the three blow-up time estimates (subcritical,
// high-energy threshold, concavity), plus the potential-well invariance
// monitor.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "integrator.hpp"
#include "series.hpp"
#include "variational.hpp"

namespace conewave {

enum class DecayMode { Exponential, Algebraic };

struct DecayReport {
    DecayMode mode = DecayMode::Exponential;
    double rate = 0.0;        // kappa in E ~ A exp(-kappa t), or the fitted
                              // exponent q in E ~ A (1+t)^q for m > 2
    double amplitude = 0.0;   // A above
    double r_squared = 0.0;
    std::size_t samples = 0;
    double window_begin = 0.0;
    double window_end = 0.0;
};

// Fits the tail of the energy series: log E against t when m == 2, log E
// against log(1+t) when m > 2 (so a pure power law in 1+t fits exactly).
// The window is the last half (by count) of the records with E > 1e-12.
// Throws std::runtime_error when fewer than 10 usable samples remain.
DecayReport fit_decay(const EnergySeries& series, double m);

// Decay majorant from the difference inequality phi(t)^{1+r} <= k0 (phi(t) - phi(t+1)):
//   t <= 1:        phi0
//   r > 0:         (phi0^{-r} + k0 r (t-1))^{-1/r}
//   r = 0, k0 > 1: phi0 exp(-k1 (t-1)),  k1 = log(k0/(k0-1))
// Preconditions: phi0 > 0, k0 > 0, t >= 0, r >= 0, and k0 > 1 when r == 0.
double nakao_bound(double phi0, double k0, double r, double t);

// First recorded time at which the L2 norm had exceeded 2^10 * blowup_cap,
// i.e. the adaptive refinement had bottomed out (the driver declares blow-up
// at exactly that threshold).  nullopt when the series never crossed it.
std::optional<double> detect_blowup(const EnergySeries& series, const SchemeParams& scheme);

// Admissible exponent range (0, upper] for the subcritical blow-up bound;
// nullopt when p <= m (global-existence regime, the range is empty).
std::optional<double> subcritical_eta_upper(double p, double m);

// T_star = ((1 - eta)/(C eta)) * L0^{-eta/(1-eta)}.  Requires L0 > 0, C > 0,
// 0 < eta < 1.
double subcritical_time_bound(double L0, double eta, double C);

// The constant C that makes subcritical_time_bound reproduce T_detected.
double calibrate_subcritical_C(double L0, double eta, double T_detected);

// Threshold mass M for the high-energy blow-up criterion.  K and eta are the
// auxiliary functions evaluated at the root M of
//   K(M)/eta(M) = ((m-1)/m) M^{1/(m-1)},
// where K(M) = p - (m-2)/(alpha (p-2) M) and
// eta(M) = sqrt((K+2)((K-2) lambda1 c1 - (p-m)/((p-2) M))).
// M0 is the infimum above which eta is real; the root is found by bisection
// on (M0, inf).  Requires p > m >= 2, alpha > 0, lambda1 > 0, gammaCsq < 1.
struct HighEnergyThreshold {
    double M0 = 0.0;
    double M = 0.0;
    double K = 0.0;
    double eta = 0.0;
};
HighEnergyThreshold high_energy_threshold(double p, double m, double alpha,
                                          double lambda1, double gammaCsq);
HighEnergyThreshold high_energy_threshold(const ModelParams& mp, const WellConstants& wc);

// The arbitrary-energy blow-up test (u0, u1) > ((m-1)/m) M^{1/(m-1)} E(0) with
// E(0) >= 0.
struct HighEnergyCheck {
    bool satisfied = false;
    double inner = 0.0;      // (u0, u1)
    double threshold = 0.0;  // right-hand side
    double E0 = 0.0;
};
HighEnergyCheck high_energy_blowup_check(const Field& u0, const Field& u1,
                                         const ModelParams& mp, const HighEnergyThreshold& thr);

// Data u0 = r1 w1, u1 = r1 w1 + r2 w2 with (w1, w2) = 0, tuned so that
// E(0) = R and the high-energy check passes: r1 doubles until the static
// energy chi(r1) = r1^2 ||w1||^2 / 2 + J(r1 w1) drops below R while
// r1^2 ||w1||^2 stays above the check threshold, then r2 closes the energy
// budget exactly.  Throws std::runtime_error if 60 doublings do not suffice.
struct HighEnergyData {
    Field u0, u1;
    double r1 = 0.0, r2 = 0.0;
    double chi = 0.0;
};
HighEnergyData construct_high_energy_data(double R, const Field& omega1, const Field& omega2,
                                          const ModelParams& mp, const HighEnergyThreshold& thr);

// Concavity-functional upper bound on the blow-up time.  sigma is fixed at
// (p-2)/(2p); eps2 is the smallest power of two >= 2 making both rho
// constants positive; eps = (1-sigma)/(2 eps2).  The embedding factor is
// C = mu^(1/2-1/p) with mu the total measure of the computational domain.
struct ConcavityBound {
    double E0 = 0.0;
    double sigma = 0.0;
    double eps2 = 0.0;
    double eps = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double M1 = 0.0;
    double M2 = 0.0;
    double F0 = 0.0;       // eps * (u0, u1)
    double T_upper = 0.0;  // F0^(-sigma/(1-sigma)) * (M2/M1) * (1-sigma)/sigma
    bool hypothesis_ok = false;
    std::string failure;   // names the violated hypothesis when not ok
};
ConcavityBound concavity_time_bound(const Field& u0, const Field& u1, const ModelParams& mp,
                                    const WellConstants& wc, double xi = 1.0);

// Row-by-row validation of the well invariance rules:
//   stable:   once a record has E < d with label InsideW or Zero, every later
//             record must keep a label in {InsideW, Zero};
//   unstable: once a record has E < d with label InsideV, every later record
//             must keep label InsideV;
//   negative: from the first record with E < 0 (or E == 0 with u != 0), every
//             record must have label InsideV.
struct MonitorViolation {
    std::size_t row = 0;
    std::string rule;
    std::string message;
};
struct MonitorReport {
    std::vector<MonitorViolation> violations;
    bool stable_triggered = false;
    bool unstable_triggered = false;
    bool negative_triggered = false;
    std::size_t stable_from = 0, unstable_from = 0, negative_from = 0;
};
MonitorReport invariant_set_monitor(const EnergySeries& series, const WellConstants& wc);

// Aggregates the well-side footprint of a run for the phase-diagram
// consistency test: blow-up should coincide with having entered
// {E < d, InsideV}, except for trajectories hugging the Nehari boundary.
struct WellSideSummary {
    bool entered_V_below_d = false;
    std::optional<double> first_V_entry;
    double min_boundary_margin = 0.0; // min over rows of |I|/(|a|+|b|)
};
WellSideSummary summarize_well_side(const EnergySeries& series, double d, double p);

} // namespace conewave
