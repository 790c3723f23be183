#include "diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fitting.hpp"

namespace conewave {

DecayReport fit_decay(const EnergySeries& series, double m) {
    if (!(m >= 2.0)) throw std::invalid_argument("fit_decay: m must be >= 2");

    std::vector<const SeriesRow*> usable;
    for (const SeriesRow& row : series.rows)
        if (row.E > 1e-12) usable.push_back(&row);

    const std::size_t half = usable.size() / 2;
    std::vector<const SeriesRow*> window(usable.begin() + half, usable.end());
    if (window.size() < 10)
        throw std::runtime_error("fit_decay: fewer than 10 usable samples in the fit window");

    DecayReport report;
    report.mode = (m == 2.0) ? DecayMode::Exponential : DecayMode::Algebraic;
    report.samples = window.size();
    report.window_begin = window.front()->t;
    report.window_end = window.back()->t;

    std::vector<double> xs, ys;
    xs.reserve(window.size());
    ys.reserve(window.size());
    for (const SeriesRow* row : window) {
        xs.push_back(m == 2.0 ? row->t : std::log1p(row->t));
        ys.push_back(std::log(row->E));
    }
    const LineFit fit = linear_fit(xs, ys);
    report.rate = (m == 2.0) ? -fit.slope : fit.slope;
    report.amplitude = std::exp(fit.intercept);
    report.r_squared = fit.r_squared;
    return report;
}

double nakao_bound(double phi0, double k0, double r, double t) {
    if (!(phi0 > 0.0)) throw std::domain_error("nakao_bound: phi0 must be positive");
    if (!(k0 > 0.0)) throw std::domain_error("nakao_bound: k0 must be positive");
    if (!(r >= 0.0)) throw std::domain_error("nakao_bound: r must be nonnegative");
    if (!(t >= 0.0)) throw std::domain_error("nakao_bound: t must be nonnegative");
    if (r == 0.0 && !(k0 > 1.0))
        throw std::domain_error("nakao_bound: the exponential branch requires k0 > 1");
    if (t <= 1.0) return phi0;
    const double tp = t - 1.0;
    if (r > 0.0)
        return std::pow(std::pow(phi0, -r) + k0 * r * tp, -1.0 / r);
    const double k1 = std::log(k0 / (k0 - 1.0));
    return phi0 * std::exp(-k1 * tp);
}

std::optional<double> detect_blowup(const EnergySeries& series, const SchemeParams& scheme) {
    if (!(scheme.blowup_cap > 0.0))
        throw std::invalid_argument("detect_blowup: blowup_cap must be positive");
    const double threshold = scheme.blowup_cap * 1024.0;
    for (const SeriesRow& row : series.rows)
        if (row.L2 >= threshold) return row.t;
    return std::nullopt;
}

std::optional<double> subcritical_eta_upper(double p, double m) {
    if (!(p > 2.0)) throw std::domain_error("subcritical_eta_upper: p must exceed 2");
    if (!(m >= 2.0)) throw std::domain_error("subcritical_eta_upper: m must be >= 2");
    if (p <= m) return std::nullopt;
    return std::min((p - 2.0) / (2.0 * p), (p - m) / ((m - 1.0) * p));
}

double subcritical_time_bound(double L0, double eta, double C) {
    if (!(L0 > 0.0)) throw std::domain_error("subcritical_time_bound: L0 must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("subcritical_time_bound: eta must lie in (0,1)");
    if (!(C > 0.0)) throw std::domain_error("subcritical_time_bound: C must be positive");
    return (1.0 - eta) / (C * eta) * std::pow(L0, -eta / (1.0 - eta));
}

double calibrate_subcritical_C(double L0, double eta, double T_detected) {
    if (!(T_detected > 0.0)) throw std::domain_error("calibrate_subcritical_C: detected time must be positive");
    if (!(L0 > 0.0)) throw std::domain_error("calibrate_subcritical_C: L0 must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("calibrate_subcritical_C: eta must lie in (0,1)");
    return (1.0 - eta) / (eta * T_detected) * std::pow(L0, -eta / (1.0 - eta));
}

namespace {

struct ThresholdPieces {
    double K = 0.0;
    double K1 = 0.0;
    double eta = 0.0;
};

ThresholdPieces threshold_pieces(double M, double p, double m, double alpha,
                                 double lambda1, double c1) {
    ThresholdPieces out;
    out.K = p - (m - 2.0) / (alpha * (p - 2.0) * M);
    out.K1 = (out.K - 2.0) * lambda1 * c1 - (p - m) / ((p - 2.0) * M);
    out.eta = (out.K1 > 0.0) ? std::sqrt((out.K + 2.0) * out.K1) : 0.0;
    return out;
}

} // namespace

HighEnergyThreshold high_energy_threshold(double p, double m, double alpha,
                                          double lambda1, double gammaCsq) {
    if (!(m >= 2.0)) throw std::domain_error("high_energy_threshold: m must be >= 2");
    if (!(p > m)) throw std::domain_error("high_energy_threshold: requires p > m");
    if (!(alpha > 0.0)) throw std::domain_error("high_energy_threshold: requires alpha > 0");
    if (!(lambda1 > 0.0)) throw std::domain_error("high_energy_threshold: requires lambda1 > 0");
    if (!(gammaCsq < 1.0)) throw std::domain_error("high_energy_threshold: requires gamma C*^2 < 1");

    const double c1 = 1.0 - gammaCsq;
    HighEnergyThreshold thr;
    thr.M0 = ((m - 2.0) * lambda1 * c1 + (p - m) * alpha) /
             ((p - 2.0) * (p - 2.0) * lambda1 * alpha * c1);

    // phi(M) = K/eta - ((m-1)/m) M^{1/(m-1)} decreases from +inf at M0+ to
    // -inf; bisect between M0 and a doubled upper bracket.
    auto phi = [&](double M) {
        const ThresholdPieces tp = threshold_pieces(M, p, m, alpha, lambda1, c1);
        if (!(tp.eta > 0.0)) return std::numeric_limits<double>::infinity();
        return tp.K / tp.eta - (m - 1.0) / m * std::pow(M, 1.0 / (m - 1.0));
    };

    double lo = thr.M0;
    double hi = std::max(2.0 * thr.M0, 1.0);
    int doublings = 0;
    while (phi(hi) > 0.0) {
        hi *= 2.0;
        if (++doublings > 60)
            throw std::runtime_error("high_energy_threshold: no sign change found for the mass equation");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi(mid) > 0.0) lo = mid; else hi = mid;
        if (hi - lo <= 1e-13 * hi) break;
    }
    thr.M = 0.5 * (lo + hi);
    const ThresholdPieces tp = threshold_pieces(thr.M, p, m, alpha, lambda1, c1);
    thr.K = tp.K;
    thr.eta = tp.eta;
    return thr;
}

HighEnergyThreshold high_energy_threshold(const ModelParams& mp, const WellConstants& wc) {
    const double gammaCsq = mp.gamma * wc.hardy_const * wc.hardy_const;
    return high_energy_threshold(mp.p, mp.m, mp.alpha, wc.lambda1, gammaCsq);
}

HighEnergyCheck high_energy_blowup_check(const Field& u0, const Field& u1,
                                         const ModelParams& mp, const HighEnergyThreshold& thr) {
    HighEnergyCheck check;
    check.E0 = total_energy(u0, u1, mp);
    check.inner = weighted_inner(u0, u1);
    check.threshold = (mp.m - 1.0) / mp.m * std::pow(thr.M, 1.0 / (mp.m - 1.0)) * check.E0;
    check.satisfied = (check.E0 >= 0.0) && (check.inner > check.threshold);
    return check;
}

HighEnergyData construct_high_energy_data(double R, const Field& omega1, const Field& omega2,
                                          const ModelParams& mp, const HighEnergyThreshold& thr) {
    if (!(R > 0.0)) throw std::domain_error("construct_high_energy_data: R must be positive");
    if (!omega1.grid || omega1.grid != omega2.grid)
        throw std::invalid_argument("construct_high_energy_data: modes must share one grid");

    const double n1 = weighted_inner(omega1, omega1);
    const double n2 = weighted_inner(omega2, omega2);
    if (!(n1 > 0.0) || !(n2 > 0.0))
        throw std::invalid_argument("construct_high_energy_data: modes must be nonzero");
    const double cross = weighted_inner(omega1, omega2);
    if (std::fabs(cross) > 1e-8 * std::sqrt(n1 * n2))
        throw std::invalid_argument("construct_high_energy_data: modes are not orthogonal");

    const double gate = mp.m / ((mp.m - 1.0) * std::pow(thr.M, 1.0 / (mp.m - 1.0)));

    double r1 = 1.0;
    double chi = 0.0;
    bool found = false;
    Field scaled(omega1.grid);
    for (int doublings = 0; doublings <= 60; ++doublings) {
        scaled = omega1;
        field_scale(scaled, r1);
        chi = 0.5 * r1 * r1 * n1 + functional_J(scaled, mp);
        if (chi < R && R < r1 * r1 * gate * n1) { found = true; break; }
        r1 *= 2.0;
    }
    if (!found)
        throw std::runtime_error("construct_high_energy_data: 60 doublings did not satisfy the energy window");

    HighEnergyData data;
    data.r1 = r1;
    data.chi = chi;
    data.r2 = std::sqrt(2.0 * (R - chi)) / std::sqrt(n2);
    data.u0 = omega1;
    field_scale(data.u0, r1);
    data.u1 = data.u0;
    field_axpy(data.u1, data.r2, omega2);
    return data;
}

ConcavityBound concavity_time_bound(const Field& u0, const Field& u1, const ModelParams& mp,
                                    const WellConstants& wc, double xi) {
    if (!(mp.p > mp.m)) throw std::domain_error("concavity_time_bound: requires p > m");
    if (!(mp.alpha > 0.0)) throw std::domain_error("concavity_time_bound: requires alpha > 0");
    if (!(xi > 0.0)) throw std::domain_error("concavity_time_bound: xi must be positive");

    const double p = mp.p;
    const double m = mp.m;

    ConcavityBound cb;
    cb.E0 = total_energy(u0, u1, mp);
    if (!(cb.E0 >= 0.0)) {
        cb.failure = "E(0) is negative (use the subcritical bound instead)";
        return cb;
    }
    cb.sigma = (p - 2.0) / (2.0 * p);

    const double e_pow = std::pow(cb.E0, cb.sigma * (m - 1.0));
    const double rho1_base = wc.lambda1 * wc.lambda1 * wc.c1 * (p - 2.0) / 4.0;
    const double rho2_base = mp.alpha * (p - 2.0) / (2.0 * p);

    double eps2 = 2.0;
    bool found = false;
    for (int k = 0; k < 200; ++k) {
        const double denom = std::pow(eps2, m - 1.0);
        cb.rho1 = rho1_base - e_pow * (p - m) / ((p - 2.0) * denom);
        cb.rho2 = rho2_base - e_pow / denom;
        if (cb.rho1 > 0.0 && cb.rho2 > 0.0) { found = true; break; }
        eps2 *= 2.0;
    }
    if (!found) {
        cb.failure = "no power-of-two eps2 makes both rho constants positive";
        return cb;
    }
    cb.eps2 = eps2;
    cb.eps = (1.0 - cb.sigma) / (2.0 * eps2);

    const double mu = u0.grid->total_measure();
    const double Cmu = std::pow(mu, 0.5 - 1.0 / p);
    const double inv1ms = 1.0 / (1.0 - cb.sigma);
    const double Cpow = std::pow(Cmu, inv1ms);
    cb.C1 = Cpow / (2.0 * (1.0 - cb.sigma));
    cb.C2 = Cpow * (1.0 - 2.0 * cb.sigma) / (2.0 * (1.0 - cb.sigma));

    cb.M1 = cb.eps * std::min(std::min((p + 6.0) / 4.0, (p + 2.0) / 2.0),
                              std::min(0.5 * xi * cb.E0, cb.rho2));

    const double s_ratio = cb.sigma / (1.0 - cb.sigma);
    const double p12s = p * (1.0 - 2.0 * cb.sigma); // equals 2 for sigma = (p-2)/(2p)
    const double t1 = std::pow(cb.eps, s_ratio) * cb.C1;
    const double t2 = std::pow(cb.eps, inv1ms) * cb.C2 * (2.0 / p12s);
    const double t3 = std::pow(cb.eps, inv1ms) * cb.C2 * ((p12s - 2.0) / p12s);
    cb.M2 = std::pow(2.0, s_ratio) * std::max(std::max(1.0, t1), std::max(t2, t3));

    cb.F0 = cb.eps * weighted_inner(u0, u1);
    if (!(cb.F0 > 0.0)) {
        cb.failure = "the concavity functional starts nonpositive: eps (u0, u1) <= 0";
        return cb;
    }
    const double mass = weighted_inner(u0, u0);
    const double needed = (p + 2.0 + xi) / (2.0 * cb.rho1) * cb.E0;
    if (!(mass >= needed)) {
        cb.failure = "mass-energy hypothesis fails: ||u0||^2 < (p+2+xi)/(2 rho1) E(0)";
        return cb;
    }

    cb.hypothesis_ok = true;
    if (cb.M1 > 0.0)
        cb.T_upper = std::pow(cb.F0, -s_ratio) * (cb.M2 / cb.M1) * (1.0 - cb.sigma) / cb.sigma;
    else
        cb.T_upper = std::numeric_limits<double>::infinity();
    return cb;
}

MonitorReport invariant_set_monitor(const EnergySeries& series, const WellConstants& wc) {
    MonitorReport report;
    const double d = wc.d;
    const auto& rows = series.rows;

    for (std::size_t k = 0; k < rows.size(); ++k) {
        const SeriesRow& row = rows[k];
        const bool in_w = row.label == WellLabel::InsideW || row.label == WellLabel::Zero;
        const bool in_v = row.label == WellLabel::InsideV;

        if (!report.stable_triggered && row.E < d && in_w) {
            report.stable_triggered = true;
            report.stable_from = k;
        } else if (report.stable_triggered && !in_w) {
            report.violations.push_back({k, "stable-set",
                "left {InsideW, Zero} after entering it below the well depth (label " +
                std::string(well_label_name(row.label)) + ")"});
        }

        if (!report.unstable_triggered && row.E < d && in_v) {
            report.unstable_triggered = true;
            report.unstable_from = k;
        } else if (report.unstable_triggered && !in_v) {
            report.violations.push_back({k, "unstable-set",
                "left InsideV after entering it below the well depth (label " +
                std::string(well_label_name(row.label)) + ")"});
        }

        const bool negative_energy = row.E < 0.0 || (row.E == 0.0 && row.L2 > 0.0);
        if (!report.negative_triggered && negative_energy) {
            report.negative_triggered = true;
            report.negative_from = k;
        }
        if (report.negative_triggered && k >= report.negative_from && !in_v) {
            report.violations.push_back({k, "negative-energy",
                "nonpositive-energy state not labeled InsideV (label " +
                std::string(well_label_name(row.label)) + ")"});
        }
    }
    return report;
}

WellSideSummary summarize_well_side(const EnergySeries& series, double d, double p) {
    WellSideSummary out;
    out.min_boundary_margin = std::numeric_limits<double>::infinity();
    for (const SeriesRow& row : series.rows) {
        if (row.label == WellLabel::InsideV) {
            if (!out.first_V_entry) out.first_V_entry = row.t;
            if (row.E < d) out.entered_V_below_d = true;
        }
        // Recover the quadratic/source split from the stored functionals:
        // J = a/2 - b/p and I = a - b give a = (2p/(p-2)) (J - I/p).
        const double a = 2.0 * p / (p - 2.0) * (row.J - row.I / p);
        const double b = a - row.I;
        const double denom = std::fabs(a) + std::fabs(b);
        if (denom > 0.0)
            out.min_boundary_margin = std::min(out.min_boundary_margin, std::fabs(row.I) / denom);
    }
    if (!std::isfinite(out.min_boundary_margin)) out.min_boundary_margin = 0.0;
    return out;
}

} // namespace conewave
