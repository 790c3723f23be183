#include "integrator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fitting.hpp"

namespace conewave {

double cfl_limit(const ConeGrid& grid) {
    const double rad = 4.0 / (grid.hs * grid.hs);
    const double cross = 4.0 * (grid.spec.n - 1) / (grid.hx * grid.hx);
    return 2.0 / std::sqrt(rad + cross);
}

double damping_solve(double v_pred, double dt, double m, double tol) {
    if (!(dt >= 0.0)) throw std::invalid_argument("damping_solve: dt must be nonnegative");
    if (!(m >= 2.0)) throw std::invalid_argument("damping_solve: m must be >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("damping_solve: tolerance must be positive");
    if (dt == 0.0 || v_pred == 0.0) return v_pred;
    if (m == 2.0) return v_pred / (1.0 + dt);

    const double sign = (v_pred > 0.0) ? 1.0 : -1.0;
    const double a = std::fabs(v_pred);

    // f(x) = x + dt x^{m-1} - a is increasing on [0, a] with f(0) < 0 <= f(a).
    double lo = 0.0, hi = a;
    double x = (m < 3.0 && a < 1e-12) ? 0.5 * a : a;
    for (int it = 0; it < 200; ++it) {
        const double xm2 = std::pow(x, m - 2.0);
        const double f = x + dt * xm2 * x - a;
        if (std::fabs(f) <= tol * a) return sign * x;
        if (f > 0.0) hi = x; else lo = x;
        const double fp = 1.0 + dt * (m - 1.0) * xm2;
        double next = x - f / fp;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= tol * a) return sign * next;
        x = next;
    }
    return sign * x;
}

double damping_flow(double v, double h, double m) {
    if (v == 0.0 || h == 0.0) return v;
    if (m == 2.0) return v * std::exp(-h);
    const double e = m - 2.0;
    return v * std::pow(1.0 + e * std::pow(std::fabs(v), e) * h, -1.0 / e);
}

namespace {

// Conservative right-hand side Lap u + gamma V u + g |u|^{p-2} u, fused into
// one sweep.  This is the hot loop of every simulation.
void force_into(const Field& u, const ModelParams& mp, Field& out) {
    const ConeGrid& g = *u.grid;
    const std::size_t N = g.interior_count;
    const double inv_hs2 = 1.0 / (g.hs * g.hs);
    const double inv_hx2 = 1.0 / (g.hx * g.hx);
    const int cdims = g.spec.n - 1;
    const bool has_pot = (mp.gamma != 0.0) && static_cast<bool>(mp.potential.grid);
    const bool has_src = static_cast<bool>(mp.g.grid) && mp.beta > 0.0;
    const double p = mp.p;

    for (std::size_t i = 0; i < N; ++i) {
        const double c = u.v[i];
        const std::int64_t jp = g.s_plus[i];
        const std::int64_t jm = g.s_minus[i];
        double acc = ((jp >= 0 ? u.v[jp] : 0.0) - 2.0 * c + (jm >= 0 ? u.v[jm] : 0.0)) * inv_hs2;
        for (int d = 0; d < cdims; ++d)
            acc += (u.v[g.x_plus[d][i]] - 2.0 * c + u.v[g.x_minus[d][i]]) * inv_hx2;
        if (has_pot) acc += mp.gamma * mp.potential.v[i] * c;
        if (has_src) {
            double s;
            if (p == 3.0) s = std::fabs(c) * c;
            else if (p == 4.0) s = c * c * c;
            else s = std::pow(std::fabs(c), p - 2.0) * c;
            acc += mp.g.v[i] * s;
        }
        out.v[i] = acc;
    }
}

double mnorm_power(const Field& v, double m) {
    const std::size_t N = v.size();
    double acc = 0.0;
    if (m == 2.0) {
        for (std::size_t i = 0; i < N; ++i) acc += v.v[i] * v.v[i];
    } else if (m == 3.0) {
        for (std::size_t i = 0; i < N; ++i) acc += std::fabs(v.v[i]) * v.v[i] * v.v[i];
    } else if (m == 4.0) {
        for (std::size_t i = 0; i < N; ++i) { const double s = v.v[i] * v.v[i]; acc += s * s; }
    } else {
        for (std::size_t i = 0; i < N; ++i) acc += std::pow(std::fabs(v.v[i]), m);
    }
    return v.grid->weight * acc;
}

// Nodal ceilings of the zeroth-order terms, driving two refinement rules:
//   mu   = max_i |gamma| V_i + (p-1) g_i |u_i|^{p-2}   (frequency ceiling)
//   fmax = max_i (|gamma| V_i + g_i |u_i|^{p-2}) |u_i|  (force ceiling)
// The explicit core is only stable while dt * sqrt(lambda_lin + mu) stays
// below 2 * cfl_safety.  For m > 2 the damping saturates velocities on the
// slow manifold |v|^{m-2} v = f, so the split source kick (dt/2) f must not
// exceed that manifold speed f^{1/(m-1)}; otherwise positions advance at the
// kick velocity and the scheme fabricates blow-up where the damping-dominant
// dynamics grow only algebraically.  Hence dt <= 2 fmax^{-(m-2)/(m-1)}, which
// degenerates to no constraint at m = 2 (no saturation: the kick decays but
// is never clipped).
struct StiffnessScan {
    double mu = 0.0;
    double fmax = 0.0;
};
StiffnessScan scan_stiffness(const Field& u, const ModelParams& mp) {
    StiffnessScan out;
    const std::size_t N = u.size();
    const bool has_pot = (mp.gamma != 0.0) && static_cast<bool>(mp.potential.grid);
    const bool has_src = static_cast<bool>(mp.g.grid) && mp.beta > 0.0;
    if (!has_pot && !has_src) return out;
    const double ag = std::fabs(mp.gamma);
    const double pm1 = mp.p - 1.0;
    const double p = mp.p;
    for (std::size_t i = 0; i < N; ++i) {
        const double a = std::fabs(u.v[i]);
        double pot = 0.0, src = 0.0;
        if (has_pot) pot = ag * mp.potential.v[i];
        if (has_src) {
            double s;
            if (p == 3.0) s = a;
            else if (p == 4.0) s = a * a;
            else s = std::pow(a, p - 2.0);
            src = mp.g.v[i] * s;
        }
        const double r = pot + pm1 * src;
        if (r > out.mu) out.mu = r;
        const double f = (pot + src) * a;
        if (f > out.fmax) out.fmax = f;
    }
    return out;
}

struct Workspace {
    Field u, v, force;
    explicit Workspace(const GridPtr& g) : u(g), v(g), force(g) {}
};

StepStatus step_with(SimState& st, double dt, const ModelParams& mp, Workspace& ws) {
    const std::size_t N = st.u.size();
    const double m = mp.m;
    const double half = 0.5 * dt;

    ws.u.v = st.u.v;
    ws.v.v = st.v.v;

    for (std::size_t i = 0; i < N; ++i) ws.v.v[i] = damping_flow(ws.v.v[i], half, m);

    force_into(ws.u, mp, ws.force);
    for (std::size_t i = 0; i < N; ++i) {
        ws.v.v[i] += half * ws.force.v[i];
        ws.u.v[i] += dt * ws.v.v[i];
    }
    force_into(ws.u, mp, ws.force);

    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
        double vi = ws.v.v[i] + half * ws.force.v[i];
        vi = damping_flow(vi, half, m);
        ws.v.v[i] = vi;
        if (!std::isfinite(vi) || !std::isfinite(ws.u.v[i])) finite = false;
    }
    if (!finite) return StepStatus::NonFinite;

    st.u.v.swap(ws.u.v);
    st.v.v.swap(ws.v.v);
    st.t += dt;
    return StepStatus::Ok;
}

SeriesRow make_row(const SimState& st, const ModelParams& mp, const WellConstants& wc) {
    SeriesRow row;
    row.t = st.t;
    const ABSplit s = ab_split(st.u, mp);
    row.I = s.a - s.b;
    row.J = 0.5 * s.a - s.b / mp.p;
    row.E = 0.5 * weighted_inner(st.v, st.v) + row.J;
    row.L2 = cone_norm(st.u, 2.0);
    row.Lp_g = (s.b > 0.0) ? std::pow(s.b, 1.0 / mp.p) : 0.0;
    row.damping_integral = st.damping_integral;
    row.label = classify_from_split(s, row.L2 == 0.0, mp.p, wc.d);
    return row;
}

void validate_scheme(const SchemeParams& scheme, const ConeGrid& grid) {
    if (!(scheme.dt > 0.0)) throw std::invalid_argument("scheme: dt must be positive");
    if (!(scheme.t_max > 0.0)) throw std::invalid_argument("scheme: t_max must be positive");
    if (!(scheme.blowup_cap > 0.0)) throw std::invalid_argument("scheme: blowup_cap must be positive");
    if (!(scheme.cfl_safety > 0.0 && scheme.cfl_safety <= 1.0))
        throw std::invalid_argument("scheme: cfl_safety must lie in (0, 1]");
    const double limit = scheme.cfl_safety * cfl_limit(grid);
    if (scheme.dt > limit * (1.0 + 1e-12))
        throw std::invalid_argument("scheme: dt exceeds the CFL bound " + std::to_string(limit));
}

} // namespace

StepStatus step(SimState& state, double dt, const ModelParams& mp) {
    Workspace ws(state.u.grid);
    return step_with(state, dt, mp, ws);
}

SimResult run_simulation(const Field& u0, const Field& u1, const SchemeParams& scheme,
                         const ModelParams& mp, const WellConstants& wc, int record_every) {
    if (!u0.grid || u0.grid != u1.grid)
        throw std::invalid_argument("run_simulation: initial pair must share one grid");
    if (record_every < 1) throw std::invalid_argument("run_simulation: record_every must be >= 1");
    if (!(mp.m >= 2.0)) throw std::invalid_argument("run_simulation: m must be >= 2");
    validate_scheme(scheme, *u0.grid);

    const double refine_floor = 1.0 / 1024.0;
    const double cap = scheme.blowup_cap;
    const ConeGrid& grid = *u0.grid;
    const double lam_lin = 4.0 / (grid.hs * grid.hs) +
                           4.0 * (grid.spec.n - 1) / (grid.hx * grid.hx);

    SimResult result;
    SimState st;
    st.t = 0.0;
    st.u = u0;
    st.v = u1;
    st.damping_integral = 0.0;

    Workspace ws(u0.grid);
    double mnorm_old = mnorm_power(st.v, mp.m);
    result.series.rows.push_back(make_row(st, mp, wc));

    const double t_end = scheme.t_max;
    while (true) {
        const double L2 = cone_norm(st.u, 2.0);
        if (L2 >= cap / refine_floor) {
            // Refinement has bottomed out and the norm exceeds the cap.
            result.outcome = RunOutcome::Blowup;
            result.blowup_time = st.t;
            result.blowup_trigger = "cap";
            break;
        }
        if (st.t >= t_end * (1.0 - 1e-14)) break;

        double factor = 1.0;
        if (L2 > 0.0) factor = std::min(1.0, cap / L2);
        factor = std::max(factor, refine_floor);
        const StiffnessScan sc = scan_stiffness(st.u, mp);
        const double dt_stable = 2.0 * scheme.cfl_safety / std::sqrt(lam_lin + sc.mu);
        double dt_step = std::min({scheme.dt * factor, dt_stable, t_end - st.t});
        if (mp.m > 2.0 && sc.fmax > 0.0) {
            const double dt_relax = 2.0 * scheme.cfl_safety *
                                    std::pow(sc.fmax, -(mp.m - 2.0) / (mp.m - 1.0));
            dt_step = std::min(dt_step, dt_relax);
        }

        if (step_with(st, dt_step, mp, ws) == StepStatus::NonFinite) {
            result.outcome = RunOutcome::Blowup;
            result.blowup_time = st.t;
            result.blowup_trigger = "nonfinite";
            break;
        }
        ++result.steps_taken;

        const double mnorm_new = mnorm_power(st.v, mp.m);
        st.damping_integral += 0.5 * dt_step * (mnorm_old + mnorm_new);
        mnorm_old = mnorm_new;

        if (result.steps_taken % static_cast<std::uint64_t>(record_every) == 0)
            result.series.rows.push_back(make_row(st, mp, wc));
    }

    if (result.series.rows.empty() || result.series.rows.back().t != st.t)
        result.series.rows.push_back(make_row(st, mp, wc));
    result.final_state = std::move(st);
    return result;
}

std::vector<double> energy_balance_residual(const EnergySeries& series) {
    std::vector<double> r;
    r.reserve(series.rows.size());
    if (series.rows.empty()) return r;
    const double E0 = series.rows.front().E;
    for (const SeriesRow& row : series.rows)
        r.push_back(row.E + row.damping_integral - E0);
    return r;
}

ProbeReport continuous_dependence_probe(const Field& u0a, const Field& u1a,
                                        const Field& u0b, const Field& u1b,
                                        const SchemeParams& scheme, const ModelParams& mp,
                                        int record_every) {
    if (!u0a.grid || u0a.grid != u1a.grid || u0a.grid != u0b.grid || u0a.grid != u1b.grid)
        throw std::invalid_argument("probe: all four fields must share one grid");
    if (record_every < 1) throw std::invalid_argument("probe: record_every must be >= 1");
    validate_scheme(scheme, *u0a.grid);

    const GridPtr grid = u0a.grid;
    SimState sa{0.0, u0a, u1a, 0.0};
    SimState sb{0.0, u0b, u1b, 0.0};
    Workspace wa(grid), wb(grid);
    Field du(grid), dv(grid);

    auto gap_now = [&]() {
        const std::size_t N = du.size();
        for (std::size_t i = 0; i < N; ++i) {
            du.v[i] = sa.u.v[i] - sb.u.v[i];
            dv.v[i] = sa.v.v[i] - sb.v.v[i];
        }
        double quad = gradient_norm_sq(du);
        if (mp.gamma != 0.0 && mp.potential.grid) {
            double vq = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                vq += mp.potential.v[i] * du.v[i] * du.v[i];
            quad -= mp.gamma * grid->weight * vq;
        }
        const double g2 = weighted_inner(dv, dv) + quad;
        return std::sqrt(std::max(0.0, g2));
    };

    ProbeReport report;
    report.gap0 = gap_now();
    report.times.push_back(0.0);
    report.gaps.push_back(report.gap0);

    std::uint64_t steps = 0;
    while (sa.t < scheme.t_max * (1.0 - 1e-14)) {
        const double dt_step = std::min(scheme.dt, scheme.t_max - sa.t);
        const bool ok_a = step_with(sa, dt_step, mp, wa) == StepStatus::Ok;
        const bool ok_b = step_with(sb, dt_step, mp, wb) == StepStatus::Ok;
        if (!ok_a || !ok_b) {
            report.truncated = true;
            break;
        }
        ++steps;
        if (steps % static_cast<std::uint64_t>(record_every) == 0 ||
            sa.t >= scheme.t_max * (1.0 - 1e-14)) {
            report.times.push_back(sa.t);
            report.gaps.push_back(gap_now());
        }
    }

    if (report.gap0 <= 0.0) {
        report.degenerate = true;
        return report;
    }

    std::vector<double> ts, logs;
    for (std::size_t k = 0; k < report.gaps.size(); ++k) {
        if (report.gaps[k] > 0.0) {
            ts.push_back(report.times[k]);
            logs.push_back(std::log(report.gaps[k]));
        }
    }
    report.fitted_rate = linear_fit(ts, logs).slope;

    double certified = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < report.gaps.size(); ++k) {
        if (report.times[k] > 0.0 && report.gaps[k] > 0.0)
            certified = std::max(certified, std::log(report.gaps[k] / report.gap0) / report.times[k]);
    }
    report.certified_rate = std::isfinite(certified) ? certified : 0.0;
    return report;
}

} // namespace conewave
