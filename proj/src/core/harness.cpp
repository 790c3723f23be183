#include "harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rng.hpp"

namespace conewave {

namespace {

constexpr std::uint64_t kConstantsStream = 17;

void append_kv(std::ostringstream& out, const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
}

void append_kv(std::ostringstream& out, const std::string& key, double value) {
    append_kv(out, key, format_g17(value));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

} // namespace

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ModelParams materialize_model(const GridPtr& grid, const RunConfig& cfg) {
    ModelParams mp;
    mp.p = cfg.p;
    mp.m = cfg.m;
    mp.gamma = cfg.gamma;
    mp.potential_tag = potential_tag_from_name(cfg.potential);
    if (mp.potential_tag != PotentialTag::None)
        mp.potential = potential_field(grid, mp.potential_tag);

    if (cfg.g_beta > 0.0) {
        mp.g = Field(grid);
        const std::size_t N = grid->interior_count;
        if (cfg.g_kind == "radial") {
            // Radial source profile rising from alpha at the tip toward beta
            // at the collar edge.
            for (std::size_t i = 0; i < N; ++i) {
                const double x1 = grid->x1[i];
                mp.g.v[i] = cfg.g_alpha + (cfg.g_beta - cfg.g_alpha) * x1 * x1;
            }
        } else {
            for (std::size_t i = 0; i < N; ++i) mp.g.v[i] = cfg.g_beta;
        }
        double lo = mp.g.v[0], hi = mp.g.v[0];
        for (std::size_t i = 1; i < N; ++i) {
            lo = std::min(lo, mp.g.v[i]);
            hi = std::max(hi, mp.g.v[i]);
        }
        mp.alpha = lo;
        mp.beta = hi;
    } else {
        mp.alpha = 0.0;
        mp.beta = 0.0;
    }
    return mp;
}

ConstantsBundle compute_constants_bundle(const GridPtr& grid, const ModelParams& mp,
                                         int restarts, std::uint64_t seed) {
    ConstantsBundle cb;
    cb.eig = smallest_eigenpair(grid);
    cb.wc.lambda1 = cb.eig.lambda1;
    cb.wc.embedding_const = estimate_embedding_constant(grid, mp, restarts, seed).value;
    cb.wc.hardy_const = estimate_hardy_constant(grid, mp);
    const CoercivityPair cp = coercivity_constants(mp.gamma, cb.wc.hardy_const);
    cb.wc.c1 = cp.c1;
    cb.wc.c2 = cp.c2;
    cb.wc.d = well_depth(cb.wc.embedding_const, cb.wc.hardy_const, mp.gamma, mp.p);
    return cb;
}

InitData build_init(const GridPtr& grid, const ModelParams& mp, const ConstantsBundle& cb,
                    const RunConfig& cfg) {
    InitData init;
    init.u0 = Field(grid);
    init.u1 = Field(grid);

    if (cfg.init_kind == "eigenmode") {
        init.u0 = cb.eig.omega1;
        field_scale(init.u0, cfg.amplitude);
    } else if (cfg.init_kind == "gaussian-bump") {
        const double L = grid->spec.torus_length;
        const double s0 = 0.5 * grid->spec.s_min;
        const double ss = -grid->spec.s_min / 6.0;
        const double center = 0.5 * L;
        const double sx = L / 6.0;
        const int Nx = grid->spec.Nx;
        const int cdims = grid->spec.n - 1;
        const std::size_t N = grid->interior_count;
        for (std::size_t i = 0; i < N; ++i) {
            const double s = grid->s_of(i);
            double expo = (s - s0) * (s - s0) / (2.0 * ss * ss);
            std::size_t rem = i % grid->cross_count;
            for (int d = 0; d < cdims; ++d) {
                const double xd = static_cast<double>(rem % Nx) * grid->hx;
                rem /= Nx;
                const double delta = std::fabs(xd - center);
                const double folded = std::min(delta, L - delta);
                expo += folded * folded / (2.0 * sx * sx);
            }
            init.u0.v[i] = cfg.amplitude * std::exp(-expo);
        }
    } else if (cfg.init_kind == "nehari-scaled") {
        const FiberScaling fiber = lambda_star(cb.eig.omega1, mp);
        if (fiber.status != FiberStatus::Ok)
            throw std::runtime_error("init: nehari-scaled data needs a positive source term "
                                     "(the ground-mode ray never crosses the Nehari set)");
        init.u0 = cb.eig.omega1;
        field_scale(init.u0, fiber.value);
        init.u1 = cb.eig.omega1;
        field_scale(init.u1, cfg.amplitude);
    } else if (cfg.init_kind == "corollary51") {
        const HighEnergyThreshold thr = high_energy_threshold(mp, cb.wc);
        // Second radial mode: sin(2 pi j / Ns), constant across the torus.
        // It is DST-orthogonal to the radial ground mode; one Gram-Schmidt
        // pass removes the rounding-level remainder.
        Field omega2(grid);
        const int Ns = grid->spec.Ns;
        const std::size_t N = grid->interior_count;
        for (std::size_t i = 0; i < N; ++i) {
            const int j = grid->radial_index(i);
            omega2.v[i] = std::sin(2.0 * 3.14159265358979323846 * j / Ns);
        }
        const double proj = weighted_inner(omega2, cb.eig.omega1) /
                            weighted_inner(cb.eig.omega1, cb.eig.omega1);
        field_axpy(omega2, -proj, cb.eig.omega1);

        const HighEnergyData data = construct_high_energy_data(cfg.R, cb.eig.omega1, omega2, mp, thr);
        init.u0 = data.u0;
        init.u1 = data.u1;
        init.r1 = data.r1;
        init.r2 = data.r2;
        init.threshold = thr;
        init.check = high_energy_blowup_check(init.u0, init.u1, mp, thr);
    } else {
        throw std::invalid_argument("init: unknown kind '" + cfg.init_kind + "'");
    }
    return init;
}

namespace {

std::string render_series(const EnergySeries& series) {
    std::ostringstream out;
    out << "t,E,J,I,L2,Lp_g,damping_integral,label\n";
    for (const SeriesRow& row : series.rows) {
        out << format_g17(row.t) << ',' << format_g17(row.E) << ',' << format_g17(row.J) << ','
            << format_g17(row.I) << ',' << format_g17(row.L2) << ',' << format_g17(row.Lp_g) << ','
            << format_g17(row.damping_integral) << ',' << well_label_name(row.label) << '\n';
    }
    return out.str();
}

std::string render_summary(const RunArtifacts& art, const RunConfig& cfg,
                           const ConeGrid& grid, const ModelParams& mp) {
    std::ostringstream out;
    append_kv(out, "run.classification", art.classification);
    append_kv(out, "run.exit_code", std::to_string(art.exit_code));
    append_kv(out, "run.outcome",
              art.sim.outcome == RunOutcome::Blowup ? "blow-up" : "completed");

    append_kv(out, "grid.n", std::to_string(grid.spec.n));
    append_kv(out, "grid.Ns", std::to_string(grid.spec.Ns));
    append_kv(out, "grid.Nx", std::to_string(grid.spec.Nx));
    append_kv(out, "grid.s_min", grid.spec.s_min);
    append_kv(out, "grid.torus_length", grid.spec.torus_length);
    append_kv(out, "grid.hs", grid.hs);
    append_kv(out, "grid.hx", grid.hx);
    append_kv(out, "grid.interior_count", std::to_string(grid.interior_count));
    append_kv(out, "grid.measure", grid.total_measure());

    append_kv(out, "model.p", mp.p);
    append_kv(out, "model.m", mp.m);
    append_kv(out, "model.gamma", mp.gamma);
    append_kv(out, "model.potential", potential_tag_name(mp.potential_tag));
    append_kv(out, "model.g.kind", cfg.g_kind);
    append_kv(out, "model.alpha", mp.alpha);
    append_kv(out, "model.beta", mp.beta);

    append_kv(out, "scheme.dt", art.scheme.dt);
    append_kv(out, "scheme.cfl_safety", art.scheme.cfl_safety);
    append_kv(out, "scheme.cfl_limit", cfl_limit(grid));
    append_kv(out, "scheme.blowup_cap", art.scheme.blowup_cap);
    append_kv(out, "scheme.newton_tol", art.scheme.newton_tol);
    append_kv(out, "scheme.t_max", art.scheme.t_max);

    append_kv(out, "init.kind", cfg.init_kind);
    append_kv(out, "init.amplitude", cfg.amplitude);
    if (cfg.init_kind == "corollary51") {
        append_kv(out, "init.R", cfg.R);
        append_kv(out, "init.r1", art.init.r1);
        append_kv(out, "init.r2", art.init.r2);
    }

    append_kv(out, "constants.lambda1", art.constants.lambda1);
    append_kv(out, "constants.embedding", art.constants.embedding_const);
    append_kv(out, "constants.hardy", art.constants.hardy_const);
    append_kv(out, "constants.c1", art.constants.c1);
    append_kv(out, "constants.c2", art.constants.c2);
    append_kv(out, "constants.d", art.constants.d);
    append_kv(out, "constants.restarts", std::to_string(cfg.restarts));

    append_kv(out, "energy.E0", art.E0);
    if (art.theta) append_kv(out, "energy.theta", *art.theta);
    if (art.d1) append_kv(out, "energy.d1", *art.d1);

    if (art.decay) {
        append_kv(out, "decay.mode",
                  art.decay->mode == DecayMode::Exponential ? "exponential" : "algebraic");
        append_kv(out, "decay.rate", art.decay->rate);
        append_kv(out, "decay.amplitude", art.decay->amplitude);
        append_kv(out, "decay.r_squared", art.decay->r_squared);
        append_kv(out, "decay.window_begin", art.decay->window_begin);
        append_kv(out, "decay.window_end", art.decay->window_end);
    }

    if (art.sim.outcome == RunOutcome::Blowup) {
        append_kv(out, "blowup.time", art.sim.blowup_time);
        append_kv(out, "blowup.trigger", art.sim.blowup_trigger);
    }

    if (art.init.threshold) {
        append_kv(out, "highenergy.M0", art.init.threshold->M0);
        append_kv(out, "highenergy.M", art.init.threshold->M);
        append_kv(out, "highenergy.K", art.init.threshold->K);
        append_kv(out, "highenergy.eta", art.init.threshold->eta);
    }
    if (art.init.check) {
        append_kv(out, "highenergy.inner", art.init.check->inner);
        append_kv(out, "highenergy.threshold", art.init.check->threshold);
        append_kv(out, "highenergy.satisfied", art.init.check->satisfied ? "yes" : "no");
    }
    if (art.concavity) {
        const ConcavityBound& cb = *art.concavity;
        append_kv(out, "concavity.sigma", cb.sigma);
        append_kv(out, "concavity.eps2", cb.eps2);
        append_kv(out, "concavity.eps", cb.eps);
        append_kv(out, "concavity.rho1", cb.rho1);
        append_kv(out, "concavity.rho2", cb.rho2);
        append_kv(out, "concavity.M1", cb.M1);
        append_kv(out, "concavity.M2", cb.M2);
        append_kv(out, "concavity.F0", cb.F0);
        append_kv(out, "concavity.hypothesis_ok", cb.hypothesis_ok ? "yes" : "no");
        if (cb.hypothesis_ok) append_kv(out, "concavity.T_upper", cb.T_upper);
        else append_kv(out, "concavity.failure", cb.failure);
    }

    if (art.E0 < 0.0 && mp.p > mp.m) {
        // Negative-energy regime: report the admissible exponent and the
        // Lyapunov seed L0 = (-E0)^(1-eta) + eps (u0, u1) with eps = 1e-3.
        const double eta = *subcritical_eta_upper(mp.p, mp.m);
        const double inner = weighted_inner(art.init.u0, art.init.u1);
        append_kv(out, "subcritical.eta", eta);
        const double L0 = std::pow(-art.E0, 1.0 - eta) + 1e-3 * inner;
        append_kv(out, "subcritical.L0", L0);
        if (art.sim.outcome == RunOutcome::Blowup && L0 > 0.0)
            append_kv(out, "subcritical.calibrated_C",
                      calibrate_subcritical_C(L0, eta, art.sim.blowup_time));
    }

    append_kv(out, "monitor.violations", std::to_string(art.monitor.violations.size()));
    if (art.well_side.first_V_entry)
        append_kv(out, "monitor.first_entry_V", *art.well_side.first_V_entry);
    append_kv(out, "monitor.min_boundary_margin", art.well_side.min_boundary_margin);
    append_kv(out, "monitor.entered_V_below_d", art.well_side.entered_V_below_d ? "yes" : "no");

    append_kv(out, "series.rows", std::to_string(art.sim.series.rows.size()));
    append_kv(out, "steps.taken", std::to_string(art.sim.steps_taken));
    append_kv(out, "prng.algorithm", kPrngAlgorithm);
    append_kv(out, "prng.seed", std::to_string(cfg.seed));
    return out.str();
}

} // namespace

RunArtifacts run_config(const RunConfig& cfg, const SharedPieces* shared) {
    const GridPtr grid = shared ? shared->grid : build_grid(cfg.grid);
    const ModelParams mp = materialize_model(grid, cfg);

    ConstantsBundle cb;
    if (shared) {
        cb.eig = shared->eig;
        cb.wc.lambda1 = shared->eig.lambda1;
        cb.wc.hardy_const = shared->hardy_const;
        cb.wc.embedding_const = shared->embedding_const
            ? *shared->embedding_const
            : estimate_embedding_constant(grid, mp, cfg.restarts,
                                          substream(cfg.seed, kConstantsStream)).value;
        const CoercivityPair cp = coercivity_constants(mp.gamma, cb.wc.hardy_const);
        cb.wc.c1 = cp.c1;
        cb.wc.c2 = cp.c2;
        cb.wc.d = well_depth(cb.wc.embedding_const, cb.wc.hardy_const, mp.gamma, mp.p);
    } else {
        cb = compute_constants_bundle(grid, mp, cfg.restarts, substream(cfg.seed, kConstantsStream));
    }

    RunArtifacts art;
    art.constants = cb.wc;
    art.init = build_init(grid, mp, cb, cfg);

    art.scheme.cfl_safety = cfg.cfl_safety;
    art.scheme.newton_tol = cfg.newton_tol;
    art.scheme.t_max = cfg.t_max;
    art.scheme.dt = cfg.dt > 0.0 ? cfg.dt : cfg.cfl_safety * cfl_limit(*grid);
    art.scheme.blowup_cap = cfg.blowup_cap > 0.0
        ? cfg.blowup_cap
        : 1e6 * std::max(1.0, cone_norm(art.init.u0, 2.0));

    art.sim = run_simulation(art.init.u0, art.init.u1, art.scheme, mp, cb.wc, cfg.record_every);
    art.E0 = art.sim.series.rows.front().E;

    if (art.E0 >= 0.0 && art.E0 < cb.wc.d) {
        art.theta = theta_coefficient(art.E0, cb.wc.embedding_const, cb.wc.hardy_const,
                                      mp.gamma, mp.p, cb.wc.d);
        art.d1 = 0.5 * (art.E0 + cb.wc.d);
    }

    if (art.sim.outcome == RunOutcome::Blowup) {
        art.classification = "blow-up";
        art.exit_code = 2;
    } else {
        art.classification = "global";
        art.exit_code = 0;
        try {
            const DecayReport dr = fit_decay(art.sim.series, mp.m);
            art.decay = dr;
            const bool decaying = (mp.m == 2.0) ? (dr.rate > 0.0) : (dr.rate < 0.0);
            if (decaying) art.classification = "global-decay";
        } catch (const std::runtime_error&) {
            // Too few samples above the floor; leave the plain label.
        }
    }

    art.monitor = invariant_set_monitor(art.sim.series, cb.wc);
    art.well_side = summarize_well_side(art.sim.series, cb.wc.d, mp.p);

    if (art.init.threshold) {
        try {
            art.concavity = concavity_time_bound(art.init.u0, art.init.u1, mp, cb.wc);
        } catch (const std::domain_error&) {
            // Hypotheses structurally unavailable (p <= m or alpha = 0).
        }
    }

    art.series_text = render_series(art.sim.series);
    art.summary_text = render_summary(art, cfg, *grid, mp);
    return art;
}

RunArtifacts run_and_write(const RunConfig& cfg) {
    RunArtifacts art = run_config(cfg, nullptr);
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    art.series_path = (fs::path(cfg.out_dir) / "series.csv").string();
    art.summary_path = (fs::path(cfg.out_dir) / "summary.txt").string();
    write_text(art.series_path, art.series_text);
    write_text(art.summary_path, art.summary_text);
    return art;
}

namespace {

RunConfig apply_axis(const RunConfig& base, const std::string& axis, double value) {
    RunConfig child = base;
    child.has_sweep = false;
    child.sweep_axis.clear();
    child.sweep_values.clear();
    if (axis == "amplitude") child.amplitude = value;
    else if (axis == "gamma") child.gamma = value;
    else if (axis == "p") child.p = value;
    else if (axis == "m") child.m = value;
    else throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    return child;
}

void validate_axis_value(const RunConfig& base, const std::string& axis, double value) {
    if (axis == "amplitude" && !(value >= 0.0))
        throw std::invalid_argument("sweep: amplitude values must be >= 0");
    if (axis == "gamma" && !(value >= 0.0))
        throw std::invalid_argument("sweep: gamma values must be >= 0");
    if (axis == "p") {
        const double sup = (2.0 * base.grid.n - 2.0) / (base.grid.n - 2.0);
        if (!(value > 2.0 && value < sup))
            throw std::invalid_argument("sweep: p values must satisfy 2 < p < " + std::to_string(sup));
    }
    if (axis == "m" && !(value >= 2.0))
        throw std::invalid_argument("sweep: m values must be >= 2");
}

} // namespace

SweepArtifacts run_sweep(const RunConfig& cfg, bool write_files) {
    if (!cfg.has_sweep || cfg.sweep_axis.empty() || cfg.sweep_values.empty())
        throw std::invalid_argument("sweep: configuration needs sweep.axis and sweep.values");
    for (double v : cfg.sweep_values) validate_axis_value(cfg, cfg.sweep_axis, v);

    SharedPieces pieces;
    pieces.grid = build_grid(cfg.grid);
    pieces.eig = smallest_eigenpair(pieces.grid);
    {
        const ModelParams base_mp = materialize_model(pieces.grid, cfg);
        pieces.hardy_const = estimate_hardy_constant(pieces.grid, base_mp);
        if (cfg.sweep_axis != "p")
            pieces.embedding_const = estimate_embedding_constant(
                pieces.grid, base_mp, cfg.restarts, substream(cfg.seed, kConstantsStream)).value;
    }

    const std::size_t n = cfg.sweep_values.size();
    std::vector<SweepRow> rows(n);
    std::vector<std::string> failures(n);
    std::atomic<std::size_t> cursor{0};

    auto work = [&]() {
        while (true) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= n) break;
            const double value = cfg.sweep_values[k];
            try {
                const RunConfig child = apply_axis(cfg, cfg.sweep_axis, value);
                const RunArtifacts art = run_config(child, &pieces);
                SweepRow row;
                row.value = value;
                row.E0 = art.E0;
                row.E0_over_d = art.E0 / art.constants.d;
                row.classification = art.classification;
                if (art.sim.outcome == RunOutcome::Blowup) row.time_or_rate = art.sim.blowup_time;
                else if (art.decay) row.time_or_rate = art.decay->rate;
                row.first_entry_V = art.well_side.first_V_entry;
                const bool blew = art.sim.outcome == RunOutcome::Blowup;
                if (art.well_side.min_boundary_margin < 1e-3) row.consistency = "unresolved";
                else row.consistency = (blew == art.well_side.entered_V_below_d) ? "yes" : "no";
                rows[k] = std::move(row);
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        }
    };

    const int workers = static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(std::max(cfg.sweep_workers, 1)), n));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    for (std::size_t k = 0; k < n; ++k)
        if (!failures[k].empty())
            throw std::runtime_error("sweep: value " + format_g17(cfg.sweep_values[k]) +
                                     " failed: " + failures[k]);

    SweepArtifacts out;
    out.rows = std::move(rows);
    std::ostringstream table;
    table << "value,E0,E0_over_d,classification,time_or_rate,first_entry_V,blowup_well_consistent\n";
    for (const SweepRow& row : out.rows) {
        table << format_g17(row.value) << ',' << format_g17(row.E0) << ','
              << format_g17(row.E0_over_d) << ',' << row.classification << ','
              << (row.time_or_rate ? format_g17(*row.time_or_rate) : std::string()) << ','
              << (row.first_entry_V ? format_g17(*row.first_entry_V) : std::string()) << ','
              << row.consistency << '\n';
    }
    out.table_text = table.str();

    if (write_files) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        out.table_path = (fs::path(cfg.out_dir) / "phase_table.csv").string();
        write_text(out.table_path, out.table_text);
    }
    return out;
}

std::string constants_text(const RunConfig& cfg) {
    const GridPtr grid = build_grid(cfg.grid);
    const ModelParams mp = materialize_model(grid, cfg);
    const ConstantsBundle cb =
        compute_constants_bundle(grid, mp, cfg.restarts, substream(cfg.seed, kConstantsStream));

    std::ostringstream out;
    append_kv(out, "grid.n", std::to_string(grid->spec.n));
    append_kv(out, "grid.Ns", std::to_string(grid->spec.Ns));
    append_kv(out, "grid.Nx", std::to_string(grid->spec.Nx));
    append_kv(out, "grid.s_min", grid->spec.s_min);
    append_kv(out, "grid.torus_length", grid->spec.torus_length);
    append_kv(out, "grid.interior_count", std::to_string(grid->interior_count));
    append_kv(out, "model.p", mp.p);
    append_kv(out, "model.m", mp.m);
    append_kv(out, "model.gamma", mp.gamma);
    append_kv(out, "model.potential", potential_tag_name(mp.potential_tag));
    append_kv(out, "model.alpha", mp.alpha);
    append_kv(out, "model.beta", mp.beta);
    append_kv(out, "constants.lambda1", cb.wc.lambda1);
    append_kv(out, "constants.embedding", cb.wc.embedding_const);
    append_kv(out, "constants.hardy", cb.wc.hardy_const);
    append_kv(out, "constants.c1", cb.wc.c1);
    append_kv(out, "constants.c2", cb.wc.c2);
    append_kv(out, "constants.d", cb.wc.d);
    append_kv(out, "constants.restarts", std::to_string(cfg.restarts));
    append_kv(out, "constants.eigen_iterations", std::to_string(cb.eig.iterations));
    append_kv(out, "constants.eigen_residual", cb.eig.residual);
    append_kv(out, "prng.algorithm", kPrngAlgorithm);
    append_kv(out, "prng.seed", std::to_string(cfg.seed));
    return out.str();
}

} // namespace conewave
