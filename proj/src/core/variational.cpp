#include "variational.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rng.hpp"

namespace conewave {

namespace {

void require_grid(const Field& u, const ModelParams& mp) {
    if (!u.grid) throw std::invalid_argument("variational: field has no grid");
    if (mp.potential.grid && mp.potential.grid != u.grid)
        throw std::invalid_argument("variational: potential lives on a different grid");
    if (mp.g.grid && mp.g.grid != u.grid)
        throw std::invalid_argument("variational: source weight lives on a different grid");
}

} // namespace

ABSplit ab_split(const Field& u, const ModelParams& mp) {
    require_grid(u, mp);
    const std::size_t N = u.size();
    const double w = u.grid->weight;

    double a = gradient_norm_sq(u);
    if (mp.gamma != 0.0 && mp.potential.grid) {
        double vq = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            vq += mp.potential.v[i] * u.v[i] * u.v[i];
        a -= mp.gamma * w * vq;
    }

    double b = 0.0;
    if (mp.g.grid) {
        const double p = mp.p;
        for (std::size_t i = 0; i < N; ++i)
            b += mp.g.v[i] * std::pow(std::fabs(u.v[i]), p);
        b *= w;
    }
    return {a, b};
}

double functional_J(const Field& u, const ModelParams& mp) {
    const ABSplit s = ab_split(u, mp);
    return 0.5 * s.a - s.b / mp.p;
}

double functional_I(const Field& u, const ModelParams& mp) {
    const ABSplit s = ab_split(u, mp);
    return s.a - s.b;
}

double total_energy(const Field& u, const Field& ut, const ModelParams& mp) {
    const double kinetic = weighted_inner(ut, ut);
    return 0.5 * kinetic + functional_J(u, mp);
}

FiberScaling lambda_star(const Field& u, const ModelParams& mp) {
    const ABSplit s = ab_split(u, mp);
    if (s.a == 0.0 && s.b == 0.0) return {FiberStatus::ZeroField, 0.0};
    if (s.b <= 0.0) return {FiberStatus::NoCrossing, 0.0};
    if (s.a <= 0.0) return {FiberStatus::DegenerateRay, 0.0};
    return {FiberStatus::Ok, std::pow(s.a / s.b, 1.0 / (mp.p - 2.0))};
}

namespace {

// log of the Rayleigh-type ratio ||g^{1/p} u||_p / ||grad u||_2 and its
// Euclidean gradient.  `neg_lap` must hold -Laplacian applied to u.
double log_ratio(double b, double q, double p) {
    return std::log(b) / p - 0.5 * std::log(q);
}

} // namespace

EmbeddingEstimate estimate_embedding_constant(const GridPtr& grid, const ModelParams& mp,
                                              int restarts, std::uint64_t seed) {
    if (restarts < 1) throw std::invalid_argument("estimate_embedding_constant: restarts must be >= 1");
    EmbeddingEstimate best;
    if (!mp.g.grid || mp.beta <= 0.0) {
        best.converged = true; // source identically zero: the constant is 0
        return best;
    }

    const std::size_t N = grid->interior_count;
    const double w = grid->weight;
    const double p = mp.p;
    const int max_iter = 400;

    double best_F = -std::numeric_limits<double>::infinity();

    Field u(grid), grad(grid), lap(grid), trial(grid);
    for (int r = 0; r < restarts; ++r) {
        // Restart 0 is a deterministic smooth start; the rest are iid Gaussians.
        if (r == 0) {
            for (std::size_t i = 0; i < N; ++i) u.v[i] = 1.0;
        } else {
            SplitMix64 rng(substream(seed, static_cast<std::uint64_t>(r)));
            for (std::size_t i = 0; i < N; ++i) u.v[i] = rng.gaussian();
        }

        auto eval = [&](const Field& f, double& b, double& q) {
            b = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                b += mp.g.v[i] * std::pow(std::fabs(f.v[i]), p);
            b *= w;
            q = gradient_norm_sq(f);
        };

        double b = 0.0, q = 0.0;
        eval(u, b, q);
        if (!(b > 0.0) || !(q > 0.0)) continue;
        double F = log_ratio(b, q, p);

        bool converged = false;
        double step = 1.0;
        for (int it = 0; it < max_iter; ++it) {
            lap = apply_laplacian(u);
            // dF/du_i = w * (g |u|^{p-2} u / b + (Lap u) / q); both terms are
            // scale-free directions of increase of the log ratio.
            for (std::size_t i = 0; i < N; ++i) {
                const double ui = u.v[i];
                const double src = mp.g.v[i] * std::pow(std::fabs(ui), p - 2.0) * ui;
                grad.v[i] = w * (src / b + lap.v[i] / q);
            }
            double gnorm = 0.0, unorm = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                gnorm += grad.v[i] * grad.v[i];
                unorm += u.v[i] * u.v[i];
            }
            gnorm = std::sqrt(gnorm);
            unorm = std::sqrt(unorm);
            if (gnorm <= 1e-15 * std::max(unorm, 1.0)) { converged = true; break; }

            // Backtracking ascent step, scaled to the iterate.
            double trial_F = F;
            double s = step;
            bool accepted = false;
            for (int half = 0; half < 40; ++half) {
                const double eta = s * unorm / gnorm;
                for (std::size_t i = 0; i < N; ++i) trial.v[i] = u.v[i] + eta * grad.v[i];
                double tb = 0.0, tq = 0.0;
                eval(trial, tb, tq);
                if (tb > 0.0 && tq > 0.0) {
                    const double tF = log_ratio(tb, tq, p);
                    if (tF > F) {
                        trial_F = tF;
                        b = tb;
                        q = tq;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if (!accepted) { converged = true; break; }
            step = std::min(1.0, s * 2.0);
            // Renormalize to keep the iterate O(1); the ratio is 0-homogeneous.
            double scale = 0.0;
            for (std::size_t i = 0; i < N; ++i) scale += trial.v[i] * trial.v[i];
            scale = 1.0 / std::sqrt(scale);
            for (std::size_t i = 0; i < N; ++i) u.v[i] = trial.v[i] * scale;
            b *= std::pow(scale, p); // the ratio itself is 0-homogeneous
            q *= scale * scale;
            if (std::fabs(trial_F - F) <= 1e-13 * std::max(1.0, std::fabs(trial_F))) {
                F = trial_F;
                converged = true;
                break;
            }
            F = trial_F;
        }

        if (F > best_F) {
            best_F = F;
            best.value = std::exp(F);
            best.converged = converged;
            best.best_restart = r;
        }
    }
    if (!(best_F > -std::numeric_limits<double>::infinity()))
        throw std::runtime_error("estimate_embedding_constant: every restart degenerated");
    return best;
}

double estimate_hardy_constant(const GridPtr& grid, const ModelParams& mp) {
    if (!mp.potential.grid) return 0.0;
    const ConeGrid& g = *grid;
    const auto N = static_cast<Eigen::Index>(g.interior_count);

    double vmax = 0.0;
    for (double v : mp.potential.v) vmax = std::max(vmax, v);
    if (vmax == 0.0) return 0.0;

    // Largest eigenvalue mu of V u = mu (-Lap) u by power iteration on
    // (-Lap)^{-1} V, self-adjoint in the energy inner product.
    const double inv_hs2 = 1.0 / (g.hs * g.hs);
    const double inv_hx2 = 1.0 / (g.hx * g.hx);
    const int cdims = g.spec.n - 1;
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        double diag = 2.0 * inv_hs2;
        if (g.s_plus[iu] >= 0) trips.emplace_back(i, static_cast<Eigen::Index>(g.s_plus[iu]), -inv_hs2);
        if (g.s_minus[iu] >= 0) trips.emplace_back(i, static_cast<Eigen::Index>(g.s_minus[iu]), -inv_hs2);
        for (int d = 0; d < cdims; ++d) {
            diag += 2.0 * inv_hx2;
            trips.emplace_back(i, static_cast<Eigen::Index>(g.x_plus[d][iu]), -inv_hx2);
            trips.emplace_back(i, static_cast<Eigen::Index>(g.x_minus[d][iu]), -inv_hx2);
        }
        trips.emplace_back(i, i, diag);
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("estimate_hardy_constant: factorization failed");

    Eigen::VectorXd x = Eigen::VectorXd::Ones(N);
    double mu = 0.0;
    const int max_iter = 20000;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd vx(N);
        for (Eigen::Index i = 0; i < N; ++i)
            vx[i] = mp.potential.v[static_cast<std::size_t>(i)] * x[i];
        const double num = x.dot(vx);
        const double den = x.dot(A * x);
        const double mu_new = num / den;
        Eigen::VectorXd y = solver.solve(vx);
        const double ynorm = y.norm();
        if (!(ynorm > 0.0))
            throw std::runtime_error("estimate_hardy_constant: power iteration collapsed");
        x = y / ynorm;
        if (it > 0 && std::fabs(mu_new - mu) <= 1e-12 * std::fabs(mu_new)) {
            mu = mu_new;
            break;
        }
        mu = mu_new;
    }
    return std::sqrt(mu);
}

double well_depth(double embedding_const, double hardy_const, double gamma, double p) {
    if (embedding_const < 0.0) throw std::domain_error("well_depth: negative embedding constant");
    const double gc = gamma * hardy_const * hardy_const;
    if (gc >= 1.0) throw std::domain_error("well_depth: gamma * C*^2 >= 1 (quadratic part not coercive)");
    if (embedding_const == 0.0) return std::numeric_limits<double>::infinity();
    const double q = p / (p - 2.0);
    return (p - 2.0) / (2.0 * p) * std::pow(embedding_const, -2.0 * q) * std::pow(1.0 - gc, q);
}

double theta_coefficient(double E0, double embedding_const, double hardy_const,
                         double gamma, double p, double d) {
    if (!(E0 >= 0.0)) throw std::domain_error("theta_coefficient: E0 must be nonnegative");
    if (!(E0 < d)) throw std::domain_error("theta_coefficient: E0 must lie strictly below the well depth");
    const double c = 1.0 - gamma * hardy_const * hardy_const;
    if (!(c > 0.0)) throw std::domain_error("theta_coefficient: gamma * C*^2 >= 1");
    const double arg = 2.0 * p * E0 / ((p - 2.0) * c);
    return c - std::pow(embedding_const, p) * std::pow(arg, (p - 2.0) / 2.0);
}

double gagliardo_nirenberg_theta(double s1, double s2, int n) {
    if (n < 3) throw std::domain_error("gagliardo_nirenberg_theta: n must be >= 3");
    const double limit = 2.0 * n / (n - 2.0);
    if (!(s1 >= 1.0 && s1 < s2 && s2 <= limit))
        throw std::domain_error("gagliardo_nirenberg_theta: need 1 <= s1 < s2 <= 2n/(n-2)");
    return (1.0 / s1 - 1.0 / s2) / (1.0 / s1 - (n - 2.0) / (2.0 * n));
}

const char* well_label_name(WellLabel label) {
    switch (label) {
    case WellLabel::InsideW: return "InsideW";
    case WellLabel::InsideV: return "InsideV";
    case WellLabel::OnNehari: return "OnNehari";
    case WellLabel::AboveD: return "AboveD";
    case WellLabel::Zero: return "Zero";
    }
    return "Zero";
}

CoercivityPair coercivity_constants(double gamma, double hardy_const) {
    const double gc = gamma * hardy_const * hardy_const;
    if (gamma >= 0.0) return {1.0 - gc, 1.0};
    return {1.0, 1.0 - gc};
}

WellConstants compute_well_constants(const GridPtr& grid, const ModelParams& mp,
                                     int restarts, std::uint64_t seed) {
    WellConstants wc;
    wc.lambda1 = smallest_eigenpair(grid).lambda1;
    wc.embedding_const = estimate_embedding_constant(grid, mp, restarts, seed).value;
    wc.hardy_const = estimate_hardy_constant(grid, mp);
    const CoercivityPair cp = coercivity_constants(mp.gamma, wc.hardy_const);
    wc.c1 = cp.c1;
    wc.c2 = cp.c2;
    wc.d = well_depth(wc.embedding_const, wc.hardy_const, mp.gamma, mp.p);
    return wc;
}

WellLabel classify_from_split(const ABSplit& s, bool zero_field, double p, double d) {
    if (zero_field) return WellLabel::Zero;
    const double I = s.a - s.b;
    const double J = 0.5 * s.a - s.b / p;
    if (std::fabs(I) <= 1e-8 * (std::fabs(s.a) + std::fabs(s.b))) return WellLabel::OnNehari;
    if (I > 0.0 && J < d) return WellLabel::InsideW;
    if (I < 0.0 && J < d) return WellLabel::InsideV;
    return WellLabel::AboveD;
}

WellLabel classify_state(const Field& u, const ModelParams& mp, const WellConstants& wc) {
    return classify_from_split(ab_split(u, mp), gradient_norm_sq(u) == 0.0, mp.p, wc.d);
}

} // namespace conewave
