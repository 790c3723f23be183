#include "operators.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace conewave {

Field apply_laplacian(const Field& f) {
    if (!f.grid) throw std::invalid_argument("apply_laplacian: field has no grid");
    const ConeGrid& g = *f.grid;
    const std::size_t N = g.interior_count;
    const double inv_hs2 = 1.0 / (g.hs * g.hs);
    const double inv_hx2 = 1.0 / (g.hx * g.hx);
    const int cdims = g.spec.n - 1;

    Field out(f.grid);
    for (std::size_t i = 0; i < N; ++i) {
        const double c = f.v[i];
        const std::int64_t jp = g.s_plus[i];
        const std::int64_t jm = g.s_minus[i];
        double acc = ((jp >= 0 ? f.v[jp] : 0.0) - 2.0 * c + (jm >= 0 ? f.v[jm] : 0.0)) * inv_hs2;
        for (int d = 0; d < cdims; ++d) {
            acc += (f.v[g.x_plus[d][i]] - 2.0 * c + f.v[g.x_minus[d][i]]) * inv_hx2;
        }
        out.v[i] = acc;
    }
    return out;
}

double GradientField::norm_sq() const {
    double acc = 0.0;
    for (const auto& comp : component)
        for (double e : comp) acc += e * e;
    return grid->weight * acc;
}

GradientField apply_gradient(const Field& f) {
    if (!f.grid) throw std::invalid_argument("apply_gradient: field has no grid");
    const ConeGrid& g = *f.grid;
    const int Ns = g.spec.Ns;
    const int cdims = g.spec.n - 1;
    const std::size_t cc = g.cross_count;

    GradientField out;
    out.grid = f.grid;
    out.component.resize(1 + cdims);

    // Radial edges: (f_{j+1} - f_j)/hs with zero ghosts at j = 0 and j = Ns.
    auto& rad = out.component[0];
    rad.assign(static_cast<std::size_t>(Ns) * cc, 0.0);
    const double inv_hs = 1.0 / g.hs;
    for (int j = 0; j < Ns; ++j) {
        for (std::size_t c = 0; c < cc; ++c) {
            const double lower = (j >= 1) ? f.v[(j - 1) * cc + c] : 0.0;
            const double upper = (j + 1 <= Ns - 1) ? f.v[j * cc + c] : 0.0;
            rad[static_cast<std::size_t>(j) * cc + c] = (upper - lower) * inv_hs;
        }
    }

    // Cross edges: forward periodic differences, one edge per node.
    const double inv_hx = 1.0 / g.hx;
    const std::size_t N = g.interior_count;
    for (int d = 0; d < cdims; ++d) {
        auto& comp = out.component[1 + d];
        comp.assign(N, 0.0);
        const auto& xp = g.x_plus[d];
        for (std::size_t i = 0; i < N; ++i)
            comp[i] = (f.v[xp[i]] - f.v[i]) * inv_hx;
    }
    return out;
}

double gradient_norm_sq(const Field& f) {
    if (!f.grid) throw std::invalid_argument("gradient_norm_sq: field has no grid");
    const ConeGrid& g = *f.grid;
    const int Ns = g.spec.Ns;
    const int cdims = g.spec.n - 1;
    const std::size_t cc = g.cross_count;
    const std::size_t N = g.interior_count;

    double acc = 0.0;
    const double inv_hs2 = 1.0 / (g.hs * g.hs);
    for (int j = 0; j < Ns; ++j) {
        for (std::size_t c = 0; c < cc; ++c) {
            const double lower = (j >= 1) ? f.v[(j - 1) * cc + c] : 0.0;
            const double upper = (j + 1 <= Ns - 1) ? f.v[j * cc + c] : 0.0;
            const double diff = upper - lower;
            acc += diff * diff * inv_hs2;
        }
    }
    const double inv_hx2 = 1.0 / (g.hx * g.hx);
    for (int d = 0; d < cdims; ++d) {
        const auto& xp = g.x_plus[d];
        for (std::size_t i = 0; i < N; ++i) {
            const double diff = f.v[xp[i]] - f.v[i];
            acc += diff * diff * inv_hx2;
        }
    }
    return g.weight * acc;
}

double potential_value(PotentialTag tag, double x1, double xprime_norm, int n) {
    switch (tag) {
    case PotentialTag::None:
        return 0.0;
    case PotentialTag::InverseSquareShifted: {
        const double coeff = (n - 3) * (n - 3) / 4.0;
        if (coeff == 0.0) return 0.0;
        return coeff / (x1 * x1 + xprime_norm * xprime_norm);
    }
    case PotentialTag::HardyRegularized: {
        const double coeff = (n - 1) * (n - 1) / 4.0;
        const double E = std::exp(-1.0 / (x1 * x1));
        const double r2 = xprime_norm * xprime_norm;
        if (E == 0.0) {
            // exp underflowed; the exact limit is coeff/x1^2 on the axis and 0 off it.
            return (r2 == 0.0) ? coeff / (x1 * x1) : 0.0;
        }
        return coeff / (x1 * x1) * E / (E + r2);
    }
    }
    return 0.0;
}

Field potential_field(const GridPtr& grid, PotentialTag tag) {
    Field out(grid);
    const std::size_t N = grid->interior_count;
    const int n = grid->spec.n;
    for (std::size_t i = 0; i < N; ++i)
        out.v[i] = potential_value(tag, grid->x1[i], grid->xprime_norm[i], n);
    return out;
}

PotentialTag potential_tag_from_name(const std::string& name) {
    if (name == "none") return PotentialTag::None;
    if (name == "v1") return PotentialTag::InverseSquareShifted;
    if (name == "v2") return PotentialTag::HardyRegularized;
    throw std::invalid_argument("unknown potential name: " + name);
}

const char* potential_tag_name(PotentialTag tag) {
    switch (tag) {
    case PotentialTag::None: return "none";
    case PotentialTag::InverseSquareShifted: return "v1";
    case PotentialTag::HardyRegularized: return "v2";
    }
    return "none";
}

namespace {

// Sparse matrix of -Laplacian on the interior nodes (SPD).
Eigen::SparseMatrix<double> negative_laplacian_matrix(const ConeGrid& g) {
    const std::size_t N = g.interior_count;
    const double inv_hs2 = 1.0 / (g.hs * g.hs);
    const double inv_hx2 = 1.0 / (g.hx * g.hx);
    const int cdims = g.spec.n - 1;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(N * (2 * g.spec.n + 1));
    for (std::size_t i = 0; i < N; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double diag = 2.0 * inv_hs2;
        if (g.s_plus[i] >= 0) trips.emplace_back(ii, static_cast<Eigen::Index>(g.s_plus[i]), -inv_hs2);
        if (g.s_minus[i] >= 0) trips.emplace_back(ii, static_cast<Eigen::Index>(g.s_minus[i]), -inv_hs2);
        for (int d = 0; d < cdims; ++d) {
            diag += 2.0 * inv_hx2;
            trips.emplace_back(ii, static_cast<Eigen::Index>(g.x_plus[d][i]), -inv_hx2);
            trips.emplace_back(ii, static_cast<Eigen::Index>(g.x_minus[d][i]), -inv_hx2);
        }
        trips.emplace_back(ii, ii, diag);
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

} // namespace

EigenPair smallest_eigenpair(const GridPtr& grid) {
    const ConeGrid& g = *grid;
    const auto N = static_cast<Eigen::Index>(g.interior_count);

    Eigen::SparseMatrix<double> A = negative_laplacian_matrix(g);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("smallest_eigenpair: sparse factorization failed");

    // Inverse power iteration.  The all-ones start has positive overlap with
    // the single-signed ground mode, so the iteration is deterministic.  The
    // Rayleigh quotient converges quadratically in the eigenvector angle, so
    // the stop test must watch the eigen-residual (linear in the angle), not
    // the quotient's stagnation.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(N);
    x.normalize();
    double lambda = x.dot(A * x);
    double resid = (A * x - lambda * x).norm();

    const int max_iter = 10000;
    int it = 0;
    for (; it < max_iter; ++it) {
        Eigen::VectorXd y = solver.solve(x);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("smallest_eigenpair: sparse solve failed");
        y.normalize();
        const Eigen::VectorXd Ay = A * y;
        lambda = y.dot(Ay);
        resid = (Ay - lambda * y).norm();
        x = y;
        if (resid <= 1e-9 * lambda) { ++it; break; }
    }
    if (it >= max_iter)
        throw std::runtime_error("smallest_eigenpair: inverse iteration did not converge");

    if (!(resid <= 1e-8 * lambda))
        throw std::runtime_error("smallest_eigenpair: residual check failed");

    if (x.sum() < 0.0) x = -x;

    EigenPair out;
    out.lambda1 = lambda;
    out.iterations = it;
    out.omega1 = Field(grid);
    // Rescale from the Euclidean normalization to the cone norm ||.||_2 = 1.
    // The cone-norm residual of the rescaled pair equals the Euclidean one.
    const double scale = 1.0 / std::sqrt(g.weight);
    for (Eigen::Index i = 0; i < N; ++i) out.omega1.v[static_cast<std::size_t>(i)] = x[i] * scale;
    out.residual = resid;
    return out;
}

} // namespace conewave
