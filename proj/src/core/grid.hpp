#pragma once

// Discrete stretched cone in log-radial coordinates.
//
// The domain is the collar [x1_min, 1] x T^{n-1} of a cone, written in the
// coordinate s = ln x1.  That substitution turns the degenerate radial
// derivative x1*d/dx1 into d/ds and the singular measure dx1/x1 dx' into the
// uniform measure ds dx', so every weighted norm below is an ordinary sum
// with one constant weight per node.
//
// Radial direction: s_j = s_min + j*hs for j = 0..Ns, with Dirichlet rows at
// j = 0 (the truncated tip) and j = Ns (the collar edge s = 0).  Interior
// unknowns are j = 1..Ns-1.  Cross-section: flat (n-1)-torus, Nx nodes per
// dimension, spacing hx = torus_length/Nx, periodic.

#include <cstdint>
#include <memory>
#include <vector>

namespace conewave {

struct GridSpec {
    int n = 3;                   // spatial dimension, cross-section has n-1 dims
    int Ns = 8;                  // radial subdivisions
    int Nx = 4;                  // cross-section subdivisions per dimension
    double s_min = -4.0;         // log-radial truncation, s = ln x1 (negative)
    double torus_length = 6.283185307179586476925286766559; // cross-section period
};

class ConeGrid {
public:
    explicit ConeGrid(const GridSpec& spec);

    GridSpec spec;
    double hs = 0.0;             // |s_min|/Ns
    double hx = 0.0;             // torus_length/Nx
    double weight = 0.0;         // quadrature weight hs*hx^(n-1) per interior node
    std::size_t cross_count = 0; // Nx^(n-1)
    std::size_t interior_count = 0; // (Ns-1)*Nx^(n-1)

    // Neighbor tables, one entry per interior node.  Radial neighbors are -1
    // where the stencil touches a Dirichlet row (ghost value 0).  Cross
    // neighbors are always valid (periodic).
    std::vector<std::int64_t> s_plus, s_minus;
    std::vector<std::vector<std::int64_t>> x_plus, x_minus; // [dim 0..n-2][node]

    // Per-node coordinates needed by the singular potentials.
    std::vector<double> x1;          // e^{s_j}
    std::vector<double> xprime_norm; // torus distance to the cross-section origin

    double s_of(std::size_t node) const;   // log-radial coordinate of a node
    int radial_index(std::size_t node) const; // j in 1..Ns-1
    double total_measure() const;           // |s_min| * torus_length^(n-1)
};

using GridPtr = std::shared_ptr<const ConeGrid>;

// Validates the GridSpec and builds the grid.  Throws std::invalid_argument on
// n < 3, Ns < 4, Nx < 1, s_min >= 0, or torus_length <= 0.  (Nx = 1 is the
// collapsed cross-section used for radial eigenvalue studies; configuration
// files additionally require Nx >= 2 for simulation runs.)
GridPtr build_grid(const GridSpec& spec);

// Scalar field on the interior nodes of one grid.  Boundary values are
// implicitly zero (Dirichlet).
struct Field {
    GridPtr grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(GridPtr g) : grid(std::move(g)), v(grid->interior_count, 0.0) {}
    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

Field make_field(const GridPtr& grid);

// (f, g) = sum of weight * f * g over interior nodes.  Throws on grid mismatch.
double weighted_inner(const Field& f, const Field& g);

// (sum of weight * |f|^p)^(1/p).  Requires p >= 1.
double cone_norm(const Field& f, double p);

// In-place axpy helpers used throughout the lab (deterministic sequential loops).
void field_scale(Field& f, double c);
void field_axpy(Field& y, double a, const Field& x); // y += a*x

} // namespace conewave
