#pragma once

// Spatial operators on the stretched cone: the Fuchsian Laplacian in
// log-radial coordinates, its summation-by-parts gradient, the two singular
// potential profiles, and the ground eigenpair of -Laplacian.

#include <cstdint>
#include <string>
#include <vector>

#include "grid.hpp"

namespace conewave {

// Second-order central Laplacian: d2/ds2 with zero Dirichlet ghosts in the
// radial direction plus the periodic cross-section Laplacian.
Field apply_laplacian(const Field& f);

// Forward-difference gradient stored on cell edges, one array per direction.
// Radial direction: Ns edges per radial line (both boundary edges reach a
// zero ghost).  Cross directions: Nx periodic edges per ring, stored at the
// node that owns the edge's lower end.  This layout makes the discrete Green
// identity ||grad f||^2 = -(Lap f, f) exact to rounding.
struct GradientField {
    GridPtr grid;
    // component[0]: radial edges, size Ns * cross_count; edge (j -> j+1) of
    // cross column c lives at index j*cross_count + c for j = 0..Ns-1.
    // component[d], d >= 1: cross-direction d-1 edges, one per interior node.
    std::vector<std::vector<double>> component;

    double norm_sq() const; // weighted l2 squared over all edges
};

GradientField apply_gradient(const Field& f);

// ||grad f||^2 computed by direct edge sums (independent of apply_laplacian).
double gradient_norm_sq(const Field& f);

enum class PotentialTag { None, InverseSquareShifted, HardyRegularized };

// Pointwise potential values.
//   InverseSquareShifted: ((n-3)/2)^2 / (x1^2 + |x'|^2)   (identically 0 at n = 3)
//   HardyRegularized:     ((n-1)/2)^2 * x1^-2 * E / (E + |x'|^2), E = exp(-1/x1^2)
// |x'| is the torus distance to the cross-section origin.  The second profile
// concentrates on the axis |x'| = 0 and grows like x1^-2 toward the tip.
double potential_value(PotentialTag tag, double x1, double xprime_norm, int n);

// Potential sampled at the interior nodes (node collocation).
Field potential_field(const GridPtr& grid, PotentialTag tag);

PotentialTag potential_tag_from_name(const std::string& name); // "none"|"v1"|"v2"
const char* potential_tag_name(PotentialTag tag);

struct EigenPair {
    double lambda1 = 0.0;  // smallest eigenvalue of -Laplacian (Dirichlet radial)
    Field omega1;          // eigenfunction, cone-normalized ||omega1||_2 = 1, positive mean
    int iterations = 0;
    double residual = 0.0; // ||(-Lap - lambda1) omega1||_2
};

// Inverse power iteration with a sparse direct factorization.  Deterministic
// start vector (all ones); iterates until the eigen-residual drops to
// 1e-9 * lambda1, iteration cap 10000.  Throws std::runtime_error on
// non-convergence or if the final residual exceeds 1e-8 * lambda1.
EigenPair smallest_eigenpair(const GridPtr& grid);

} // namespace conewave
