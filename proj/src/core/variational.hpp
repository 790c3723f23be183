#pragma once

// Variational layer: energy functionals, the Nehari fiber map, the optimal
// embedding and potential-Hardy constants of the discretization, the
// potential-well depth, and the state classifier used by the invariance
// monitors.

#include <cstdint>
#include <optional>
#include <string>

#include "grid.hpp"
#include "operators.hpp"

namespace conewave {

// Materialized model: every coefficient evaluated at the interior nodes.
struct ModelParams {
    double p = 3.0;       // source exponent, 2 < p < (2n-2)/(n-2) for simulations
    double m = 2.0;       // damping exponent, m >= 2
    double gamma = 0.0;   // potential coupling
    PotentialTag potential_tag = PotentialTag::None;
    Field potential;      // V at the nodes (zeros when tag == None)
    Field g;              // source weight at the nodes, 0 <= g
    double alpha = 1.0;   // inf of g over the nodes
    double beta = 1.0;    // sup of g over the nodes
};

// Quadratic part a(u) = ||grad u||^2 - gamma (V u, u) and source part
// b(u) = sum w g |u|^p.  Everything downstream is assembled from these two.
struct ABSplit {
    double a = 0.0;
    double b = 0.0;
};

ABSplit ab_split(const Field& u, const ModelParams& mp);

double functional_J(const Field& u, const ModelParams& mp); // a/2 - b/p
double functional_I(const Field& u, const ModelParams& mp); // a - b
double total_energy(const Field& u, const Field& ut, const ModelParams& mp); // ||ut||^2/2 + J(u)

// Fiber scaling lambda* = (a/b)^(1/(p-2)) placing lambda* u on the Nehari set.
enum class FiberStatus {
    Ok,
    NoCrossing,       // b(u) <= 0: the ray never crosses the Nehari set
    DegenerateRay,    // a(u) <= 0 with b > 0 (quadratic part not coercive on this ray)
    ZeroField,
};
struct FiberScaling {
    FiberStatus status = FiberStatus::Ok;
    double value = 0.0;
};
FiberScaling lambda_star(const Field& u, const ModelParams& mp);

// Best constant of ||g^{1/p} u||_p <= C ||grad u||_2 over the discrete space,
// estimated by multistart projected gradient ascent on the log ratio.
// Deterministic for a fixed (seed, restarts) pair.  Returns 0 when g == 0.
struct EmbeddingEstimate {
    double value = 0.0;
    bool converged = false;
    int best_restart = -1;
};
EmbeddingEstimate estimate_embedding_constant(const GridPtr& grid, const ModelParams& mp,
                                              int restarts, std::uint64_t seed);

// Best constant of ||V^{1/2} u||_2 <= C ||grad u||_2: square root of the top
// eigenvalue of the pencil (V u, u) / (grad u, grad u), by power iteration on
// the preconditioned operator.  Returns 0 when V == 0.
double estimate_hardy_constant(const GridPtr& grid, const ModelParams& mp);

// Potential-well depth d = ((p-2)/(2p)) * C^(-2p/(p-2)) * (1 - gamma C*^2)^(p/(p-2)).
// Returns +infinity when the embedding constant is 0 (source switched off).
// Throws std::domain_error when gamma * C*^2 >= 1.
double well_depth(double embedding_const, double hardy_const, double gamma, double p);

// theta = 1 - gamma C*^2 - C^p (2 p E0 / ((p-2)(1 - gamma C*^2)))^((p-2)/2),
// the uniform Nehari margin available below the well depth.  Requires
// 0 <= E0 < d; throws std::domain_error otherwise.
double theta_coefficient(double E0, double embedding_const, double hardy_const,
                         double gamma, double p, double d);

// Interpolation exponent theta(s1, s2, n) = (1/s1 - 1/s2) / (1/s1 - (n-2)/(2n))
// for the Gagliardo-Nirenberg-type bound between the s1 and s2 cone norms.
// Requires 1 <= s1 < s2 <= 2n/(n-2).
double gagliardo_nirenberg_theta(double s1, double s2, int n);

enum class WellLabel { InsideW, InsideV, OnNehari, AboveD, Zero };
const char* well_label_name(WellLabel label);

// Equivalence constants of Remark-type bounds c1 ||grad u||^2 <= a(u) <= c2 ||grad u||^2.
struct CoercivityPair {
    double c1 = 1.0;
    double c2 = 1.0;
};
CoercivityPair coercivity_constants(double gamma, double hardy_const);

struct WellConstants {
    double lambda1 = 0.0;        // ground eigenvalue of -Laplacian
    double embedding_const = 0.0; // C in ||g^{1/p} u||_p <= C ||grad u||
    double hardy_const = 0.0;     // C* in ||V^{1/2} u||_2 <= C* ||grad u||
    double c1 = 1.0;
    double c2 = 1.0;
    double d = 0.0;              // potential-well depth
};

// Assembles the full constant set for one (grid, model) pair.  `restarts`
// controls the embedding-constant multistart budget; `seed` its PRNG stream.
WellConstants compute_well_constants(const GridPtr& grid, const ModelParams& mp,
                                     int restarts, std::uint64_t seed);

// Classifies u relative to the potential well:
//   Zero      ||grad u|| = 0
//   OnNehari  |I(u)| <= 1e-8 (|a| + |b|)
//   InsideW   I(u) > 0 and J(u) < d
//   InsideV   I(u) < 0 and J(u) < d
//   AboveD    otherwise
WellLabel classify_state(const Field& u, const ModelParams& mp, const WellConstants& wc);

// Same decision applied to an already-computed split (zero_field marks u == 0).
WellLabel classify_from_split(const ABSplit& split, bool zero_field, double p, double d);

} // namespace conewave
