#include "grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace conewave {

namespace {

std::size_t ipow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace

ConeGrid::ConeGrid(const GridSpec& s) : spec(s) {
    if (spec.n < 3)
        throw std::invalid_argument("grid: dimension n must be >= 3, got " + std::to_string(spec.n));
    if (spec.Ns < 4)
        throw std::invalid_argument("grid: radial resolution Ns must be >= 4, got " + std::to_string(spec.Ns));
    if (spec.Nx < 1)
        throw std::invalid_argument("grid: cross resolution Nx must be >= 1, got " + std::to_string(spec.Nx));
    if (!(spec.s_min < 0.0))
        throw std::invalid_argument("grid: s_min must be negative (log-radial truncation)");
    if (!(spec.torus_length > 0.0))
        throw std::invalid_argument("grid: torus_length must be positive");

    const int n = spec.n;
    const int Ns = spec.Ns;
    const int Nx = spec.Nx;
    const int cdims = n - 1;

    hs = -spec.s_min / static_cast<double>(Ns);
    hx = spec.torus_length / static_cast<double>(Nx);
    weight = hs;
    for (int d = 0; d < cdims; ++d) weight *= hx;

    cross_count = ipow(static_cast<std::size_t>(Nx), cdims);
    interior_count = static_cast<std::size_t>(Ns - 1) * cross_count;

    s_plus.assign(interior_count, -1);
    s_minus.assign(interior_count, -1);
    x_plus.assign(cdims, std::vector<std::int64_t>(interior_count, -1));
    x_minus.assign(cdims, std::vector<std::int64_t>(interior_count, -1));
    x1.assign(interior_count, 0.0);
    xprime_norm.assign(interior_count, 0.0);

    // Node layout: i = (j-1)*cross_count + c where j = 1..Ns-1 is the radial
    // index and c enumerates the cross-section lattice in mixed radix base Nx
    // (dimension 0 is the fastest digit).
    std::vector<int> digit(cdims, 0);
    for (std::size_t i = 0; i < interior_count; ++i) {
        const std::size_t c = i % cross_count;
        const int j = static_cast<int>(i / cross_count) + 1;

        std::size_t rem = c;
        for (int d = 0; d < cdims; ++d) {
            digit[d] = static_cast<int>(rem % Nx);
            rem /= Nx;
        }

        if (j + 1 <= Ns - 1) s_plus[i] = static_cast<std::int64_t>(i + cross_count);
        if (j - 1 >= 1) s_minus[i] = static_cast<std::int64_t>(i - cross_count);

        std::size_t stride = 1;
        for (int d = 0; d < cdims; ++d) {
            const int k = digit[d];
            const int kp = (k + 1) % Nx;
            const int km = (k + Nx - 1) % Nx;
            x_plus[d][i] = static_cast<std::int64_t>(i + static_cast<std::size_t>(kp - k) * stride);
            x_minus[d][i] = static_cast<std::int64_t>(i + static_cast<std::size_t>(km - k) * stride);
            stride *= Nx;
        }

        const double s = spec.s_min + j * hs;
        x1[i] = std::exp(s);
        double r2 = 0.0;
        for (int d = 0; d < cdims; ++d) {
            const double xd = digit[d] * hx;
            const double folded = std::min(xd, spec.torus_length - xd);
            r2 += folded * folded;
        }
        xprime_norm[i] = std::sqrt(r2);
    }
}

double ConeGrid::s_of(std::size_t node) const {
    return spec.s_min + radial_index(node) * hs;
}

int ConeGrid::radial_index(std::size_t node) const {
    return static_cast<int>(node / cross_count) + 1;
}

double ConeGrid::total_measure() const {
    double m = -spec.s_min;
    for (int d = 0; d < spec.n - 1; ++d) m *= spec.torus_length;
    return m;
}

GridPtr build_grid(const GridSpec& spec) {
    return std::make_shared<const ConeGrid>(spec);
}

Field make_field(const GridPtr& grid) {
    return Field(grid);
}

static void require_same_grid(const Field& f, const Field& g) {
    if (!f.grid || !g.grid || f.grid != g.grid)
        throw std::invalid_argument("field operation: arguments live on different grids");
}

double weighted_inner(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double acc = 0.0;
    const std::size_t N = f.size();
    for (std::size_t i = 0; i < N; ++i) acc += f.v[i] * g.v[i];
    return f.grid->weight * acc;
}

double cone_norm(const Field& f, double p) {
    if (!f.grid) throw std::invalid_argument("cone_norm: field has no grid");
    if (!(p >= 1.0)) throw std::invalid_argument("cone_norm: exponent p must be >= 1");
    const std::size_t N = f.size();
    double acc = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < N; ++i) acc += f.v[i] * f.v[i];
    } else if (p == 1.0) {
        for (std::size_t i = 0; i < N; ++i) acc += std::fabs(f.v[i]);
    } else {
        for (std::size_t i = 0; i < N; ++i) acc += std::pow(std::fabs(f.v[i]), p);
    }
    return std::pow(f.grid->weight * acc, 1.0 / p);
}

void field_scale(Field& f, double c) {
    for (double& x : f.v) x *= c;
}

void field_axpy(Field& y, double a, const Field& x) {
    require_same_grid(y, x);
    const std::size_t N = y.size();
    for (std::size_t i = 0; i < N; ++i) y.v[i] += a * x.v[i];
}

} // namespace conewave
