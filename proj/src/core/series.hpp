#pragma once

// Time-series record emitted by the integrator and consumed by the
// diagnostics, the monitors, and the CSV writer.

#include <vector>

#include "variational.hpp"

namespace conewave {

struct SeriesRow {
    double t = 0.0;
    double E = 0.0;                // total energy
    double J = 0.0;                // static energy
    double I = 0.0;                // Nehari functional
    double L2 = 0.0;               // cone L2 norm of u
    double Lp_g = 0.0;             // g-weighted cone Lp norm of u
    double damping_integral = 0.0; // accumulated dissipation integral
    WellLabel label = WellLabel::Zero;
};

struct EnergySeries {
    std::vector<SeriesRow> rows;
};

} // namespace conewave
