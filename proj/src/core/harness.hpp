#pragma once

// Orchestration of a full laboratory run: materialize the model from a
// configuration, assemble the discrete constants, build the initial data,
// integrate, post-process, and serialize the results.  Everything here is
// deterministic for a fixed (config, seed) pair; files written twice are
// byte-identical.

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "diagnostics.hpp"
#include "integrator.hpp"
#include "operators.hpp"
#include "series.hpp"
#include "variational.hpp"

namespace conewave {

struct ConstantsBundle {
    WellConstants wc;
    EigenPair eig;
};

// Grid-level quantities a sweep can reuse across its children: the ground
// eigenpair and potential constant never depend on the swept value, and the
// embedding constant only changes when the source exponent does.
struct SharedPieces {
    GridPtr grid;
    EigenPair eig;
    double hardy_const = 0.0;
    std::optional<double> embedding_const;
};

// Fields for the potential and source weight at the configured nodes; the
// model's alpha/beta are the actual nodal extrema of g.
ModelParams materialize_model(const GridPtr& grid, const RunConfig& cfg);

ConstantsBundle compute_constants_bundle(const GridPtr& grid, const ModelParams& mp,
                                         int restarts, std::uint64_t seed);

struct InitData {
    Field u0, u1;
    std::optional<HighEnergyThreshold> threshold; // set for the two-mode construction
    std::optional<HighEnergyCheck> check;
    double r1 = 0.0, r2 = 0.0;
};

// init.kind dispatch:
//   eigenmode      u0 = amplitude * omega1, u1 = 0
//   gaussian-bump  deterministic bump centered mid-collar, u1 = 0
//   nehari-scaled  u0 = lambda*(omega1) omega1 (exactly on the Nehari set),
//                  u1 = amplitude * omega1
//   corollary51    two-mode data with E(0) = R passing the high-energy check
InitData build_init(const GridPtr& grid, const ModelParams& mp, const ConstantsBundle& cb,
                    const RunConfig& cfg);

struct RunArtifacts {
    std::string classification; // global | global-decay | blow-up
    int exit_code = 0;          // 0 completed, 2 blow-up (1 is reserved for errors)
    SimResult sim;
    WellConstants constants;
    double E0 = 0.0;
    std::optional<double> theta;  // Nehari margin when 0 <= E0 < d
    std::optional<double> d1;     // midpoint energy level (E0 + d)/2 in the same regime
    std::optional<DecayReport> decay;
    MonitorReport monitor;
    WellSideSummary well_side;
    InitData init;
    SchemeParams scheme;          // resolved (auto dt / auto cap applied)
    std::optional<ConcavityBound> concavity; // evaluated for corollary51 data
    std::string summary_text;
    std::string series_text;
    std::string series_path;      // set when files were written
    std::string summary_path;
};

// Runs one configuration in memory.  `shared` may carry precomputed pieces
// for the same grid spec; pass nullptr to compute everything locally.
RunArtifacts run_config(const RunConfig& cfg, const SharedPieces* shared = nullptr);

// run_config plus series.csv / summary.txt under cfg.out_dir.
RunArtifacts run_and_write(const RunConfig& cfg);

struct SweepRow {
    double value = 0.0;
    double E0 = 0.0;
    double E0_over_d = 0.0;
    std::string classification;
    std::optional<double> time_or_rate;     // blow-up time or fitted decay rate
    std::optional<double> first_entry_V;
    std::string consistency;                // yes | no | unresolved
};

struct SweepArtifacts {
    std::vector<SweepRow> rows;
    std::string table_text;
    std::string table_path;
};

// Runs every sweep value (sweep.axis applied to a copy of the base config),
// in parallel when sweep.workers > 1, and emits the phase table.  Rows keep
// the order of sweep.values, so the output is independent of scheduling.
// The consistency column compares "blow-up happened" with "trajectory entered
// {E < d, InsideV}"; runs that hug the Nehari boundary (min |I|/(|a|+|b|)
// below 1e-3) are marked unresolved instead.
SweepArtifacts run_sweep(const RunConfig& cfg, bool write_files);

// WellConstants (plus the grid echo) as key = value text.
std::string constants_text(const RunConfig& cfg);

// %.17g formatting used for every float that reaches a file.
std::string format_g17(double x);

} // namespace conewave
