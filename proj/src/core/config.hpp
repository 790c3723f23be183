#pragma once

// Flat key = value configuration format.  '#' starts a comment, keys are
// dotted paths, and every violation is reported (with its key and line
// number) rather than stopping at the first one.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace conewave {

struct ConfigError {
    std::string key;
    int line = 0; // 1-based; 0 when the key is missing entirely
    std::string message;
};

struct RunConfig {
    GridSpec grid;

    double p = 0.0;
    double m = 0.0;
    double gamma = 0.0;
    std::string potential = "none";     // none | v1 | v2
    std::string g_kind = "constant";    // constant | radial
    double g_beta = 1.0;
    double g_alpha = 0.5;               // radial profile floor (defaults to beta/2)

    double dt = 0.0;                    // 0: use cfl_safety * cfl_limit
    double cfl_safety = 0.5;
    double blowup_cap = 0.0;            // 0: 1e6 * max(1, ||u0||_2)
    double newton_tol = 1e-14;
    double t_max = 0.0;

    std::string init_kind;              // eigenmode | gaussian-bump | nehari-scaled | corollary51
    double amplitude = 1.0;
    std::uint64_t seed = 0;
    double R = 0.0;                     // target initial energy for corollary51

    std::string out_dir = "out";
    int record_every = 1;
    int restarts = 200;                 // embedding-constant multistart budget

    bool has_sweep = false;
    std::string sweep_axis;             // amplitude | gamma | p | m
    std::vector<double> sweep_values;
    int sweep_workers = 1;
};

struct ParseResult {
    std::optional<RunConfig> config;    // set only when errors is empty
    std::vector<ConfigError> errors;
};

ParseResult parse_config(const std::string& text);
ParseResult parse_config_file(const std::string& path);

std::string format_config_errors(const std::vector<ConfigError>& errors);

} // namespace conewave
