// Command-line front end.  Links only against the public C API.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "conewave.h"

namespace {

constexpr size_t kErrLen = 16384;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool have_out = false;
    bool have_seed = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "configuration file (key = value lines)")
        ->required();
    cmd->add_option("-o,--out", args.out_dir, "override output.dir from the configuration")
        ->each([&args](const std::string&) { args.have_out = true; });
    cmd->add_option("-s,--seed", args.seed, "override init.seed from the configuration")
        ->each([&args](const std::string&) { args.have_seed = true; });
}

cw_config* load_config(const CommonArgs& args) {
    char err[kErrLen];
    cw_config* cfg = nullptr;
    const cw_status rc = cw_config_parse_file(args.config_path.c_str(), &cfg, err, sizeof err);
    if (rc != CW_OK) {
        std::fprintf(stderr, "%s\n", err);
        return nullptr;
    }
    if (args.have_out && cw_config_set_out_dir(cfg, args.out_dir.c_str()) != CW_OK) {
        std::fprintf(stderr, "invalid --out value\n");
        cw_config_free(cfg);
        return nullptr;
    }
    if (args.have_seed) cw_config_set_seed(cfg, args.seed);
    return cfg;
}

int do_run(const CommonArgs& args) {
    cw_config* cfg = load_config(args);
    if (!cfg) return 1;
    char err[kErrLen];
    cw_report* report = nullptr;
    const cw_status rc = cw_run(cfg, &report, err, sizeof err);
    cw_config_free(cfg);
    if (rc != CW_OK) {
        std::fprintf(stderr, "%s\n", err);
        return 1;
    }
    std::printf("classification = %s\n", cw_report_classification(report));
    const double tb = cw_report_blowup_time(report);
    if (!std::isnan(tb)) std::printf("blowup.time = %.17g\n", tb);
    std::printf("series = %s\n", cw_report_series_path(report));
    std::printf("summary = %s\n", cw_report_summary_path(report));
    const int code = cw_report_exit_code(report);
    cw_report_free(report);
    return code;
}

int do_sweep(const CommonArgs& args) {
    cw_config* cfg = load_config(args);
    if (!cfg) return 1;
    char err[kErrLen];
    cw_report* report = nullptr;
    const cw_status rc = cw_sweep(cfg, &report, err, sizeof err);
    cw_config_free(cfg);
    if (rc != CW_OK) {
        std::fprintf(stderr, "%s\n", err);
        return 1;
    }
    std::printf("table = %s\n", cw_report_table_path(report));
    cw_report_free(report);
    return 0;
}

int do_constants(const CommonArgs& args) {
    cw_config* cfg = load_config(args);
    if (!cfg) return 1;
    char err[kErrLen];
    char text[kErrLen];
    const cw_status rc = cw_constants_text(cfg, text, sizeof text, err, sizeof err);
    cw_config_free(cfg);
    if (rc != CW_OK) {
        std::fprintf(stderr, "%s\n", err);
        return 1;
    }
    std::fputs(text, stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conewave: numerical laboratory for a damped nonlinear wave "
                 "equation on a cone collar"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, constants_args;
    CLI::App* run_cmd = app.add_subcommand(
        "run", "integrate one configuration and write series.csv / summary.txt");
    add_common(run_cmd, run_args);
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "run a parameter sweep and write phase_table.csv");
    add_common(sweep_cmd, sweep_args);
    CLI::App* constants_cmd = app.add_subcommand(
        "constants", "print the discrete constants (eigenvalue, embedding, well depth)");
    add_common(constants_cmd, constants_args);

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return do_run(run_args);
    if (sweep_cmd->parsed()) return do_sweep(sweep_args);
    if (constants_cmd->parsed()) return do_constants(constants_args);
    return 1;
}
