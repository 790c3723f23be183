// C ABI over the conewave core.  Exceptions are caught at this boundary and
// mapped to status codes plus a diagnostic in the caller's error buffer.

#include "conewave.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/harness.hpp"
#include "core/integrator.hpp"
#include "core/operators.hpp"

using namespace conewave;

struct cw_config {
    RunConfig cfg;
};

struct cw_report {
    std::string classification;
    int exit_code = 0;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    std::string series_path, summary_path, table_path, summary_text;
};

struct cw_grid {
    GridPtr grid;
};

namespace {

void put_error(char* errbuf, size_t len, const std::string& msg) {
    if (!errbuf || len == 0) return;
    const size_t n = std::min(msg.size(), len - 1);
    std::memcpy(errbuf, msg.c_str(), n);
    errbuf[n] = '\0';
}

cw_status from_exception(char* errbuf, size_t len) {
    try {
        throw;
    } catch (const std::invalid_argument& e) {
        put_error(errbuf, len, e.what());
        return CW_ERR_INVALID;
    } catch (const std::domain_error& e) {
        put_error(errbuf, len, e.what());
        return CW_ERR_INVALID;
    } catch (const std::bad_alloc&) {
        put_error(errbuf, len, "out of memory");
        return CW_ERR_RUNTIME;
    } catch (const std::exception& e) {
        put_error(errbuf, len, e.what());
        return CW_ERR_RUNTIME;
    } catch (...) {
        put_error(errbuf, len, "unknown failure");
        return CW_ERR_RUNTIME;
    }
}

cw_status finish_parse(ParseResult&& parsed, cw_config** out, char* errbuf, size_t errbuf_len) {
    if (!parsed.config) {
        put_error(errbuf, errbuf_len, format_config_errors(parsed.errors));
        return CW_ERR_CONFIG;
    }
    *out = new cw_config{std::move(*parsed.config)};
    return CW_OK;
}

} // namespace

extern "C" {

const char* cw_version(void) { return "1.0.0"; }

cw_status cw_config_parse_text(const char* text, cw_config** out,
                               char* errbuf, size_t errbuf_len) {
    if (!text || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    *out = nullptr;
    try {
        return finish_parse(parse_config(text), out, errbuf, errbuf_len);
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

cw_status cw_config_parse_file(const char* path, cw_config** out,
                               char* errbuf, size_t errbuf_len) {
    if (!path || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    *out = nullptr;
    try {
        return finish_parse(parse_config_file(path), out, errbuf, errbuf_len);
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

void cw_config_free(cw_config* cfg) { delete cfg; }

cw_status cw_config_set_out_dir(cw_config* cfg, const char* dir) {
    if (!cfg || !dir || dir[0] == '\0') return CW_ERR_INVALID;
    cfg->cfg.out_dir = dir;
    return CW_OK;
}

cw_status cw_config_set_seed(cw_config* cfg, uint64_t seed) {
    if (!cfg) return CW_ERR_INVALID;
    cfg->cfg.seed = seed;
    return CW_OK;
}

cw_status cw_run(const cw_config* cfg, cw_report** out, char* errbuf, size_t errbuf_len) {
    if (!cfg || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    *out = nullptr;
    try {
        RunArtifacts art = run_and_write(cfg->cfg);
        auto* report = new cw_report;
        report->classification = art.classification;
        report->exit_code = art.exit_code;
        if (art.sim.outcome == RunOutcome::Blowup) report->blowup_time = art.sim.blowup_time;
        report->series_path = art.series_path;
        report->summary_path = art.summary_path;
        report->summary_text = art.summary_text;
        *out = report;
        return CW_OK;
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

cw_status cw_sweep(const cw_config* cfg, cw_report** out, char* errbuf, size_t errbuf_len) {
    if (!cfg || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    *out = nullptr;
    try {
        SweepArtifacts art = run_sweep(cfg->cfg, true);
        auto* report = new cw_report;
        report->table_path = art.table_path;
        report->summary_text = art.table_text;
        *out = report;
        return CW_OK;
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

void cw_report_free(cw_report* report) { delete report; }

int cw_report_exit_code(const cw_report* report) { return report ? report->exit_code : 1; }

const char* cw_report_classification(const cw_report* report) {
    return report ? report->classification.c_str() : "";
}

double cw_report_blowup_time(const cw_report* report) {
    return report ? report->blowup_time : std::numeric_limits<double>::quiet_NaN();
}

const char* cw_report_series_path(const cw_report* report) {
    return report ? report->series_path.c_str() : "";
}

const char* cw_report_summary_path(const cw_report* report) {
    return report ? report->summary_path.c_str() : "";
}

const char* cw_report_table_path(const cw_report* report) {
    return report ? report->table_path.c_str() : "";
}

const char* cw_report_summary_text(const cw_report* report) {
    return report ? report->summary_text.c_str() : "";
}

cw_status cw_constants_text(const cw_config* cfg, char* buf, size_t buf_len,
                            char* errbuf, size_t errbuf_len) {
    if (!cfg || !buf || buf_len == 0) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    try {
        const std::string text = constants_text(cfg->cfg);
        if (text.size() + 1 > buf_len) {
            put_error(errbuf, errbuf_len, "constants buffer too small; need " +
                                              std::to_string(text.size() + 1) + " bytes");
            return CW_ERR_INVALID;
        }
        std::memcpy(buf, text.c_str(), text.size() + 1);
        return CW_OK;
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

cw_status cw_grid_create(int n, int Ns, int Nx, double s_min, double torus_length,
                         cw_grid** out, char* errbuf, size_t errbuf_len) {
    if (!out) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    *out = nullptr;
    try {
        GridSpec spec;
        spec.n = n;
        spec.Ns = Ns;
        spec.Nx = Nx;
        spec.s_min = s_min;
        spec.torus_length = torus_length;
        *out = new cw_grid{build_grid(spec)};
        return CW_OK;
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

void cw_grid_free(cw_grid* grid) { delete grid; }

int64_t cw_grid_interior_count(const cw_grid* grid) {
    return grid ? static_cast<int64_t>(grid->grid->interior_count) : -1;
}

double cw_grid_total_measure(const cw_grid* grid) {
    return grid ? grid->grid->total_measure() : std::numeric_limits<double>::quiet_NaN();
}

double cw_grid_cfl_limit(const cw_grid* grid) {
    return grid ? cfl_limit(*grid->grid) : std::numeric_limits<double>::quiet_NaN();
}

cw_status cw_grid_lambda1(const cw_grid* grid, double* lambda1,
                          char* errbuf, size_t errbuf_len) {
    if (!grid || !lambda1) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    try {
        *lambda1 = smallest_eigenpair(grid->grid).lambda1;
        return CW_OK;
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

cw_status cw_damping_solve(double v_pred, double dt, double m, double* v_out,
                           char* errbuf, size_t errbuf_len) {
    if (!v_out) {
        put_error(errbuf, errbuf_len, "null argument");
        return CW_ERR_INVALID;
    }
    try {
        *v_out = damping_solve(v_pred, dt, m);
        return CW_OK;
    } catch (...) {
        return from_exception(errbuf, errbuf_len);
    }
}

} // extern "C"
