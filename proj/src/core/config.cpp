#include "config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "integrator.hpp"

namespace conewave {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct RawEntry {
    std::string value;
    int line = 0;
};

class Extractor {
public:
    Extractor(std::map<std::string, RawEntry>& entries, std::vector<ConfigError>& errors)
        : entries_(entries), errors_(errors) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    // Each getter consumes the key; leftovers are reported as unknown.
    std::optional<std::string> get_string(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        std::string v = it->second.value;
        lines_[key] = it->second.line;
        entries_.erase(it);
        return v;
    }

    std::optional<double> get_double(const std::string& key) {
        auto raw = get_string(key);
        if (!raw) return std::nullopt;
        const char* begin = raw->c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0') {
            fail(key, "expected a number, got '" + *raw + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> get_int(const std::string& key) {
        auto raw = get_string(key);
        if (!raw) return std::nullopt;
        const char* begin = raw->c_str();
        char* end = nullptr;
        const long long v = std::strtoll(begin, &end, 10);
        if (end == begin || *end != '\0') {
            fail(key, "expected an integer, got '" + *raw + "'");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> get_uint64(const std::string& key) {
        auto raw = get_string(key);
        if (!raw) return std::nullopt;
        if (!raw->empty() && (*raw)[0] == '-') {
            fail(key, "expected a nonnegative integer, got '" + *raw + "'");
            return std::nullopt;
        }
        const char* begin = raw->c_str();
        char* end = nullptr;
        const unsigned long long v = std::strtoull(begin, &end, 10);
        if (end == begin || *end != '\0') {
            fail(key, "expected a nonnegative integer, got '" + *raw + "'");
            return std::nullopt;
        }
        return static_cast<std::uint64_t>(v);
    }

    void fail(const std::string& key, const std::string& message) {
        int line = 0;
        auto it = lines_.find(key);
        if (it != lines_.end()) line = it->second;
        else if (auto jt = entries_.find(key); jt != entries_.end()) line = jt->second.line;
        errors_.push_back({key, line, message});
    }

    int consumed_line(const std::string& key) const {
        auto it = lines_.find(key);
        return it == lines_.end() ? 0 : it->second;
    }

private:
    std::map<std::string, RawEntry>& entries_;
    std::vector<ConfigError>& errors_;
    std::map<std::string, int> lines_;
};

bool valid_key_chars(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) ||
                        c == '.' || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

} // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    auto& errors = result.errors;

    std::map<std::string, RawEntry> entries;
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string stripped = trim(line);
            if (stripped.empty()) continue;
            const std::size_t eq = stripped.find('=');
            if (eq == std::string::npos) {
                errors.push_back({stripped, lineno, "expected 'key = value'"});
                continue;
            }
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (!valid_key_chars(key)) {
                errors.push_back({key, lineno, "malformed key"});
                continue;
            }
            if (entries.count(key)) {
                errors.push_back({key, lineno, "duplicate key (first set on line " +
                                  std::to_string(entries[key].line) + ")"});
                continue;
            }
            entries[key] = {value, lineno};
        }
    }

    Extractor ex(entries, errors);
    RunConfig cfg;

    auto require_missing = [&](const char* key) {
        errors.push_back({key, 0, "required key is missing"});
    };

    // --- grid ---
    bool grid_ok = true;
    if (auto v = ex.get_int("grid.n")) {
        cfg.grid.n = static_cast<int>(*v);
        if (cfg.grid.n < 3) { ex.fail("grid.n", "dimension must be >= 3"); grid_ok = false; }
    } else if (!ex.consumed_line("grid.n")) { require_missing("grid.n"); grid_ok = false; }

    if (auto v = ex.get_int("grid.Ns")) {
        cfg.grid.Ns = static_cast<int>(*v);
        if (cfg.grid.Ns < 4) { ex.fail("grid.Ns", "radial resolution must be >= 4"); grid_ok = false; }
    } else if (!ex.consumed_line("grid.Ns")) { require_missing("grid.Ns"); grid_ok = false; }

    if (auto v = ex.get_int("grid.Nx")) {
        cfg.grid.Nx = static_cast<int>(*v);
        if (cfg.grid.Nx < 2) { ex.fail("grid.Nx", "cross resolution must be >= 2 for simulation runs"); grid_ok = false; }
    } else if (!ex.consumed_line("grid.Nx")) { require_missing("grid.Nx"); grid_ok = false; }

    if (auto v = ex.get_double("grid.s_min")) {
        cfg.grid.s_min = *v;
        if (!(cfg.grid.s_min < 0.0)) { ex.fail("grid.s_min", "log-radial truncation must be negative"); grid_ok = false; }
    } else if (!ex.consumed_line("grid.s_min")) { require_missing("grid.s_min"); grid_ok = false; }

    if (auto v = ex.get_double("grid.torus_length")) {
        cfg.grid.torus_length = *v;
        if (!(cfg.grid.torus_length > 0.0)) { ex.fail("grid.torus_length", "period must be positive"); grid_ok = false; }
    }

    // --- model ---
    bool have_p = false;
    if (auto v = ex.get_double("model.p")) {
        cfg.p = *v;
        have_p = true;
    } else if (!ex.consumed_line("model.p")) require_missing("model.p");

    if (have_p && grid_ok) {
        const double sup = (2.0 * cfg.grid.n - 2.0) / (cfg.grid.n - 2.0);
        if (!(cfg.p > 2.0 && cfg.p < sup))
            ex.fail("model.p", "source exponent must satisfy 2 < p < (2n-2)/(n-2) = " +
                                std::to_string(sup));
    }

    if (auto v = ex.get_double("model.m")) {
        cfg.m = *v;
        if (!(cfg.m >= 2.0)) ex.fail("model.m", "damping exponent must be >= 2");
    } else if (!ex.consumed_line("model.m")) require_missing("model.m");

    if (auto v = ex.get_double("model.gamma")) {
        cfg.gamma = *v;
        if (!(cfg.gamma >= 0.0)) ex.fail("model.gamma", "potential coupling must be >= 0");
    }

    if (auto v = ex.get_string("model.potential")) {
        cfg.potential = *v;
        if (cfg.potential != "none" && cfg.potential != "v1" && cfg.potential != "v2")
            ex.fail("model.potential", "expected one of: none, v1, v2");
    }

    if (auto v = ex.get_string("model.g.kind")) {
        cfg.g_kind = *v;
        if (cfg.g_kind != "constant" && cfg.g_kind != "radial")
            ex.fail("model.g.kind", "expected one of: constant, radial");
    }

    bool have_beta = false;
    if (auto v = ex.get_double("model.g.beta")) {
        cfg.g_beta = *v;
        have_beta = true;
        if (!(cfg.g_beta >= 0.0)) ex.fail("model.g.beta", "source ceiling must be >= 0");
    }
    if (!have_beta) cfg.g_beta = 1.0;

    bool have_alpha = false;
    if (auto v = ex.get_double("model.g.alpha")) {
        cfg.g_alpha = *v;
        have_alpha = true;
        if (!(cfg.g_alpha >= 0.0 && cfg.g_alpha <= cfg.g_beta))
            ex.fail("model.g.alpha", "source floor must lie in [0, beta]");
    }
    if (!have_alpha) cfg.g_alpha = 0.5 * cfg.g_beta;

    // --- scheme ---
    if (auto v = ex.get_double("scheme.dt")) {
        cfg.dt = *v;
        if (!(cfg.dt >= 0.0)) ex.fail("scheme.dt", "step must be >= 0 (0 selects the CFL default)");
    }
    if (auto v = ex.get_double("scheme.cfl_safety")) {
        cfg.cfl_safety = *v;
        if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0))
            ex.fail("scheme.cfl_safety", "safety factor must lie in (0, 1]");
    }
    if (auto v = ex.get_double("scheme.blowup_cap")) {
        cfg.blowup_cap = *v;
        if (!(cfg.blowup_cap >= 0.0)) ex.fail("scheme.blowup_cap", "cap must be >= 0 (0 selects the default)");
    }
    if (auto v = ex.get_double("scheme.newton_tol")) {
        cfg.newton_tol = *v;
        if (!(cfg.newton_tol > 0.0)) ex.fail("scheme.newton_tol", "tolerance must be positive");
    }
    if (auto v = ex.get_double("scheme.t_max")) {
        cfg.t_max = *v;
        if (!(cfg.t_max > 0.0)) ex.fail("scheme.t_max", "horizon must be positive");
    } else if (!ex.consumed_line("scheme.t_max")) require_missing("scheme.t_max");

    if (grid_ok && cfg.dt > 0.0 && cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0) {
        const ConeGrid probe{cfg.grid};
        const double limit = cfg.cfl_safety * cfl_limit(probe);
        if (cfg.dt > limit * (1.0 + 1e-12))
            ex.fail("scheme.dt", "step exceeds the CFL bound " + std::to_string(limit) +
                                  " for this grid and safety factor");
    }

    // --- init ---
    if (auto v = ex.get_string("init.kind")) {
        cfg.init_kind = *v;
        if (cfg.init_kind != "eigenmode" && cfg.init_kind != "gaussian-bump" &&
            cfg.init_kind != "nehari-scaled" && cfg.init_kind != "corollary51")
            ex.fail("init.kind", "expected one of: eigenmode, gaussian-bump, nehari-scaled, corollary51");
    } else if (!ex.consumed_line("init.kind")) require_missing("init.kind");

    if (auto v = ex.get_double("init.amplitude")) {
        cfg.amplitude = *v;
        if (!(cfg.amplitude >= 0.0)) ex.fail("init.amplitude", "amplitude must be >= 0");
    }
    if (auto v = ex.get_uint64("init.seed")) cfg.seed = *v;
    bool have_R = false;
    if (auto v = ex.get_double("init.R")) {
        cfg.R = *v;
        have_R = true;
        if (!(cfg.R > 0.0)) ex.fail("init.R", "target energy must be positive");
    }
    if (cfg.init_kind == "corollary51" && !have_R)
        errors.push_back({"init.R", 0, "required for init.kind = corollary51"});

    // --- output / constants ---
    if (auto v = ex.get_string("output.dir")) cfg.out_dir = *v;
    if (auto v = ex.get_int("output.record_every")) {
        cfg.record_every = static_cast<int>(*v);
        if (cfg.record_every < 1) ex.fail("output.record_every", "must be >= 1");
    }
    if (auto v = ex.get_int("constants.restarts")) {
        cfg.restarts = static_cast<int>(*v);
        if (cfg.restarts < 1) ex.fail("constants.restarts", "must be >= 1");
    }

    // --- sweep ---
    const bool any_sweep = ex.has("sweep.axis") || ex.has("sweep.values") || ex.has("sweep.workers");
    if (any_sweep) {
        cfg.has_sweep = true;
        if (auto v = ex.get_string("sweep.axis")) {
            cfg.sweep_axis = *v;
            if (cfg.sweep_axis != "amplitude" && cfg.sweep_axis != "gamma" &&
                cfg.sweep_axis != "p" && cfg.sweep_axis != "m")
                ex.fail("sweep.axis", "expected one of: amplitude, gamma, p, m");
        } else errors.push_back({"sweep.axis", 0, "required when sweep keys are present"});

        if (auto v = ex.get_string("sweep.values")) {
            std::stringstream ss(*v);
            std::string tok;
            bool bad = false;
            while (std::getline(ss, tok, ',')) {
                const std::string t = trim(tok);
                const char* begin = t.c_str();
                char* end = nullptr;
                const double x = std::strtod(begin, &end);
                if (t.empty() || end == begin || *end != '\0') { bad = true; break; }
                cfg.sweep_values.push_back(x);
            }
            if (bad || cfg.sweep_values.empty())
                ex.fail("sweep.values", "expected a nonempty comma-separated list of numbers");
            else {
                for (std::size_t i = 1; i < cfg.sweep_values.size(); ++i)
                    if (!(cfg.sweep_values[i] > cfg.sweep_values[i - 1])) {
                        ex.fail("sweep.values", "values must be strictly increasing");
                        break;
                    }
            }
        } else errors.push_back({"sweep.values", 0, "required when sweep keys are present"});

        if (auto v = ex.get_int("sweep.workers")) {
            cfg.sweep_workers = static_cast<int>(*v);
            if (cfg.sweep_workers < 1) ex.fail("sweep.workers", "must be >= 1");
        }
    }

    // Anything left over is unknown.
    for (const auto& [key, entry] : entries)
        errors.push_back({key, entry.line, "unknown key"});

    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

ParseResult parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.errors.push_back({path, 0, "cannot open configuration file"});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config_errors(const std::vector<ConfigError>& errors) {
    std::ostringstream out;
    for (const ConfigError& e : errors) {
        out << "config error: " << e.key;
        if (e.line > 0) out << " (line " << e.line << ")";
        out << ": " << e.message << "\n";
    }
    return out.str();
}

} // namespace conewave
