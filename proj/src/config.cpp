#include "carlab/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace carlab {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError((path.empty() ? "<root>" : path) + ": expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(join(path, it.key()) + ": unknown key");
}

template <class T>
void read(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    const std::string where = join(path, key);
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(where + ": expected a number");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(where + ": expected a nonnegative integer");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where + ": expected a string");
        }
        out = v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": type mismatch (" + e.what() + ")");
    }
}

template <class T>
void read_list(const json& j, const std::string& path, const char* key, std::vector<T>& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    const std::string where = join(path, key);
    if (!v.is_array()) throw ConfigError(where + ": expected a list");
    std::vector<T> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, double>) {
            if (!v[i].is_number()) throw ConfigError(w + ": expected a number");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v[i].is_number_integer()) throw ConfigError(w + ": expected an integer");
        } else {
            if (!v[i].is_string()) throw ConfigError(w + ": expected a string");
        }
        r.push_back(v[i].get<T>());
    }
    out = std::move(r);
}

Vec2 read_vec2(const json& j, const std::string& path, const char* key, Vec2 fallback) {
    std::vector<double> v;
    read_list(j, path, key, v);
    if (v.empty()) return fallback;
    if (v.size() > 2) throw ConfigError(join(path, key) + ": at most two components");
    Vec2 r = Vec2::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Index>(i)] = v[i];
    return r;
}

// number or [re, im]
Complex read_complex(const json& v, const std::string& where) {
    if (v.is_number()) return Complex(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return Complex(v[0].get<double>(), v[1].get<double>());
    throw ConfigError(where + ": expected a number or [re, im]");
}

std::array<double, 2> read_pair(const json& j, const std::string& path, const char* key, std::array<double, 2> fb) {
    std::vector<double> v;
    read_list(j, path, key, v);
    if (v.empty()) return fb;
    if (v.size() > 2) throw ConfigError(join(path, key) + ": at most two components");
    std::array<double, 2> r{fb[0], fb[1]};
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i];
    return r;
}

void parse_coefficients(const json& j, ExperimentConfig& c) {
    const std::string p = "coefficients";
    allow_keys(j, p, {"preset", "diag", "offdiag", "linear", "quadratic", "time", "cross", "b", "c0", "c_sine", "R"});
    read(j, p, "preset", c.preset);
    CoefficientSpec s;
    if (c.preset == "variable")
        s.quadratic = 0.5;
    else if (c.preset != "identity")
        throw ConfigError("coefficients.preset: unknown preset '" + c.preset + "'");
    s.diag = read_pair(j, p, "diag", s.diag);
    s.offdiag = read_pair(j, p, "offdiag", s.offdiag);
    read(j, p, "linear", s.linear);
    read(j, p, "quadratic", s.quadratic);
    read(j, p, "time", s.time);
    read(j, p, "cross", s.cross);
    read(j, p, "c_sine", s.c_sine);
    read(j, p, "R", s.R);
    if (j.contains("c0")) s.c0 = read_complex(j.at("c0"), "coefficients.c0");
    if (j.contains("b")) {
        const json& b = j.at("b");
        if (!b.is_array() || b.size() > 2) throw ConfigError("coefficients.b: expected a list of at most two entries");
        for (std::size_t i = 0; i < b.size(); ++i)
            s.b[i] = read_complex(b[i], "coefficients.b[" + std::to_string(i) + "]");
    }
    c.coefficients = s;
}

void parse_weight(const json& j, ExperimentConfig& c) {
    const std::string p = "weight";
    allow_keys(j, p, {"psi", "lambda", "lambda_grid", "tau"});
    if (j.contains("psi")) {
        const json& q = j.at("psi");
        allow_keys(q, "weight.psi", {"kind", "center", "scale", "direction", "offset"});
        read(q, "weight.psi", "kind", c.psi.kind);
        if (c.psi.kind != "quadratic" && c.psi.kind != "linear")
            throw ConfigError("weight.psi.kind: expected 'quadratic' or 'linear'");
        c.psi.center = read_vec2(q, "weight.psi", "center", c.psi.center);
        read(q, "weight.psi", "scale", c.psi.scale);
        c.psi.direction = read_vec2(q, "weight.psi", "direction", c.psi.direction);
        read(q, "weight.psi", "offset", c.psi.offset);
    }
    read(j, p, "lambda", c.lambda);
    read_list(j, p, "lambda_grid", c.lambda_grid);
    if (j.contains("tau")) {
        const json& t = j.at("tau");
        if (t.is_array()) {
            read_list(j, p, "tau", c.tau.values);
        } else {
            allow_keys(t, "weight.tau", {"min", "ratio", "count"});
            read(t, "weight.tau", "min", c.tau.min);
            read(t, "weight.tau", "ratio", c.tau.ratio);
            read(t, "weight.tau", "count", c.tau.count);
        }
    }
}

void parse_options(const json& j, ExperimentConfig& c) {
    const std::string p = "options";
    allow_keys(j, p, {"resolutions", "reg", "max_iters", "tol", "first_time", "amplitude", "floor_fraction",
                      "trials", "space_samples", "time_samples", "directions", "angles", "garding_taus", "source"});
    read_list(j, p, "resolutions", c.resolutions);
    read(j, p, "reg", c.reg);
    read(j, p, "max_iters", c.max_iters);
    read(j, p, "tol", c.tol);
    read(j, p, "first_time", c.first_time);
    read(j, p, "amplitude", c.amplitude);
    read(j, p, "floor_fraction", c.floor_fraction);
    read(j, p, "trials", c.trials);
    read(j, p, "space_samples", c.space_samples);
    read(j, p, "time_samples", c.time_samples);
    read(j, p, "directions", c.directions);
    read(j, p, "angles", c.angles);
    read_list(j, p, "garding_taus", c.garding_taus);
    read(j, p, "source", c.source);
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void validate(const ExperimentConfig& c) {
    try {
        (void)c.domain();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
    require(c.n_x >= 8, "grid.n_x: must be at least 8");
    require(c.n_t >= 8, "grid.n_t: must be at least 8");
    require(c.T > 0.0 && std::isfinite(c.T), "grid.T: must be positive");
    require(c.lambda > 0.0, "weight.lambda: must be positive");
    for (std::size_t i = 1; i < c.lambda_grid.size(); ++i)
        require(c.lambda_grid[i] > c.lambda_grid[i - 1], "weight.lambda_grid: must be increasing");
    for (double l : c.lambda_grid) require(l > 0.0, "weight.lambda_grid: entries must be positive");
    require(c.tau.min > 0.0, "weight.tau.min: must be positive");
    require(c.tau.ratio > 1.0, "weight.tau.ratio: must exceed 1");
    require(c.tau.count >= 1, "weight.tau.count: must be positive");
    for (std::size_t i = 0; i < c.tau.values.size(); ++i) {
        require(c.tau.values[i] > 0.0, "weight.tau: entries must be positive");
        if (i) require(c.tau.values[i] > c.tau.values[i - 1], "weight.tau: must be increasing");
    }
    require(c.count >= 1, "ensemble.count: must be positive");
    require(c.band >= 1, "ensemble.band: must be positive");
    for (double s : c.noise_levels) require(s > 0.0, "ensemble.noise_levels: entries must be positive");
    for (int n : c.resolutions) require(n >= 8, "options.resolutions: entries must be at least 8");
    require(c.reg >= 0.0, "options.reg: must be nonnegative");
    require(c.max_iters >= 1, "options.max_iters: must be positive");
    require(c.tol > 0.0, "options.tol: must be positive");
    require(c.first_time > 0.0 && c.first_time < 1.0, "options.first_time: must lie in (0, 1)");
    require(c.floor_fraction >= 0.0, "options.floor_fraction: must be nonnegative");
    require(c.trials >= 1, "options.trials: must be positive");
    require(c.space_samples >= 2, "options.space_samples: must be at least 2");
    require(c.time_samples >= 1, "options.time_samples: must be positive");
    require(c.directions >= 1, "options.directions: must be positive");
    require(c.angles >= 2, "options.angles: must be at least 2");
    require(c.source == "sine" || c.source == "random", "options.source: expected 'sine' or 'random'");
    try {
        (void)make_coefficients(c.coefficients, c.domain());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("coefficients: ") + e.what());
    }
    if (c.psi.kind == "quadratic") require(c.psi.scale > 0.0, "weight.psi.scale: must be positive");
}

}  // namespace

std::vector<double> TauGridConfig::resolve() const {
    if (!values.empty()) return values;
    std::vector<double> r;
    for (int i = 0; i < count; ++i) r.push_back(min * std::pow(ratio, i));
    return r;
}

SpatialDomain ExperimentConfig::domain() const {
    const int dim = static_cast<int>(bounds.size());
    if (dim != 1 && dim != 2) throw ConfigError("domain.bounds: expected one or two intervals");
    if (observed.empty()) throw ConfigError("domain.observed: the observed boundary part must not be empty");
    std::vector<Face> faces;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        try {
            faces.push_back(parse_face(observed[i], dim));
        } catch (const std::exception& e) {
            throw ConfigError("domain.observed[" + std::to_string(i) + "]: " + e.what());
        }
    }
    try {
        return SpatialDomain(bounds, faces);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("domain.bounds: ") + e.what());
    }
}

SpaceTimeGrid ExperimentConfig::grid(int nx, int nt) const { return build_grid(domain(), nx, nt, T); }

WeightFunctionPsi ExperimentConfig::weight() const {
    const int dim = static_cast<int>(bounds.size());
    if (psi.kind == "linear") return WeightFunctionPsi::linear(dim, psi.direction, psi.offset);
    return WeightFunctionPsi::quadratic(dim, psi.center, psi.scale);
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("<root>: malformed JSON (") + e.what() + ")");
    }
    allow_keys(j, "", {"experiment", "domain", "grid", "coefficients", "weight", "ensemble", "output", "options"});
    ExperimentConfig c;
    read(j, "", "experiment", c.experiment);
    if (j.contains("domain")) {
        const json& d = j.at("domain");
        allow_keys(d, "domain", {"bounds", "observed"});
        if (d.contains("bounds")) {
            const json& b = d.at("bounds");
            if (!b.is_array()) throw ConfigError("domain.bounds: expected a list of [lo, hi]");
            c.bounds.clear();
            for (std::size_t i = 0; i < b.size(); ++i) {
                const std::string w = "domain.bounds[" + std::to_string(i) + "]";
                if (!b[i].is_array() || b[i].size() != 2 || !b[i][0].is_number() || !b[i][1].is_number())
                    throw ConfigError(w + ": expected [lo, hi]");
                c.bounds.push_back({b[i][0].get<double>(), b[i][1].get<double>()});
            }
        }
        read_list(d, "domain", "observed", c.observed);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        allow_keys(g, "grid", {"n_x", "n_t", "T"});
        read(g, "grid", "n_x", c.n_x);
        read(g, "grid", "n_t", c.n_t);
        read(g, "grid", "T", c.T);
    }
    if (j.contains("coefficients")) parse_coefficients(j.at("coefficients"), c);
    if (j.contains("weight")) parse_weight(j.at("weight"), c);
    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        allow_keys(e, "ensemble", {"count", "seed", "band", "noise_levels"});
        read(e, "ensemble", "count", c.count);
        read(e, "ensemble", "seed", c.seed);
        read(e, "ensemble", "band", c.band);
        read_list(e, "ensemble", "noise_levels", c.noise_levels);
    }
    read(j, "", "output", c.output);
    if (j.contains("options")) parse_options(j.at("options"), c);
    validate(c);
    return c;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace carlab
