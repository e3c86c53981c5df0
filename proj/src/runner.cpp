#include "carlab/runner.hpp"

#include "carlab/carleman.hpp"
#include "carlab/differences.hpp"
#include "carlab/inversion.hpp"
#include "carlab/symbols.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace carlab {

using nlohmann::json;

namespace {

const Complex I_unit(0.0, 1.0);

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string yes(bool b) { return b ? "1" : "0"; }

CoefficientSet coefficients_on(const ExperimentConfig& c, const SpaceTimeGrid& grid) {
    return sample_coefficients(make_coefficients(c.coefficients, grid.domain()), grid);
}

int scaled_nt(const ExperimentConfig& c, int n) {
    return std::max(8, static_cast<int>(std::lround(static_cast<double>(n) * c.n_t / c.n_x)));
}

std::vector<int> resolutions_or(const ExperimentConfig& c, std::vector<int> fallback) {
    return c.resolutions.empty() ? fallback : c.resolutions;
}

// product of sin(pi (x_k - lo_k) / L_k) and its derivatives
struct SineProduct {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0}, k{std::numbers::pi, std::numbers::pi};
    explicit SineProduct(const SpatialDomain& d) : dim(d.dim()) {
        for (int a = 0; a < dim; ++a) {
            lo[a] = d.bounds(a).lo;
            k[a] = std::numbers::pi / (d.bounds(a).hi - d.bounds(a).lo);
        }
    }
    double s(int a, const Vec2& x) const { return std::sin(k[a] * (x[a] - lo[a])); }
    double c(int a, const Vec2& x) const { return std::cos(k[a] * (x[a] - lo[a])); }
    double value(const Vec2& x) const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= s(a, x);
        return v;
    }
    Vec2 grad(const Vec2& x) const {
        Vec2 g = Vec2::Zero();
        for (int p = 0; p < dim; ++p) {
            g[p] = k[p] * c(p, x);
            for (int a = 0; a < dim; ++a)
                if (a != p) g[p] *= s(a, x);
        }
        return g;
    }
    Mat2 hess(const Vec2& x) const {
        Mat2 h = Mat2::Zero();
        for (int p = 0; p < dim; ++p)
            for (int q = 0; q < dim; ++q) {
                if (p == q) {
                    h(p, p) = -k[p] * k[p] * value(x);
                } else {
                    h(p, q) = k[p] * c(p, x) * k[q] * c(q, x);
                }
            }
        return h;
    }
};

AnalyticSolution plane_wave(const SpatialDomain& d) {
    SineProduct sp(d);
    AnalyticSolution u;
    u.value = [sp](double t, const Vec2& x) { return std::exp(I_unit * t) * sp.value(x); };
    u.dt = [sp](double t, const Vec2& x) { return I_unit * std::exp(I_unit * t) * sp.value(x); };
    u.grad = [sp](double t, const Vec2& x) { return Eigen::Vector2cd(std::exp(I_unit * t) * sp.grad(x).cast<Complex>()); };
    u.hess = [sp](double t, const Vec2& x) { return Eigen::Matrix2cd(std::exp(I_unit * t) * sp.hess(x).cast<Complex>()); };
    return u;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& e) {
    for (double v : e)
        if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return loglog_slope(h, e);
}

// ---------------------------------------------------------------- check-weight

RunResult run_check_weight(const ExperimentConfig& c) {
    SpaceTimeGrid grid = c.grid();
    CoefficientSet coeffs = coefficients_on(c, grid);
    WeightFunctionPsi psi = c.weight();
    SampleSpec samples;
    samples.space_per_axis = c.space_samples;
    samples.time_samples = c.time_samples;
    samples.directions = c.directions;
    samples.angles = c.angles;
    const std::vector<double> lgrid = c.lambda_grid.empty() ? default_lambda_grid() : c.lambda_grid;
    PseudoconvexityReport rep = check_pseudoconvexity(coeffs, psi, lgrid, samples, c.garding_taus);

    RunResult r;
    r.pass = rep.verdict && rep.lambda_found;
    json& j = r.report;
    j["subcommand"] = "check-weight";
    j["pass"] = r.pass;
    j["ramsai_min"] = num(rep.ramsai_min);
    j["ramsai_vacuous"] = rep.ramsai_vacuous;
    j["condition1_max"] = num(rep.condition1_max);
    j["condition1_vacuous"] = rep.condition1_vacuous;
    j["lambda_found"] = rep.lambda_found;
    j["lambda"] = rep.lambda_found ? json(rep.lambda) : json(nullptr);
    j["garding_lambda"] = rep.lambda;
    j["garding_constant"] = num(rep.garding_constant);
    j["sample_count"] = rep.sample_count;
    j["verdict"] = rep.verdict ? "pseudoconvex" : "not pseudoconvex";
    r.csv.header = {"lambda", "q_min"};
    for (std::size_t i = 0; i < rep.lambda_search.lambdas.size(); ++i)
        r.csv.rows.push_back({fmt17(rep.lambda_search.lambdas[i]), fmt17(rep.lambda_search.q_min[i])});
    return r;
}

// --------------------------------------------------------- forward-convergence

RunResult run_forward(const ExperimentConfig& c) {
    const std::vector<int> ns = resolutions_or(c, {32, 64, 128, 256});
    const SpatialDomain dom = c.domain();
    auto model = make_coefficients(c.coefficients, dom);
    const AnalyticSolution u = plane_wave(dom);
    const SpaceTimeFunction g = manufactured_source(model, u);
    RunResult r;
    r.csv.header = {"n_x", "n_t", "h", "dt", "max_error"};
    std::vector<double> hs, errs;
    json rows = json::array();
    for (int n : ns) {
        SpaceTimeGrid grid = c.grid(n, scaled_nt(c, n));
        CoefficientSet coeffs(model, grid);
        SpatialField u0 = sample_space(grid, [&](const Vec2& x) { return u.value(0.0, x); });
        ComplexGridFunction uh = solve_ivp(coeffs, g, u0, Direction::forward, u.value);
        double e = 0.0;
        for (int j = 0; j <= grid.n_t(); ++j)
            for (Index k = 0; k < grid.node_count(); ++k)
                e = std::max(e, std::abs(uh(k, j) - u.value(grid.time(j), grid.node(k))));
        hs.push_back(grid.h(0));
        errs.push_back(e);
        r.csv.rows.push_back({std::to_string(n), std::to_string(grid.n_t()), fmt17(grid.h(0)), fmt17(grid.dt()), fmt17(e)});
        rows.push_back({{"n_x", n}, {"n_t", grid.n_t()}, {"max_error", num(e)}});
    }
    const double slope = ns.size() >= 2 ? fit_order(hs, errs) : std::numeric_limits<double>::quiet_NaN();

    CoefficientSpec herm = c.coefficients;
    herm.b = {};
    herm.c0 = herm.c0.real();
    herm.R = "one";
    SpaceTimeGrid grid = c.grid();
    CoefficientSet hs_coeffs(make_coefficients(herm, dom), grid);
    const double drift = norm_drift(hs_coeffs, c.seed);
    const double adj = adjoint_mismatch(coefficients_on(c, grid), c.trials, c.seed);

    const bool slope_ok = slope >= 1.8 && slope <= 2.2;
    r.pass = slope_ok && drift <= 1e-10 && adj <= 1e-10;
    json& j = r.report;
    j["subcommand"] = "forward-convergence";
    j["pass"] = r.pass;
    j["levels"] = rows;
    j["slope"] = num(slope);
    j["slope_ok"] = slope_ok;
    j["norm_drift"] = num(drift);
    j["adjoint_mismatch"] = num(adj);
    j["adjoint_trials"] = c.trials;
    return r;
}

// ------------------------------------------------------------- carleman-verify

// z from the solver with source sum_k t^k (F_k + i G_k), z(0) = 0
std::vector<CarlemanMember> carleman_ensemble(const CoefficientSet& coeffs, int count, int band, std::uint64_t seed) {
    const SpaceTimeGrid& grid = coeffs.grid();
    std::mt19937_64 rng(seed);
    std::vector<CarlemanMember> out;
    for (int m = 0; m < count; ++m) {
        std::array<SpatialField, 3> F;
        for (auto& f : F) {
            RealField re = random_source(grid, band, rng);
            RealField im = random_source(grid, band, rng);
            f = re.cast<Complex>() + I_unit * im.cast<Complex>();
        }
        SourceField src = [F](double t, SpatialField& o) { o = F[0] + t * F[1] + (t * t) * F[2]; };
        ComplexGridFunction z = solve_ivp_field(coeffs, src, SpatialField::Zero(grid.node_count()));
        ComplexGridFunction g(grid);
        for (int j = 0; j <= grid.n_t(); ++j) {
            SpatialField o;
            src(grid.time(j), o);
            g.level(j) = o;
        }
        out.push_back({std::move(z), std::move(g)});
    }
    return out;
}

RunResult run_carleman(const ExperimentConfig& c) {
    const std::vector<int> ns = resolutions_or(c, {c.n_x, 2 * c.n_x});
    const std::vector<double> taus = c.tau.resolve();
    const WeightFunctionPsi psi = c.weight();
    RunResult r;
    r.csv.header = {"n_x", "member", "tau", "lhs_volume", "lhs_p1p2", "rhs_final", "rhs_source",
                    "rhs_boundary", "empirical_C", "log_scale", "equation_residual", "excluded"};
    json levels = json::array();
    bool nonneg = true, stable = true;
    std::vector<double> stabilized;
    for (int n : ns) {
        SpaceTimeGrid grid = c.grid(n, scaled_nt(c, n));
        CoefficientSet coeffs = coefficients_on(c, grid);
        auto ens = carleman_ensemble(coeffs, c.count, c.band, c.seed);
        CarlemanReport rep = carleman_sweep(coeffs, psi, c.lambda, ens, taus);
        const double limit = resolved_tau_limit(psi, c.lambda, grid);
        double worst_res = 0.0;
        for (const auto& row : rep.rows) {
            for (double v : {row.lhs_volume, row.lhs_p1p2, row.rhs_final, row.rhs_source, row.rhs_boundary})
                nonneg = nonneg && v >= 0.0;
            worst_res = std::max(worst_res, row.equation_residual);
            r.csv.rows.push_back({std::to_string(n), std::to_string(row.member), fmt17(row.tau), fmt17(row.lhs_volume),
                                  fmt17(row.lhs_p1p2), fmt17(row.rhs_final), fmt17(row.rhs_source),
                                  fmt17(row.rhs_boundary), fmt17(row.empirical_C), fmt17(row.log_scale),
                                  fmt17(row.equation_residual), yes(row.excluded)});
        }
        const std::size_t half = taus.size() / 2;
        const double var = max_C_variation(rep, half);
        stable = stable && var <= 0.1;
        double top = 0.0;
        for (std::size_t i = half; i < rep.max_C.size(); ++i) top = std::max(top, rep.max_C[i]);
        stabilized.push_back(top);
        json mc = json::array(), resolved = json::array();
        for (std::size_t i = 0; i < taus.size(); ++i) {
            mc.push_back(num(rep.max_C[i]));
            resolved.push_back(taus[i] <= limit);
        }
        levels.push_back({{"n_x", n},
                          {"n_t", grid.n_t()},
                          {"max_C", mc},
                          {"tau_resolved", resolved},
                          {"resolved_tau_limit", num(limit)},
                          {"top_half_variation", num(var)},
                          {"stabilized_C", num(top)},
                          {"tau0_star", rep.tau0_star ? json(*rep.tau0_star) : json(nullptr)},
                          {"excluded_rows", rep.excluded},
                          {"max_equation_residual", num(worst_res)}});
    }
    double drift = 1.0;
    for (double a : stabilized)
        for (double b : stabilized) drift = std::max(drift, a / b);
    r.pass = nonneg && stable && drift <= 2.0;
    json& j = r.report;
    j["subcommand"] = "carleman-verify";
    j["pass"] = r.pass;
    json tj = json::array();
    for (double t : taus) tj.push_back(t);
    j["taus"] = tj;
    j["lambda"] = c.lambda;
    j["members"] = c.count;
    j["levels"] = levels;
    j["all_terms_nonnegative"] = nonneg;
    j["stabilized"] = stable;
    j["resolution_drift"] = num(drift);
    return r;
}

// ------------------------------------------------------------- energy-identity

ComplexGridFunction smooth_test_field(const SpaceTimeGrid& grid) {
    SineProduct sp(grid.domain());
    const int dim = grid.dim();
    return ComplexGridFunction::sample(grid, [sp, dim](double t, const Vec2& x) {
        Complex v = sp.value(x) * (1.0 + t + I_unit * x[0] * t * t);
        if (dim == 2) v *= 1.0 + 0.5 * x[1] * t;
        return v;
    });
}

RunResult run_energy(const ExperimentConfig& c) {
    const std::vector<int> ns = resolutions_or(c, {32, 64, 128});
    const std::vector<double> taus = c.tau.resolve();
    const WeightFunctionPsi psi = c.weight();
    RunResult r;
    r.csv.header = {"n_x", "tau", "lhs", "rhs", "relative_discrepancy", "final_term", "time_groups",
                    "volume_groups", "boundary_group", "cubic_group", "sigma_terms"};
    std::vector<std::vector<double>> disc(taus.size());
    std::vector<double> hs;
    bool sigma_ok = true;
    for (int n : ns) {
        SpaceTimeGrid grid = c.grid(n, scaled_nt(c, n));
        CoefficientSet coeffs = coefficients_on(c, grid);
        hs.push_back(grid.h(0));
        const ComplexGridFunction w = smooth_test_field(grid);
        const int first = std::max(1, static_cast<int>(std::lround(c.first_time * grid.n_t())));
        for (std::size_t i = 0; i < taus.size(); ++i) {
            CarlemanWeights wts = build_weights(psi, c.lambda, taus[i], grid);
            EnergyIdentityResult e = energy_identity_check(coeffs, wts, w, first);
            sigma_ok = sigma_ok && e.sigma_terms <= 1e-12;
            disc[i].push_back(e.relative_discrepancy);
            r.csv.rows.push_back({std::to_string(n), fmt17(taus[i]), fmt17(e.lhs), fmt17(e.rhs),
                                  fmt17(e.relative_discrepancy), fmt17(e.final_term), fmt17(e.time_groups),
                                  fmt17(e.volume_groups), fmt17(e.boundary_group), fmt17(e.cubic_group),
                                  fmt17(e.sigma_terms)});
        }
    }
    bool ok = sigma_ok && ns.size() >= 2;
    json per = json::array();
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double order = ns.size() >= 2 ? fit_order(hs, disc[i]) : std::numeric_limits<double>::quiet_NaN();
        const double finest = disc[i].back();
        ok = ok && order >= 1.0 && finest <= 1e-3;
        json d = json::array();
        for (double v : disc[i]) d.push_back(num(v));
        per.push_back({{"tau", taus[i]}, {"discrepancy", d}, {"order", num(order)}, {"finest", num(finest)}});
    }
    r.pass = ok;
    json& j = r.report;
    j["subcommand"] = "energy-identity";
    j["pass"] = r.pass;
    j["lambda"] = c.lambda;
    j["first_time"] = c.first_time;
    j["sigma_terms_vanish"] = sigma_ok;
    j["per_tau"] = per;
    return r;
}

// --------------------------------------------------------------- invert-source

RealField configured_source(const ExperimentConfig& c, const SpaceTimeGrid& grid) {
    if (c.source == "random") {
        std::mt19937_64 rng(c.seed);
        return random_source(grid, c.band, rng);
    }
    SineProduct sp(grid.domain());
    RealField f(grid.node_count());
    for (Index k = 0; k < grid.node_count(); ++k) f[k] = sp.value(grid.node(k));
    return f;
}

RunResult run_invert_source(const ExperimentConfig& c) {
    SpaceTimeGrid grid = c.grid();
    CoefficientSet coeffs = coefficients_on(c, grid);
    coeffs.require_valid();
    const RealField f = configured_source(c, grid);
    NoiseSweep s = noise_sweep(coeffs, f, c.noise_levels, c.reg, c.seed, c.max_iters, c.tol);
    InverseData clean = synthesize_data(coeffs, f, SpatialField::Zero(grid.node_count()), 0.0, c.seed);
    Reconstruction r0 = reconstruct_source(coeffs, clean, c.reg, c.max_iters, c.tol);

    RunResult r;
    r.csv.header = {"sigma", "relative_error", "iterations", "converged"};
    r.csv.rows.push_back({fmt17(0.0), fmt17(s.noiseless_error), std::to_string(r0.iterations), yes(r0.converged)});
    json pts = json::array();
    bool all_conv = r0.converged;
    for (const auto& p : s.points) {
        r.csv.rows.push_back({fmt17(p.sigma), fmt17(p.error), std::to_string(p.iterations), yes(p.converged)});
        pts.push_back({{"sigma", p.sigma}, {"relative_error", num(p.error)}, {"iterations", p.iterations}, {"converged", p.converged}});
        all_conv = all_conv && p.converged;
    }
    const bool slope_ok = s.points.size() >= 2 && s.slope >= 0.7 && s.slope <= 1.3;
    r.pass = s.noiseless_error <= 1e-2 && slope_ok;
    json& j = r.report;
    j["subcommand"] = "invert-source";
    j["pass"] = r.pass;
    j["source"] = c.source;
    j["reg"] = c.reg;
    j["noiseless_error"] = num(s.noiseless_error);
    j["noiseless_iterations"] = r0.iterations;
    j["noise_points"] = pts;
    j["slope"] = num(s.slope);
    j["slope_ok"] = slope_ok;
    j["all_converged"] = all_conv;
    return r;
}

// ------------------------------------------------------------- stability-sweep

RunResult run_stability(const ExperimentConfig& c) {
    SpaceTimeGrid grid = c.grid();
    CoefficientSet coeffs = coefficients_on(c, grid);
    coeffs.require_valid();
    StabilityReport rep = stability_sweep(coeffs, StabilitySpec{c.count, c.band, c.seed});

    // linearity of the difference problem: scale f - f~ and compare ratios
    std::mt19937_64 rng(c.seed);
    const SpatialField zero = SpatialField::Zero(grid.node_count());
    double scale_dev = 0.0;
    for (int i = 0; i < std::min(c.count, 5); ++i) {
        RealField f = random_source(grid, c.band, rng);
        RealField g = random_source(grid, c.band, rng);
        StabilityEntry base = stability_pair_ratio(coeffs, f, g, zero, zero);
        if (base.excluded || base.violation) continue;
        for (double s : {3.0, 0.01}) {
            StabilityEntry e = stability_pair_ratio(coeffs, g + s * (f - g), g, zero, zero);
            scale_dev = std::max(scale_dev, std::abs(e.ratio - base.ratio) / base.ratio);
        }
    }

    RunResult r;
    r.csv.header = {"pair_id", "num", "h3_term", "boundary_terms", "ratio", "flags"};
    bool all_finite = true;
    for (const auto& e : rep.entries) {
        if (!e.excluded) all_finite = all_finite && std::isfinite(e.ratio);
        r.csv.rows.push_back({std::to_string(e.pair_id), fmt17(e.num), fmt17(e.h3_term), fmt17(e.boundary_terms),
                              fmt17(e.ratio), e.flags});
    }
    r.pass = all_finite && rep.violations == 0 && scale_dev <= 1e-8 && rep.finite > 0;
    json& j = r.report;
    j["subcommand"] = "stability-sweep";
    j["pass"] = r.pass;
    j["pairs"] = c.count;
    j["finite"] = rep.finite;
    j["excluded"] = rep.excluded;
    j["violations"] = rep.violations;
    j["duplicates"] = rep.duplicates;
    j["max_ratio"] = num(rep.max_ratio);
    j["median_ratio"] = num(rep.median_ratio);
    j["all_finite"] = all_finite;
    j["scale_invariance_deviation"] = num(scale_dev);
    return r;
}

// ---------------------------------------------------------- invert-coefficient

ReductionSetup reduction_setup(const ExperimentConfig& c, const SpaceTimeGrid& grid) {
    ReductionSetup s{make_coefficients(c.coefficients, grid.domain()), grid, {}, nullptr, c.floor_fraction};
    // u = e^{it} solves the c = 1 problem with these data
    s.u0 = SpatialField::Ones(grid.node_count());
    s.boundary = [](double t, const Vec2&) { return std::exp(I_unit * t); };
    return s;
}

RunResult run_invert_coefficient(const ExperimentConfig& c) {
    const SineProduct sp(c.domain());
    const double amp = c.amplitude;
    auto one = [](const Vec2&) { return 1.0; };
    auto bumped = [sp, amp](const Vec2& x) { return 1.0 + amp * sp.value(x); };

    RunResult r;
    const std::vector<int> ns = resolutions_or(c, {32, 64, 128});
    std::vector<double> hs, res;
    json lv = json::array();
    for (int n : ns) {
        SpaceTimeGrid grid = c.grid(n, scaled_nt(c, n));
        CoefficientEntry e = coefficient_reduction(reduction_setup(c, grid), one, bumped);
        hs.push_back(grid.h(0));
        res.push_back(e.residual);
        lv.push_back({{"n_x", n}, {"residual", num(e.residual)}, {"ratio", num(e.ratio)}, {"flags", e.flags}});
    }
    const double order = ns.size() >= 2 ? fit_order(hs, res) : std::numeric_limits<double>::quiet_NaN();

    SpaceTimeGrid grid = c.grid();
    CoefficientEntry same = coefficient_reduction(reduction_setup(c, grid), bumped, bumped);
    CoefficientReport rep = coefficient_sweep(reduction_setup(c, grid), c.count, c.band, amp, c.seed);

    r.csv.header = {"pair_id", "num", "h3_term", "boundary_terms", "ratio", "residual", "min_abs_u2", "floor", "flags"};
    bool all_finite = true;
    for (const auto& e : rep.entries) {
        if (!e.excluded) all_finite = all_finite && std::isfinite(e.ratio);
        r.csv.rows.push_back({std::to_string(e.pair_id), fmt17(e.num), fmt17(e.h3_term), fmt17(e.boundary_terms),
                              fmt17(e.ratio), fmt17(e.residual), fmt17(e.min_abs_u2), fmt17(e.floor), e.flags});
    }
    r.pass = order >= 1.8 && all_finite && rep.finite > 0 && same.excluded;
    json& j = r.report;
    j["subcommand"] = "invert-coefficient";
    j["pass"] = r.pass;
    j["residual_levels"] = lv;
    j["residual_order"] = num(order);
    j["identical_pair_excluded"] = same.excluded;
    j["identical_pair_flags"] = same.flags;
    j["pairs"] = c.count;
    j["finite"] = rep.finite;
    j["excluded"] = rep.excluded;
    j["all_finite"] = all_finite;
    j["max_ratio"] = num(rep.max_ratio);
    j["median_ratio"] = num(rep.median_ratio);
    return r;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"check-weight",  "forward-convergence", "carleman-verify",
                                            "energy-identity", "invert-source",     "stability-sweep",
                                            "invert-coefficient"};
    return s;
}

RunResult run_experiment(const std::string& sub, const ExperimentConfig& config) {
    if (!config.experiment.empty() && config.experiment != sub)
        throw ConfigError("experiment: config is for '" + config.experiment + "', not '" + sub + "'");
    if (sub == "check-weight") return run_check_weight(config);
    if (sub == "forward-convergence") return run_forward(config);
    if (sub == "carleman-verify") return run_carleman(config);
    if (sub == "energy-identity") return run_energy(config);
    if (sub == "invert-source") return run_invert_source(config);
    if (sub == "stability-sweep") return run_stability(config);
    if (sub == "invert-coefficient") return run_invert_coefficient(config);
    throw ConfigError("<subcommand>: unknown subcommand '" + sub + "'");
}

void write_artifacts(const std::string& dir, const std::string& subcommand, const ExperimentConfig& config,
                     const std::string& config_path, const std::string& config_bytes, const RunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        out << text;
    };
    put("report.json", result.report.dump(2) + "\n");
    put("report.csv", result.csv.str());
    json m;
    m["tool"] = "carlab";
    m["version"] = carlab_version;
    m["subcommand"] = subcommand;
    m["config_path"] = config_path;
    m["config_hash"] = hex64(fnv1a(config_bytes));
    m["seed"] = config.seed;
    m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    m["compiler"] = __VERSION__;
    m["pass"] = result.pass;
    m["timestamp"] = utc_now();
    put("manifest.json", m.dump(2) + "\n");
}

}  // namespace carlab
