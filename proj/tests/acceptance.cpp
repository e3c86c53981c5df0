// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "carlab/config.hpp"
#include "carlab/inversion.hpp"
#include "carlab/runner.hpp"
#include "carlab/symbols.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace carlab;
using nlohmann::json;

namespace {

const std::string configs = CARLAB_CONFIG_DIR;
const Complex I_unit(0.0, 1.0);

struct Outcome {
    bool pass = false;
    std::string detail;
};

RunResult run_config(const std::string& name) {
    ExperimentConfig c = parse_config(configs + "/" + name + ".json");
    return run_experiment(c.experiment, c);
}

double num(const json& v) { return v.is_number() ? v.get<double>() : std::nan(""); }

// 1. closed form against the finite-difference bracket
Outcome oracle_equivalence() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int samples = 0, bad = 0;
    double worst = 0.0;
    for (int dim : {1, 2}) {
        const SpatialDomain dom = dim == 1 ? SpatialDomain::unit_interval() : SpatialDomain::unit_square();
        const double fd = default_fd_step(dom);
        const auto psi = WeightFunctionPsi::quadratic(dim, Vec2(-1.0, -1.0));
        for (double quad : {0.0, 0.5}) {
            CoefficientSpec spec;
            spec.quadratic = quad;
            auto model = make_coefficients(spec, dom);
            for (int i = 0; i < 500; ++i) {
                const Vec2 x(U(rng), dim == 2 ? U(rng) : 0.0);
                Eigen::VectorXd xi(dim);
                for (int p = 0; p < dim; ++p) xi[p] = 4.0 * U(rng) - 2.0;
                const double tau = 0.05 + 2.0 * U(rng);
                const double t = U(rng), xi0 = U(rng);
                ++samples;
                try {
                    const double qc = q_psi_closed(*model, psi, t, x, xi, tau);
                    const double qo = bracket_oracle(*model, psi, t, x, xi0, xi, tau, fd);
                    const double rel = std::abs(qo - qc) / (1.0 + std::abs(qc));
                    worst = std::max(worst, rel);
                    if (!(rel <= 1e-6)) ++bad;
                } catch (const std::exception&) {
                    ++bad;
                }
            }
        }
    }
    std::ostringstream s;
    s << samples << " samples, worst " << worst << ", " << bad << " outside tolerance";
    return {samples >= 1000 && bad == 0, s.str()};
}

// 2. identity on the unit square, psi = |x - (-1,-1)|^2
Outcome remark() {
    RunResult r = run_config("remark");
    const json& j = r.report;
    const double rmin = num(j["ramsai_min"]);
    bool q_positive = false;
    if (j["lambda_found"].get<bool>()) {
        const std::string want = fmt17(j["lambda"].get<double>());
        for (const auto& row : r.csv.rows)
            if (row[0] == want) q_positive = std::stod(row[1]) > 0.0;
    }
    std::ostringstream s;
    s << "ramsai min " << rmin << ", lambda* " << j["lambda"].dump() << (q_positive ? " with q > 0" : "");
    return {std::abs(rmin - 8.0) <= 1e-9 && q_positive, s.str()};
}

// 3. sign condition on the unobserved boundary, both orientations
Outcome condition1() {
    RunResult right = run_config("condition1_right");
    RunResult left = run_config("condition1_left");
    const double r = num(right.report["condition1_max"]);
    const double l = num(left.report["condition1_max"]);
    std::ostringstream s;
    s << "observed right " << r << ", observed left " << l << " (left run pass=" << left.pass << ")";
    return {std::abs(r + 2.0) <= 1e-12 && std::abs(l - 4.0) <= 1e-12 && !left.pass, s.str()};
}

// 4. manufactured solution, conservation, adjoint
Outcome forward() {
    RunResult r = run_config("forward");
    const json& j = r.report;
    std::ostringstream s;
    s << "slope " << num(j["slope"]) << ", drift " << num(j["norm_drift"]) << ", adjoint "
      << num(j["adjoint_mismatch"]) << " over " << j["adjoint_trials"] << " trials";
    return {r.pass && j["levels"].size() >= 4 && j["adjoint_trials"].get<int>() >= 100, s.str()};
}

// 5. energy identity, 1D and 2D
Outcome energy() {
    std::ostringstream s;
    bool pass = true;
    for (const char* name : {"energy", "energy_2d"}) {
        RunResult r = run_config(name);
        pass = pass && r.pass;
        for (const auto& p : r.report["per_tau"]) {
            pass = pass && p["discrepancy"].size() >= 3;
            s << name << " tau " << p["tau"] << ": order " << num(p["order"]) << " finest " << num(p["finest"]) << "; ";
        }
    }
    return {pass, s.str()};
}

// 6. empirical Carleman constant
Outcome carleman() {
    ExperimentConfig c = parse_config(configs + "/carleman.json");
    RunResult r = run_experiment(c.experiment, c);
    const json& j = r.report;
    std::ostringstream s;
    s << j["members"] << " members, " << j["taus"].size() << " taus, nonnegative " << j["all_terms_nonnegative"]
      << ", stabilized " << j["stabilized"] << ", drift " << num(j["resolution_drift"]);
    const bool sizes = j["members"].get<int>() >= 10 && j["taus"].size() >= 8 && c.n_x == 64 && c.n_t == 64 &&
                       c.domain().dim() == 1;
    return {r.pass && sizes, s.str()};
}

// 7. transformed operator with R = exp(it)
Outcome transformation() {
    CoefficientSpec spec;
    spec.R = "exp_it";
    SpatialDomain dom({{0.0, 1.0}}, {Face::x_hi});
    std::vector<double> hs, res;
    for (int n : {32, 64, 128}) {
        CoefficientSet c = sample_coefficients(make_coefficients(spec, dom), build_grid(dom, n, n, 1.0));
        RealField q(c.grid().node_count());
        for (Index k = 0; k < q.size(); ++k) q[k] = std::sin(std::numbers::pi * c.grid().node(k)[0]);
        auto w = solve_ivp(
            c, [](double t, const Vec2& x) { return std::exp(I_unit * t) * std::sin(std::numbers::pi * x[0]); },
            SpatialField::Zero(c.grid().node_count()));
        hs.push_back(1.0 / n);
        res.push_back(verify_transformation(c, w, q).residual);
    }
    const double order = loglog_slope(hs, res);
    std::ostringstream s;
    s << "residuals " << res[0] << " " << res[1] << " " << res[2] << ", order " << order;
    return {order >= 1.8, s.str()};
}

// 8. Lipschitz stability and source reconstruction
Outcome stability() {
    RunResult st = run_config("stability");
    RunResult inv = run_config("invert_source");
    const json& a = st.report;
    const json& b = inv.report;
    std::ostringstream s;
    s << a["pairs"] << " pairs, " << a["violations"] << " violations, scale deviation "
      << num(a["scale_invariance_deviation"]) << ", noise slope " << num(b["slope"]) << ", noiseless error "
      << num(b["noiseless_error"]);
    return {st.pass && inv.pass && a["pairs"].get<int>() >= 50, s.str()};
}

// 9. coefficient reduction
Outcome coefficient() {
    RunResult r = run_config("coefficient");
    const json& j = r.report;
    std::ostringstream s;
    s << "residual order " << num(j["residual_order"]) << ", " << j["finite"] << " finite of " << j["pairs"]
      << ", identical pair excluded " << j["identical_pair_excluded"];
    return {r.pass && j["finite"].get<int>() >= 20, s.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"symbol oracle equivalence", oracle_equivalence},
        {"remark reproduction", remark},
        {"condition 1 check", condition1},
        {"solver convergence", forward},
        {"energy identity", energy},
        {"carleman estimate", carleman},
        {"transformation check", transformation},
        {"stability sweep", stability},
        {"coefficient problem", coefficient},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("criterion %zu %-28s %s  %s  (%.2f s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
