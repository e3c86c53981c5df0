#include <doctest.h>

#include "carlab/carleman.hpp"
#include "carlab/differences.hpp"
#include "carlab/solver.hpp"

#include <cmath>
#include <numbers>

using namespace carlab;
using std::numbers::pi;

namespace {

const Complex I(0.0, 1.0);

CoefficientSet coeffs_1d(int n, CoefficientSpec spec = {}) {
    SpatialDomain dom({{0.0, 1.0}}, {Face::x_hi});
    return sample_coefficients(make_coefficients(spec, dom), build_grid(dom, n, n, 1.0));
}

CoefficientSet coeffs_2d(int n, CoefficientSpec spec = {}) {
    SpatialDomain dom({{0.0, 1.0}, {0.0, 1.0}}, {Face::x_hi, Face::y_hi});
    return sample_coefficients(make_coefficients(spec, dom), build_grid(dom, n, n, 1.0));
}

// smooth, zero on the lateral boundary, not separable in (t, x)
ComplexGridFunction bump(const SpaceTimeGrid& g) {
    return ComplexGridFunction::sample(g, [d = g.dim()](double t, const Vec2& x) {
        Complex v = std::sin(pi * x[0]) * (1.0 + t + I * x[0] * t * t);
        if (d == 2) v *= std::sin(pi * x[1]) * (1.0 + 0.5 * x[1] * t);
        return v;
    });
}

double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST_CASE("weight values at the corner") {
    auto c = coeffs_1d(16);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0));
    auto w = build_weights(psi, 1.0, 1.0, c.grid());
    const Index last = c.grid().node_count() - 1;
    const int n = c.grid().n_t();
    CHECK(w.psi_sup == doctest::Approx(4.0));
    CHECK(w.alpha(last, n) == doctest::Approx(std::exp(4.0) - std::exp(8.0)).epsilon(1e-14));
    CHECK(w.alpha(last, n) == doctest::Approx(-2926.36).epsilon(1e-5));
    CHECK(w.phi(last, n) == doctest::Approx(std::exp(4.0)).epsilon(1e-14));
    CHECK(w.phi(0, 0) == 0.0);
    CHECK(w.exp_factor(0, 0) == 0.0);
    CHECK(w.exp_factor.maxCoeff() == doctest::Approx(1.0));
    CHECK(w.log_scale() == doctest::Approx(w.alpha.block(0, 1, w.alpha.rows(), n).maxCoeff()));
    for (int j = 1; j <= n; ++j)
        for (Index k = 0; k < c.grid().node_count(); ++k) {
            REQUIRE(w.alpha(k, j) < 0.0);
            REQUIRE(w.phi(k, j) > 0.0);
        }
}

TEST_CASE("weight rejects bad parameters") {
    auto c = coeffs_1d(16);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0));
    CHECK_THROWS_AS(build_weights(psi, 0.0, 1.0, c.grid()), std::invalid_argument);
    CHECK_THROWS_AS(build_weights(psi, 1.0, -1.0, c.grid()), std::invalid_argument);
    auto flat = WeightFunctionPsi::quadratic(1, Vec2(0.5, 0.0));
    CHECK_THROWS_AS(build_weights(flat, 1.0, 1.0, c.grid()), std::domain_error);
}

TEST_CASE("h3 tau norm of a sine") {
    SpatialDomain dom({{0.0, 1.0}}, {Face::x_hi});
    auto g = build_grid(dom, 256, 8, 1.0);
    SpatialField v = sample_space(g, [](const Vec2& x) { return Complex(std::sin(pi * x[0])); });
    const double h3 = std::sqrt((1 + pi * pi + std::pow(pi, 4) + std::pow(pi, 6)) / 2.0);
    CHECK(h3 == doctest::Approx(23.13).epsilon(1e-3));
    CHECK(h3tau_norm(g, v, 0.0) == doctest::Approx(h3).epsilon(1e-4));
    CHECK(h3tau_norm(g, v, 1.0) == doctest::Approx(h3 + 1.0 / std::sqrt(2.0)).epsilon(1e-4));
    CHECK(h3tau_norm(g, v, 2.0) - h3tau_norm(g, v, 0.0) == doctest::Approx(8.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK_THROWS_AS(h3tau_norm(g, SpatialField::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("budget is quadratic in z and scale free in C") {
    auto c = coeffs_1d(32);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    auto w = build_weights(psi, 1.0, 2.0, c.grid());
    auto z = bump(c.grid());
    auto g = apply_operator(c, z);
    auto r1 = carleman_budget(c, w, z, g);
    auto r2 = carleman_budget(c, w, 2.0 * z, 2.0 * g);
    CHECK(r2.lhs_volume == doctest::Approx(4.0 * r1.lhs_volume).epsilon(1e-12));
    CHECK(r2.lhs_p1p2 == doctest::Approx(4.0 * r1.lhs_p1p2).epsilon(1e-12));
    CHECK(r2.rhs_boundary == doctest::Approx(4.0 * r1.rhs_boundary).epsilon(1e-12));
    CHECK(r2.rhs_source == doctest::Approx(4.0 * r1.rhs_source).epsilon(1e-12));
    CHECK(r2.empirical_C == doctest::Approx(r1.empirical_C).epsilon(1e-12));
    CHECK(r1.lhs_volume > 0.0);
    CHECK(r1.rhs_boundary > 0.0);
    CHECK(r1.equation_residual < 1e-12);
    CHECK(r1.log_scale == doctest::Approx(w.log_scale()));
}

TEST_CASE("budget of zero is excluded and nonzero boundary is rejected") {
    auto c = coeffs_1d(16);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    auto w = build_weights(psi, 1.0, 1.0, c.grid());
    ComplexGridFunction zero(c.grid());
    auto r = carleman_budget(c, w, zero, zero);
    CHECK(r.excluded);
    auto bad = ComplexGridFunction::sample(c.grid(), [](double, const Vec2&) { return Complex(1.0); });
    CHECK_THROWS_AS(carleman_budget(c, w, bad, bad), std::invalid_argument);
}

TEST_CASE("energy identity converges in 1D") {
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    CoefficientSpec spec;
    spec.linear = 0.3;
    spec.time = 0.2;
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        auto c = coeffs_1d(n, spec);
        auto w = build_weights(psi, 1.0, 2.0, c.grid());
        auto r = energy_identity_check(c, w, bump(c.grid()), n / 4);
        CHECK(r.sigma_terms < 1e-12);
        CHECK(std::isfinite(r.lhs));
        err.push_back(r.relative_discrepancy);
    }
    MESSAGE("1D discrepancies " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(order(err[0], err[1]) >= 1.0);
    CHECK(order(err[1], err[2]) >= 1.0);
    CHECK(err[2] <= 1e-3);
}

TEST_CASE("energy identity converges in 2D with variable coefficients") {
    auto psi = WeightFunctionPsi::quadratic(2, Vec2(-1.0, -1.0), 0.25);
    CoefficientSpec spec;
    spec.quadratic = 0.2;
    spec.cross = 0.1;
    spec.offdiag = {0.1, 0.1};
    spec.time = 0.1;
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        auto c = coeffs_2d(n, spec);
        auto w = build_weights(psi, 1.0, 1.0, c.grid());
        auto r = energy_identity_check(c, w, bump(c.grid()), n / 4);
        CHECK(r.sigma_terms < 1e-12);
        err.push_back(r.relative_discrepancy);
    }
    MESSAGE("2D discrepancies " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(order(err[0], err[1]) >= 1.0);
    CHECK(order(err[1], err[2]) >= 1.0);
}

TEST_CASE("energy identity rejects bad levels") {
    auto c = coeffs_1d(16);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    auto w = build_weights(psi, 1.0, 1.0, c.grid());
    CHECK_THROWS_AS(energy_identity_check(c, w, bump(c.grid()), 0), std::invalid_argument);
    CHECK_THROWS_AS(energy_identity_check(c, w, bump(c.grid()), 16), std::invalid_argument);
}

TEST_CASE("elliptic slice ratio is positive") {
    auto c = coeffs_1d(64);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    auto w = build_weights(psi, 1.0, 2.0, c.grid());
    const int n = c.grid().n_t();
    SpatialField v = sample_space(c.grid(), [](const Vec2& x) { return Complex(std::sin(pi * x[0])); });
    SpatialDifferences sd(c.grid());
    SpatialField q = -(sd.D(2, 0) * v);
    SpatialField wt = SpatialField::Zero(v.size());
    auto r = elliptic_slice_check(c, w, n, v, q, wt);
    CHECK_FALSE(r.excluded);
    CHECK(r.ratio > 0.0);
    CHECK(std::isfinite(r.ratio));
    auto z = elliptic_slice_check(c, w, n, SpatialField::Zero(v.size()), SpatialField::Zero(v.size()),
                                  SpatialField::Zero(v.size()));
    CHECK(z.excluded);
}

TEST_CASE("sweep bookkeeping") {
    auto c = coeffs_1d(32);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    auto z = bump(c.grid());
    std::vector<CarlemanMember> ens{{z, apply_operator(c, z)}, {ComplexGridFunction(c.grid()), ComplexGridFunction(c.grid())}};
    auto rep = carleman_sweep(c, psi, 1.0, ens, {1.0, 2.0, 4.0});
    CHECK(rep.rows.size() == 6);
    CHECK(rep.excluded == 3);
    CHECK(rep.max_C.size() == 3);
    for (double m : rep.max_C) CHECK(m > 0.0);
    CHECK_THROWS_AS(carleman_sweep(c, psi, 1.0, ens, {2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("resolved tau limit") {
    auto c = coeffs_1d(64);
    auto psi = WeightFunctionPsi::quadratic(1, Vec2(-1.0, 0.0), 0.25);
    // at x = 1: dt (e^2 - e) + h e, at x = 0: dt (e^2 - e^0.25) + h e^0.25 / 2
    const double e = std::exp(1.0), e2 = std::exp(2.0), q = std::exp(0.25);
    const double want = 64.0 / std::max(e2 - e + e, e2 - q + 0.5 * q);
    CHECK(resolved_tau_limit(psi, 1.0, c.grid()) == doctest::Approx(want).epsilon(1e-12));
    auto c2 = coeffs_1d(128);
    CHECK(resolved_tau_limit(psi, 1.0, c2.grid()) == doctest::Approx(2.0 * want).epsilon(1e-12));
}
