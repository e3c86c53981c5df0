#include <doctest.h>

#include "carlab/coefficients.hpp"
#include "carlab/geometry.hpp"

#include <cmath>

using namespace carlab;

namespace {

// Minimal non-symmetric model for the symmetry check.
class Skewed final : public CoefficientModel {
public:
    int dim() const override { return 2; }
    bool time_dependent() const override { return false; }
    CoefficientSample eval(double, const Vec2&) const override {
        CoefficientSample s;
        s.a << 2.0, 0.5, 0.0, 2.0;
        return s;
    }
};

}  // namespace

TEST_CASE("uniform 1D grid spacing") {
    auto g = build_grid(SpatialDomain::unit_interval(), 10, 10, 1.0);
    CHECK(g.dt() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(g.h(0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(g.t_floor() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(g.node_count() == 11);
    CHECK(g.interior().size() == 9);
}

TEST_CASE("2D grid node count") {
    auto g = build_grid(SpatialDomain::unit_square(), 8, 8, 2.0);
    CHECK(g.dt() == 0.25);
    CHECK(g.node_count() == 81);
    CHECK(g.boundary().size() == 32);
    CHECK(g.face_nodes(Face::y_hi).size() == 9);
}

TEST_CASE("grid preconditions") {
    CHECK_THROWS_AS(build_grid(SpatialDomain::unit_interval(), 10, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(SpatialDomain::unit_interval(), 10, 10, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(SpatialDomain::unit_interval(), 4, 10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SpatialDomain({{1.0, 1.0}}, {Face::x_hi}), std::invalid_argument);
    CHECK_THROWS_AS(SpatialDomain({{0.0, 1.0}}, {}), std::invalid_argument);
    CHECK_THROWS_AS(SpatialDomain({{0.0, 1.0}}, {Face::y_lo}), std::invalid_argument);
}

TEST_CASE("refinement keeps coarse nodes exactly") {
    SpatialDomain dom({{-0.3, 1.7}, {0.1, 0.9}}, {Face::x_hi});
    auto coarse = build_grid(dom, 12, 10, 1.3);
    auto fine = build_grid(dom, 24, 20, 1.3);
    for (int i = 0; i <= 12; ++i) {
        CHECK(coarse.coordinate(0, i) == fine.coordinate(0, 2 * i));
        CHECK(coarse.coordinate(1, i) == fine.coordinate(1, 2 * i));
    }
    for (int j = 0; j <= 10; ++j) CHECK(coarse.time(j) == fine.time(2 * j));
}

TEST_CASE("outward normals") {
    auto d1 = SpatialDomain::unit_interval();
    CHECK(outward_normal(d1, Face::x_lo)[0] == -1.0);
    CHECK(outward_normal(d1, Face::x_hi)[0] == 1.0);
    auto d2 = SpatialDomain::unit_square();
    Vec2 n = outward_normal(d2, Face::y_hi);
    CHECK(n[0] == 0.0);
    CHECK(n[1] == 1.0);
    CHECK_THROWS_AS(outward_normal(d1, Face::y_hi), std::invalid_argument);
    CHECK(parse_face("left", 1) == Face::x_lo);
    CHECK_THROWS_AS(parse_face("top", 2), std::invalid_argument);
}

TEST_CASE("identity coefficients pass all assumptions") {
    auto dom = SpatialDomain::unit_interval();
    auto grid = build_grid(dom, 10, 10, 1.0);
    auto cs = sample_coefficients(make_coefficients(CoefficientSpec{}, dom), grid);
    auto rep = validate_assumptions(cs);
    CHECK(rep.all_pass());
    CHECK(cs.beta() == 1.0);
    CHECK(cs.beta1() == 1.0);
    CHECK_NOTHROW(cs.require_valid());
}

TEST_CASE("constant matrix ellipticity is the smallest eigenvalue") {
    auto dom = SpatialDomain::unit_square();
    auto grid = build_grid(dom, 8, 8, 1.0);
    CoefficientSpec spec;
    spec.diag = {2.0, 2.0};
    spec.offdiag = {1.0, 1.0};
    auto cs = sample_coefficients(make_coefficients(spec, dom), grid);
    CHECK(cs.beta() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exp(it) source has unit final modulus") {
    auto dom = SpatialDomain::unit_interval();
    auto grid = build_grid(dom, 10, 10, 1.0);
    CoefficientSpec spec;
    spec.R = "exp_it";
    auto cs = sample_coefficients(make_coefficients(spec, dom), grid);
    CHECK(cs.beta1() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("indefinite matrix fails ellipticity with witness") {
    auto dom = SpatialDomain::unit_square();
    auto grid = build_grid(dom, 8, 8, 1.0);
    CoefficientSpec spec;
    spec.diag = {1.0, -1.0};
    auto cs = sample_coefficients(make_coefficients(spec, dom), grid);
    auto rep = validate_assumptions(cs);
    CHECK_FALSE(rep.ellipticity.pass);
    CHECK(rep.ellipticity.value == -1.0);
    CHECK(rep.ellipticity.witness[0] == doctest::Approx(0.0));
    CHECK(rep.ellipticity.witness[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(cs.require_valid(), std::domain_error);
}

TEST_CASE("vanishing final source is reported at x = 0") {
    auto dom = SpatialDomain::unit_interval();
    auto grid = build_grid(dom, 10, 10, 1.0);
    CoefficientSpec spec;
    spec.R = "linear_x";
    auto cs = sample_coefficients(make_coefficients(spec, dom), grid);
    auto rep = validate_assumptions(cs);
    CHECK_FALSE(rep.final_source.pass);
    CHECK(rep.final_source.node == 0);
    CHECK(rep.final_source.level == 10);
}

TEST_CASE("non-symmetric specs are rejected") {
    auto dom = SpatialDomain::unit_square();
    CoefficientSpec spec;
    spec.offdiag = {0.5, 0.0};
    CHECK_THROWS_AS(make_coefficients(spec, dom), std::invalid_argument);
    auto grid = build_grid(dom, 8, 8, 1.0);
    auto cs = sample_coefficients(std::make_shared<Skewed>(), grid);
    auto rep = validate_assumptions(cs);
    CHECK_FALSE(rep.symmetry.pass);
    CHECK(rep.symmetry.value == 0.5);
}

TEST_CASE("unknown R preset is rejected") {
    CoefficientSpec spec;
    spec.R = "sideways";
    CHECK_THROWS_AS(make_coefficients(spec, SpatialDomain::unit_interval()), std::invalid_argument);
}
