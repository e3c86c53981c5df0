#pragma once

#include "carlab/geometry.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace carlab {

// Values and derivatives of every coefficient at one (t, x). Entries past
// dim() are zero.
struct CoefficientSample {
    Mat2 a = Mat2::Zero();
    Mat2 a_t = Mat2::Zero();
    std::array<Mat2, 2> a_x{Mat2::Zero(), Mat2::Zero()};
    std::array<std::array<Mat2, 2>, 2> a_xx{{{Mat2::Zero(), Mat2::Zero()}, {Mat2::Zero(), Mat2::Zero()}}};
    CVec2 b = CVec2::Zero();
    Complex c{0.0, 0.0};
    Complex R{1.0, 0.0};
    Complex R_t{0.0, 0.0};
    std::array<Complex, 2> R_x{};
    std::array<std::array<Complex, 2>, 2> R_xx{};
};

// Closed-form coefficients of P u = i u_t - div(a grad u) + b.grad u + c u.
class CoefficientModel {
public:
    virtual ~CoefficientModel() = default;
    virtual int dim() const = 0;
    /// true when a, b or c depend on t (R may vary in t either way)
    virtual bool time_dependent() const = 0;
    virtual CoefficientSample eval(double t, const Vec2& x) const = 0;
};

// Parameters of the built-in analytic family:
//   a_kk = diag[k] + linear*x_k + quadratic*x_k^2 + time*t
//   a_12 = offdiag[0] + cross*x_1*x_2,  a_21 = offdiag[1] + cross*x_1*x_2
//   b    = constant complex vector
//   c    = c0 + c_sine * prod_k sin(pi*(x_k-lo_k)/L_k)
//   R    = one | exp_it | linear_x | modulated
struct CoefficientSpec {
    std::array<double, 2> diag{1.0, 1.0};
    std::array<double, 2> offdiag{0.0, 0.0};
    double linear = 0.0;
    double quadratic = 0.0;
    double time = 0.0;
    double cross = 0.0;
    std::array<Complex, 2> b{};
    Complex c0{0.0, 0.0};
    double c_sine = 0.0;
    std::string R = "one";
};

std::shared_ptr<const CoefficientModel> make_coefficients(const CoefficientSpec& spec,
                                                          const SpatialDomain& domain);

// Same model with the zero-order term replaced by a real time-independent c(x).
std::shared_ptr<const CoefficientModel> with_potential(
    std::shared_ptr<const CoefficientModel> base, std::function<double(const Vec2&)> c);

struct AssumptionCheck {
    bool pass = true;
    double value = 0.0;
    int level = 0;
    Index node = 0;
    Vec2 witness = Vec2::Zero();
};

struct AssumptionReport {
    AssumptionCheck symmetry;     // value: max |a_lj - a_jl|
    AssumptionCheck ellipticity;  // value: min eigenvalue, witness: eigenvector
    AssumptionCheck final_source; // value: min |R(T, .)|
    bool all_pass() const { return symmetry.pass && ellipticity.pass && final_source.pass; }
};

class CoefficientSet {
public:
    CoefficientSet(std::shared_ptr<const CoefficientModel> model, SpaceTimeGrid grid);

    const CoefficientModel& model() const { return *model_; }
    std::shared_ptr<const CoefficientModel> model_ptr() const { return model_; }
    const SpaceTimeGrid& grid() const { return grid_; }

    // sampled fields, column = time level
    const Eigen::MatrixXd& a(int l, int j) const { return a_[l][j]; }
    const Eigen::MatrixXcd& b(int l) const { return b_[l]; }
    const Eigen::MatrixXcd& c() const { return c_; }
    const Eigen::MatrixXcd& R() const { return R_; }

    double beta() const { return report_.ellipticity.value; }
    double beta1() const { return report_.final_source.value; }
    const AssumptionReport& report() const { return report_; }

    // Throws std::domain_error naming the first failed assumption.
    void require_valid() const;

private:
    std::shared_ptr<const CoefficientModel> model_;
    SpaceTimeGrid grid_;
    std::array<std::array<Eigen::MatrixXd, 2>, 2> a_;
    std::array<Eigen::MatrixXcd, 2> b_;
    Eigen::MatrixXcd c_;
    Eigen::MatrixXcd R_;
    AssumptionReport report_;
};

CoefficientSet sample_coefficients(std::shared_ptr<const CoefficientModel> model,
                                   const SpaceTimeGrid& grid);

AssumptionReport validate_assumptions(const CoefficientSet& coeffs);

}  // namespace carlab
