#pragma once

#include "carlab/coefficients.hpp"
#include "carlab/weight.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace carlab {

struct Covector {
    double xi0 = 0.0;
    Eigen::VectorXd xi;
    double tau = 0.0;
};

/// a(t,x,v,w) = sum a_kj v_k w_j
double quad_form(const CoefficientModel& model, double t, const Vec2& x,
                 const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// p = 0 differentiates a in t, p >= 1 in x_p.
double derivative_form(const CoefficientModel& model, int p, double t, const Vec2& x,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// -xi0 + a(t,x,xi,xi)
double principal_symbol(const CoefficientModel& model, double t, const Vec2& x, double xi0,
                        const Eigen::VectorXd& xi);

// Closed form of q for a weight given by its 2-jet. No finiteness or
// nondegeneracy checks; callers make sure grad is nonzero.
double q_closed(const CoefficientSample& s, int dim, const PsiJet& psi, const Vec2& xi, double tau);

double q_psi_closed(const CoefficientModel& model, const WeightFunctionPsi& psi, double t,
                    const Vec2& x, const Eigen::VectorXd& xi, double tau);

struct BracketValue {
    double value = 0.0;
    double imag_residual = 0.0;  // |Im| / (1 + |Re|)
};

// {p(xi - i tau grad psi), p(xi + i tau grad psi)} / (2 i tau) with analytic
// xi-derivatives and central differences in (t, x). Includes the term coming
// from the t-derivative of a, which the closed form does not carry.
BracketValue bracket_evaluate(const CoefficientModel& model, const WeightFunctionPsi& psi,
                              double t, const Vec2& x, double xi0, const Eigen::VectorXd& xi,
                              double tau, double fd_step);

// Real part of bracket_evaluate. Throws std::runtime_error when the imaginary
// residual exceeds 1e-8.
double bracket_oracle(const CoefficientModel& model, const WeightFunctionPsi& psi, double t,
                      const Vec2& x, double xi0, const Eigen::VectorXd& xi, double tau,
                      double fd_step);

/// Default oracle step: 1e-5 times the domain diameter.
double default_fd_step(const SpatialDomain& domain);

struct SampleSpec {
    int space_per_axis = 17;  // closed lattice points per axis
    int time_samples = 5;     // uniform in [t_floor, T]
    int directions = 16;      // unit directions of xi' (2D)
    int angles = 33;          // theta in [0, pi/2] for (|xi'|, tau)
    std::vector<double> magnitudes{0.0, 0.25, 1.0, 4.0, 16.0};
};

struct RamsaiResult {
    double min = std::numeric_limits<double>::infinity();
    bool vacuous = false;
    double t = 0.0;
    Vec2 x = Vec2::Zero();
    Vec2 xi = Vec2::Zero();
    int sample_count = 0;
};

// Left side of the sufficient condition on the tangent set a(grad psi, xi') = 0,
// |xi'| = 1. Space samples: closed lattice with n_space_samples per axis; times:
// all grid levels. In 2D the constraint set on the unit sphere is {+e, -e}, so
// n_sphere_samples only matters for dim >= 3 and is otherwise ignored.
RamsaiResult check_ramsai(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                          int n_space_samples, int n_sphere_samples = 2);

struct Condition1Result {
    double max = -std::numeric_limits<double>::infinity();
    bool vacuous = false;
    int level = 0;
    Index node = 0;
};

Condition1Result check_condition1(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                                  const SpatialDomain& domain);

struct LambdaSearchResult {
    std::optional<double> lambda;
    std::vector<double> lambdas;
    std::vector<double> q_min;  // normalized minimum per lambda
};

std::vector<double> default_lambda_grid();

LambdaSearchResult find_min_lambda(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                                   const std::vector<double>& lambda_grid,
                                   const SampleSpec& samples);

struct GardingResult {
    double constant = std::numeric_limits<double>::infinity();
    double homogeneity_defect = 0.0;  // max relative change under (xi, tau) -> 2(xi, tau)
    int sample_count = 0;
};

GardingResult estimate_garding_constant(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                                        double lambda, const SampleSpec& samples,
                                        const std::vector<double>& taus);

struct PseudoconvexityReport {
    double ramsai_min = 0.0;
    bool ramsai_vacuous = false;
    double condition1_max = 0.0;
    bool condition1_vacuous = false;
    double garding_constant = 0.0;
    double lambda = 0.0;
    bool lambda_found = false;
    LambdaSearchResult lambda_search;
    int sample_count = 0;
    bool verdict = false;
};

PseudoconvexityReport check_pseudoconvexity(const CoefficientSet& coeffs,
                                            const WeightFunctionPsi& psi,
                                            const std::vector<double>& lambda_grid,
                                            const SampleSpec& samples,
                                            const std::vector<double>& garding_taus);

}  // namespace carlab
