#pragma once

#include "carlab/coefficients.hpp"
#include "carlab/grid_function.hpp"
#include "carlab/weight.hpp"

#include <optional>
#include <vector>

namespace carlab {

// phi = e^{lambda psi}/t and alpha = (e^{lambda psi} - e^{2 lambda |psi|})/t on
// levels 1..n_t (level 0 holds zeros). exp_factor is e^{tau (alpha - alpha_max)}
// with alpha_max the largest alpha on the grid; the true weight is
// exp_factor * e^{log_scale}. Every Carleman term is quadratic in the weight,
// so ratios of terms do not see the shift.
struct CarlemanWeights {
    WeightFunctionPsi psi;
    double lambda = 1.0;
    double tau = 1.0;
    double psi_sup = 0.0;
    double alpha_max = 0.0;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd alpha;
    Eigen::MatrixXd exp_factor;
    double log_scale() const { return tau * alpha_max; }
};

CarlemanWeights build_weights(const WeightFunctionPsi& psi, double lambda, double tau,
                              const SpaceTimeGrid& grid);

// Largest tau for which the weight varies by at most a factor e per cell at
// t = T: 1 / max_x (dt |d_t alpha| + sum_p h_p |d_p alpha|). Beyond it every
// weighted term is dominated by the cells next to the maximum of alpha.
double resolved_tau_limit(const WeightFunctionPsi& psi, double lambda, const SpaceTimeGrid& grid);

struct ConjugatedParts {
    ComplexGridFunction p1;
    ComplexGridFunction p2;
};

// P1 v = 2 tau lambda phi a(grad psi, grad v) + tau lambda^2 phi a(grad psi, grad psi) v
//        + tau lambda phi sum_kj d_k a_kj d_j psi v
// P2 v = i v_t - sum a_lj d_lj v - lambda^2 tau^2 phi^2 a(grad psi, grad psi) v
// on all nodes of levels 1..n_t (one-sided differences at the boundary and at
// t = T; level 0 is used only as the left neighbour of level 1).
ConjugatedParts apply_conjugated_operators(const CoefficientSet& coeffs,
                                           const CarlemanWeights& weights,
                                           const ComplexGridFunction& v);

struct CarlemanRow {
    double tau = 0.0;
    int member = 0;
    double lhs_volume = 0.0;
    double lhs_p1p2 = 0.0;
    double rhs_final = 0.0;
    double rhs_source = 0.0;
    double rhs_boundary = 0.0;
    double empirical_C = 0.0;
    double log_scale = 0.0;         // terms are reported times e^{-2 log_scale}
    double equation_residual = 0.0; // |Pz - g| / |g| with the centered operator
    bool excluded = false;
};

/// Every term of the weighted estimate for one (z, g) pair. Throws if z is
/// not zero on the boundary.
CarlemanRow carleman_budget(const CoefficientSet& coeffs, const CarlemanWeights& weights,
                            const ComplexGridFunction& z, const ComplexGridFunction& g);

struct CarlemanMember {
    ComplexGridFunction z;
    ComplexGridFunction g;
};

struct CarlemanReport {
    std::vector<CarlemanRow> rows;   // sorted by (tau, member)
    std::vector<double> taus;
    std::vector<double> max_C;       // per tau over non-excluded members
    std::optional<double> tau0_star; // smallest tau with <= 10% variation of max_C beyond it
    int excluded = 0;
};

/// Relative spread (max - min) / min of max_C over taus[first..].
double max_C_variation(const CarlemanReport& rep, std::size_t first);

CarlemanReport carleman_sweep(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                              double lambda, const std::vector<CarlemanMember>& ensemble,
                              const std::vector<double>& tau_grid);

struct EnergyIdentityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double relative_discrepancy = 0.0;
    double final_term = 0.0;    // 1/2 [Re(i w, P1 w)] between the end levels
    double time_groups = 0.0;   // terms with d_t of the weight or of w
    double volume_groups = 0.0; // gradient groups
    double boundary_group = 0.0;
    double cubic_group = 0.0;
    double sigma_terms = 0.0;   // Dirichlet-vanishing lateral terms, must be ~0
};

// Both sides of Re(P1 w, P2 w) = RHS on levels first_level..n_t, for w = 0 on
// the lateral boundary.
EnergyIdentityResult energy_identity_check(const CoefficientSet& coeffs,
                                           const CarlemanWeights& weights,
                                           const ComplexGridFunction& w, int first_level = 1);

struct EllipticSliceResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool excluded = false;
};

EllipticSliceResult elliptic_slice_check(const CoefficientSet& coeffs,
                                         const CarlemanWeights& weights, int level,
                                         const SpatialField& w, const SpatialField& q,
                                         const SpatialField& w_t);

/// Discrete full H^3 norm plus tau^3 times the L^2 norm.
double h3tau_norm(const SpaceTimeGrid& grid, const SpatialField& v, double tau);

}  // namespace carlab
