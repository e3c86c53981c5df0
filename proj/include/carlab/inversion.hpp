#pragma once

#include "carlab/solver.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace carlab {

struct InverseData {
    Observation obs;  // u(T) plus Neumann and d_t Neumann traces on the observed faces
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

// Adds sigma * |channel| * xi / |xi| to every channel, xi complex Gaussian
// drawn from the seed, norms taken in the data metric. The final-state noise
// lives on interior nodes only.
void add_relative_noise(Observation& obs, const DataMetric& metric, double sigma, std::uint64_t seed);

/// Forward solve with source R f and initial state u0 (zero on the boundary),
/// observation, then noise. Throws std::domain_error on assumption failure.
InverseData synthesize_data(const CoefficientSet& coeffs, const RealField& f, const SpatialField& u0,
                            double noise_level, std::uint64_t seed);

struct Reconstruction {
    RealField f;
    int iterations = 0;
    double relative_residual = 0.0;  // of the normal equations
    bool converged = false;
};

// CG on (F*F + reg) f = F* d in the trapezoid L^2 inner product; F* is the
// real part of the discrete adjoint. Data generated with u0 = 0.
Reconstruction reconstruct_source(const CoefficientSet& coeffs, const InverseData& data, double reg,
                                  int max_iters = 500, double tol = 1e-10);

/// Real band-limited sine series with Gaussian coefficients, unit L^2 norm.
RealField random_source(const SpaceTimeGrid& grid, int band, std::mt19937_64& rng);

struct StabilityEntry {
    int pair_id = 0;
    double num = 0.0;
    double h3_term = 0.0;
    double boundary_terms = 0.0;
    double ratio = 0.0;
    bool excluded = false;   // 0/0
    bool violation = false;  // nonzero numerator over zero denominator
    std::string flags;
};

struct StabilityReport {
    std::vector<StabilityEntry> entries;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    int finite = 0;
    int excluded = 0;
    int violations = 0;
    int duplicates = 0;
};

void summarize(StabilityReport& rep);

StabilityEntry stability_pair_ratio(const CoefficientSet& coeffs, const RealField& f, const RealField& f_tilde,
                                    const SpatialField& u0, const SpatialField& u0_tilde);

struct StabilitySpec {
    int count = 50;
    int band = 4;
    std::uint64_t seed = 1;
};

StabilityReport stability_sweep(const CoefficientSet& coeffs, const StabilitySpec& spec);

/// Explicit pairs with zero initial data. Exact repeats of an earlier pair are
/// skipped and counted in duplicates.
StabilityReport stability_sweep(const CoefficientSet& coeffs,
                                const std::vector<std::pair<RealField, RealField>>& pairs);

struct NoisePoint {
    double sigma = 0.0;
    double error = 0.0;  // relative L^2
    int iterations = 0;
    bool converged = false;
};

struct NoiseSweep {
    std::vector<NoisePoint> points;
    double noiseless_error = 0.0;
    double slope = 0.0;  // least squares fit of log error against log sigma
};

NoiseSweep noise_sweep(const CoefficientSet& coeffs, const RealField& f, const std::vector<double>& sigmas,
                       double reg, std::uint64_t seed, int max_iters = 500, double tol = 1e-10);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// P~ v = conj(R) P(v / conj(R)): the same principal part with
//   b~ = b + 2 a grad(conj R) / conj R
//   c~ = c - i d_t(conj R)/conj R + div(a grad conj R)/conj R
//        - 2 a(grad conj R, grad conj R)/conj R^2 - b.grad(conj R)/conj R
std::shared_ptr<const CoefficientModel> transformed_model(std::shared_ptr<const CoefficientModel> base);

struct TransformationCheck {
    double residual = 0.0;
    bool undefined = false;  // 0/0
};

/// |P~(i conj(R) w) - i |R|^2 q| / |i |R|^2 q| over interior nodes of levels
/// 1..n_t-1. Throws std::domain_error if R vanishes on the grid.
TransformationCheck verify_transformation(const CoefficientSet& coeffs, const ComplexGridFunction& w,
                                          const RealField& q);

struct CoefficientEntry {
    int pair_id = 0;
    double num = 0.0;
    double h3_term = 0.0;
    double boundary_terms = 0.0;
    double ratio = 0.0;
    double residual = 0.0;  // |P_(1) w - (c2 - c1) u2| / |(c2 - c1) u2|
    double min_abs_u2 = 0.0;
    double floor = 0.0;
    bool excluded = false;
    std::string flags;
};

using RealSpatialFunction = std::function<double(const Vec2&)>;

struct ReductionSetup {
    std::shared_ptr<const CoefficientModel> base;
    SpaceTimeGrid grid;
    SpatialField u0;
    SpaceTimeFunction boundary;  // Dirichlet data shared by both problems
    double floor_fraction = 0.1;
};

CoefficientEntry coefficient_reduction(const ReductionSetup& setup, const RealSpatialFunction& c1,
                                       const RealSpatialFunction& c2);

struct CoefficientReport {
    std::vector<CoefficientEntry> entries;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    int finite = 0;
    int excluded = 0;
};

// c_j = 1 + amplitude * s_j with s_j random band-limited, |s_j|_{L^2} = 1.
CoefficientReport coefficient_sweep(const ReductionSetup& setup, int count, int band, double amplitude,
                                    std::uint64_t seed);

}  // namespace carlab
