#pragma once

#include <cstdint>

#include "carlab/coefficients.hpp"
#include "carlab/differences.hpp"
#include "carlab/grid_function.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <vector>

namespace carlab {

enum class Direction { forward, backward };

// Fills out[k] with the source at every node for time t.
using SourceField = std::function<void(double t, SpatialField& out)>;

/// Spatial part L u = div(a grad u) - b.grad u - c u at time t, as a square
/// matrix over all nodes. Boundary rows are zero.
CSparseMatrix assemble_spatial_operator(const CoefficientModel& model, const SpaceTimeGrid& grid,
                                        double t);

// Crank-Nicolson stepper for i u_t = L u + g. Step j advances level j to j+1
// with L evaluated at t_{j+1/2}. Factorizations are cached; a single factor
// serves every step when the operator does not depend on t.
class CrankNicolson {
public:
    explicit CrankNicolson(const CoefficientSet& coeffs);

    const SpaceTimeGrid& grid() const { return coeffs_.grid(); }
    const CoefficientSet& coeffs() const { return coeffs_; }
    Index unknowns() const { return static_cast<Index>(coeffs_.grid().interior().size()); }

    struct Step {
        CSparseMatrix A;    // I + i dt/2 L_II
        CSparseMatrix B;    // I - i dt/2 L_II
        CSparseMatrix Lib;  // L restricted to interior rows, boundary columns
        std::shared_ptr<Eigen::SparseLU<CSparseMatrix>> lu_A;
        std::shared_ptr<Eigen::SparseLU<CSparseMatrix>> lu_B;
    };

    const Step& step(int j, bool need_B_factor = false) const;

    // Full-node vector <-> interior unknowns
    Eigen::VectorXcd restrict(const SpatialField& full) const;
    void prolong(const Eigen::VectorXcd& inner, SpatialField& full) const;

private:
    const CoefficientSet& coeffs_;
    std::vector<Index> boundary_;
    std::vector<Index> interior_;
    mutable std::vector<std::shared_ptr<Step>> cache_;
};

ComplexGridFunction solve_ivp_field(const CoefficientSet& coeffs, const SourceField& g,
                                    const SpatialField& u0, Direction direction = Direction::forward,
                                    const SpaceTimeFunction& boundary = nullptr);

/// Source and optional Dirichlet data given analytically. With
/// direction = backward, u0 is the state at t = T.
ComplexGridFunction solve_ivp(const CoefficientSet& coeffs, const SpaceTimeFunction& g,
                              const SpatialField& u0, Direction direction = Direction::forward,
                              const SpaceTimeFunction& boundary = nullptr);

/// Discrete P u = i u_t - div(a grad u) + b.grad u + c u with a centered time
/// difference; nonzero only on interior nodes of levels 1..n_t-1.
ComplexGridFunction apply_operator(const CoefficientSet& coeffs, const ComplexGridFunction& u);

struct AnalyticSolution {
    SpaceTimeFunction value;
    SpaceTimeFunction dt;
    std::function<Eigen::Vector2cd(double, const Vec2&)> grad;
    std::function<Eigen::Matrix2cd(double, const Vec2&)> hess;
};

/// g = P u_exact evaluated analytically.
SpaceTimeFunction manufactured_source(std::shared_ptr<const CoefficientModel> model,
                                      const AnalyticSolution& u);

enum class TraceKind { neumann, neumann_dt };

// Rows: levels first_level..n_t, columns: face nodes in face_nodes() order.
struct BoundaryTrace {
    Face face = Face::x_hi;
    TraceKind kind = TraceKind::neumann;
    int first_level = 1;
    Eigen::MatrixXcd values;
};

BoundaryTrace neumann_trace(const ComplexGridFunction& u, Face face, int order_dt);

// Final state plus both trace kinds for every observed face.
struct Observation {
    SpatialField final_state;
    std::vector<BoundaryTrace> traces;
};

Observation observe(const ComplexGridFunction& u);

// Data-space geometry: H^3 Gram on the final state, trapezoid L^2 on traces.
class DataMetric {
public:
    explicit DataMetric(const SpaceTimeGrid& grid);
    double inner(const Observation& a, const Observation& b) const;
    double norm(const Observation& a) const;
    int channels(const Observation& a) const { return 1 + static_cast<int>(a.traces.size()); }
    double channel_norm(const Observation& a, int channel) const;
    double h3_norm(const SpatialField& v) const;
    /// Sum over traces of kind k of the L^2(Sigma_0) norm, summed over k.
    double boundary_terms(const Observation& a) const;
    const SparseMatrix& gram() const { return gram_; }
    const SpaceTimeGrid& grid() const { return grid_; }

private:
    double trace_inner(const BoundaryTrace& a, const BoundaryTrace& b) const;
    SpaceTimeGrid grid_;
    SparseMatrix gram_;
    RealField tw_;
};

Observation zero_like(const Observation& o);
Observation axpy(double alpha, const Observation& x, const Observation& y);  // alpha*x + y

// Linear map f -> observation of the solution with source R f, u(0) = 0 and
// homogeneous Dirichlet data, together with its exact discrete adjoint in
// the trapezoid L^2(Omega) inner product.
class SourceToData {
public:
    explicit SourceToData(const CoefficientSet& coeffs);

    Observation apply(const RealField& f) const;
    RealField adjoint(const Observation& r) const;
    const DataMetric& metric() const { return metric_; }
    const RealField& weights() const { return w_; }
    const CoefficientSet& coeffs() const { return coeffs_; }
    ComplexGridFunction solve(const RealField& f) const;

private:
    const CoefficientSet& coeffs_;
    CrankNicolson cn_;
    DataMetric metric_;
    RealField w_;
    Eigen::MatrixXcd r_half_;  // R at (node, t_{j+1/2})
};

RealField adjoint_apply(const CoefficientSet& coeffs, const Observation& residual);

/// Worst |<F f, r>_W - <f, F* r>| / |<F f, r>_W| over random interior f and
/// random complex r.
double adjoint_mismatch(const CoefficientSet& coeffs, int trials, std::uint64_t seed);

/// Largest per-step relative change of the L^2 norm for a homogeneous run
/// from random interior data.
double norm_drift(const CoefficientSet& coeffs, std::uint64_t seed);

}  // namespace carlab
