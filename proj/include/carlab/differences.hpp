#pragma once

#include "carlab/geometry.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace carlab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using CSparseMatrix = Eigen::SparseMatrix<Complex>;

/// Fornberg weights for derivatives 0..m at z from the given nodes.
/// Result(i, k) is the weight of node i for the k-th derivative.
Eigen::MatrixXd fornberg_weights(double z, const std::vector<double>& nodes, int m);

/// Second-order accurate order-th derivative on n+1 uniform nodes with
/// spacing h: centered stencils inside, one-sided ones near the ends.
SparseMatrix derivative_matrix_1d(int n, double h, int order);

// Spatial difference operators on the grid's node set. D(ox, oy) applies
// d^ox/dx^ox d^oy/dy^oy (oy must be 0 in 1D).
class SpatialDifferences {
public:
    explicit SpatialDifferences(const SpaceTimeGrid& grid);

    SparseMatrix D(int ox, int oy = 0) const;
    const SparseMatrix& dx(int axis) const { return first_[axis]; }
    int dim() const { return dim_; }

private:
    int dim_;
    int n_;
    std::vector<SparseMatrix> axis_x_;  // orders 0..3 along x
    std::vector<SparseMatrix> axis_y_;  // orders 0..3 along y
    std::array<SparseMatrix, 2> first_;
};

/// Trapezoid weights over the closed spatial domain.
RealField spatial_weights(const SpaceTimeGrid& grid);

/// Trapezoid weights along a face (1 in 1D).
RealField face_weights(const SpaceTimeGrid& grid, Face f);

/// Trapezoid weights for levels first..n_t (index 0 corresponds to level first).
RealField time_weights(const SpaceTimeGrid& grid, int first);

/// Gram matrix of the discrete H^3 inner product: sum over |alpha| <= 3 of
/// D_alpha^T W D_alpha.
SparseMatrix h3_gram(const SpaceTimeGrid& grid);

double l2_norm(const SpaceTimeGrid& grid, const SpatialField& v);

}  // namespace carlab
