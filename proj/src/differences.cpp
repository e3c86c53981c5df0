#include "carlab/differences.hpp"

#include <cmath>
#include <stdexcept>

namespace carlab {

Eigen::MatrixXd fornberg_weights(double z, const std::vector<double>& nodes, int m) {
    const int n = static_cast<int>(nodes.size()) - 1;
    if (n < m) throw std::invalid_argument("not enough nodes for derivative order");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, m + 1);
    double c1 = 1.0;
    double c4 = nodes[0] - z;
    c(0, 0) = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
                c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
            c(j, 0) = c4 * c(j, 0) / c3;
        }
        c1 = c2;
    }
    return c;
}

SparseMatrix derivative_matrix_1d(int n, double h, int order) {
    if (order < 0 || order > 3) throw std::invalid_argument("derivative order must be 0..3");
    if (n < order + 2) throw std::invalid_argument("grid too coarse for requested derivative");
    SparseMatrix D(n + 1, n + 1);
    if (order == 0) {
        D.setIdentity();
        return D;
    }
    std::vector<Eigen::Triplet<double>> trip;
    const int half = order == 3 ? 2 : 1;
    const int width = order + 2;  // one-sided stencil size
    const double scale = std::pow(h, -order);
    for (int i = 0; i <= n; ++i) {
        int first, count;
        if (i - half >= 0 && i + half <= n) {
            first = i - half;
            count = 2 * half + 1;
        } else if (i - half < 0) {
            first = 0;
            count = width;
        } else {
            first = n - width + 1;
            count = width;
        }
        std::vector<double> nodes;
        for (int s = 0; s < count; ++s) nodes.push_back(static_cast<double>(first + s - i));
        Eigen::MatrixXd w = fornberg_weights(0.0, nodes, order);
        for (int s = 0; s < count; ++s) {
            const double v = w(s, order);
            if (v != 0.0) trip.emplace_back(i, first + s, v * scale);
        }
    }
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

namespace {

SparseMatrix kron(const SparseMatrix& A, const SparseMatrix& B) {
    SparseMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
    std::vector<Eigen::Triplet<double>> trip;
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SparseMatrix::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SparseMatrix::InnerIterator ib(B, kb); ib; ++ib)
                    trip.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                                      ia.value() * ib.value());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

}  // namespace

SpatialDifferences::SpatialDifferences(const SpaceTimeGrid& grid) : dim_(grid.dim()), n_(grid.n_x()) {
    for (int o = 0; o <= 3; ++o) {
        axis_x_.push_back(derivative_matrix_1d(n_, grid.h(0), o));
        if (dim_ == 2) axis_y_.push_back(derivative_matrix_1d(n_, grid.h(1), o));
    }
    first_[0] = D(1, 0);
    if (dim_ == 2) first_[1] = D(0, 1);
}

SparseMatrix SpatialDifferences::D(int ox, int oy) const {
    if (ox < 0 || ox > 3 || oy < 0 || oy > 3) throw std::invalid_argument("derivative order must be 0..3");
    if (dim_ == 1) {
        if (oy != 0) throw std::invalid_argument("y derivative requested in 1D");
        return axis_x_[ox];
    }
    // node k = i + j*(n+1): x index varies fastest
    return kron(axis_y_[oy], axis_x_[ox]);
}

RealField spatial_weights(const SpaceTimeGrid& grid) {
    const int m = grid.nodes_per_axis();
    auto axis = [&](int a) {
        RealField w = RealField::Constant(m, grid.h(a));
        w[0] *= 0.5;
        w[m - 1] *= 0.5;
        return w;
    };
    RealField wx = axis(0);
    if (grid.dim() == 1) return wx;
    RealField wy = axis(1);
    RealField w(grid.node_count());
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) w[grid.index(i, j)] = wx[i] * wy[j];
    return w;
}

RealField face_weights(const SpaceTimeGrid& grid, Face f) {
    if (!grid.domain().has_face(f)) throw std::invalid_argument("face not on boundary");
    if (grid.dim() == 1) return RealField::Ones(1);
    const int axis = (f == Face::x_lo || f == Face::x_hi) ? 1 : 0;
    const int m = grid.nodes_per_axis();
    RealField w = RealField::Constant(m, grid.h(axis));
    w[0] *= 0.5;
    w[m - 1] *= 0.5;
    return w;
}

RealField time_weights(const SpaceTimeGrid& grid, int first) {
    const int n = grid.n_t();
    if (first < 0 || first >= n) throw std::invalid_argument("bad first level for time weights");
    RealField w = RealField::Constant(n - first + 1, grid.dt());
    w[0] *= 0.5;
    w[n - first] *= 0.5;
    return w;
}

SparseMatrix h3_gram(const SpaceTimeGrid& grid) {
    if (grid.n_x() < 8) throw std::invalid_argument("grid too coarse for third differences");
    SpatialDifferences sd(grid);
    const RealField w = spatial_weights(grid);
    SparseMatrix M(grid.node_count(), grid.node_count());
    for (int ox = 0; ox <= 3; ++ox) {
        for (int oy = 0; oy + ox <= 3; ++oy) {
            if (grid.dim() == 1 && oy > 0) break;
            SparseMatrix D = sd.D(ox, oy);
            SparseMatrix WD = w.asDiagonal() * D;
            M += SparseMatrix(D.transpose() * WD);
        }
    }
    M.makeCompressed();
    return M;
}

double l2_norm(const SpaceTimeGrid& grid, const SpatialField& v) {
    if (v.size() != grid.node_count()) throw std::invalid_argument("field size does not match grid");
    return std::sqrt((spatial_weights(grid).array() * v.array().abs2()).sum());
}

}  // namespace carlab
