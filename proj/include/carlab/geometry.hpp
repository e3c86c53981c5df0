#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace carlab {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using CVec2 = Eigen::Vector2cd;
using RealField = Eigen::VectorXd;
using SpatialField = Eigen::VectorXcd;

// Faces of an interval or rectangle. In 1D only x_lo/x_hi exist and are
// spelled "left"/"right" in configs and reports.
enum class Face { x_lo, x_hi, y_lo, y_hi };

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
};

class SpatialDomain {
public:
    SpatialDomain(std::vector<Interval> bounds, std::vector<Face> observed);

    static SpatialDomain unit_interval(std::vector<Face> observed = {Face::x_hi});
    static SpatialDomain unit_square(std::vector<Face> observed = {Face::x_hi, Face::y_hi});

    int dim() const { return static_cast<int>(bounds_.size()); }
    const Interval& bounds(int axis) const { return bounds_.at(axis); }
    const std::vector<Interval>& bounds() const { return bounds_; }
    std::vector<Face> faces() const;
    const std::vector<Face>& observed() const { return observed_; }
    std::vector<Face> unobserved() const;
    bool has_face(Face f) const;
    bool is_observed(Face f) const;
    double diameter() const;

private:
    std::vector<Interval> bounds_;
    std::vector<Face> observed_;
};

std::string face_name(Face f, int dim);
Face parse_face(std::string_view name, int dim);

/// Constant outward unit normal of a face (second component 0 in 1D).
Vec2 outward_normal(const SpatialDomain& domain, Face f);

// Uniform tensor grid. n_x counts intervals per axis, so each axis carries
// n_x + 1 nodes including both boundary nodes. Node k = i + j*(n_x+1).
class SpaceTimeGrid {
public:
    SpaceTimeGrid(SpatialDomain domain, int n_x, int n_t, double T);

    const SpatialDomain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    int n_x() const { return n_x_; }
    int n_t() const { return n_t_; }
    double T() const { return T_; }
    double dt() const { return T_ / n_t_; }
    double t_floor() const { return dt(); }
    double h(int axis) const { return domain_.bounds(axis).length() / n_x_; }

    int nodes_per_axis() const { return n_x_ + 1; }
    Index node_count() const { return node_count_; }
    double time(int level) const;
    double coordinate(int axis, int i) const;
    Index index(int i, int j = 0) const { return i + static_cast<Index>(j) * (n_x_ + 1); }
    std::array<int, 2> multi_index(Index k) const;
    Vec2 node(Index k) const;
    bool is_boundary(Index k) const;
    bool on_face(Index k, Face f) const;
    const std::vector<Index>& interior() const { return interior_; }
    const std::vector<Index>& boundary() const { return boundary_; }
    std::vector<Index> face_nodes(Face f) const;

private:
    SpatialDomain domain_;
    int n_x_;
    int n_t_;
    double T_;
    Index node_count_;
    std::vector<Index> interior_;
    std::vector<Index> boundary_;
};

SpaceTimeGrid build_grid(const SpatialDomain& domain, int n_x, int n_t, double T);

}  // namespace carlab
