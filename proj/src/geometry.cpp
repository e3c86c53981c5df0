#include "carlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace carlab {

namespace {

bool face_exists(Face f, int dim) {
    return dim == 2 || f == Face::x_lo || f == Face::x_hi;
}

}  // namespace

SpatialDomain::SpatialDomain(std::vector<Interval> bounds, std::vector<Face> observed)
    : bounds_(std::move(bounds)), observed_(std::move(observed)) {
    if (bounds_.size() != 1 && bounds_.size() != 2)
        throw std::invalid_argument("domain dimension must be 1 or 2");
    for (const auto& b : bounds_) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi))
            throw std::invalid_argument("degenerate domain bounds");
    }
    if (observed_.empty())
        throw std::invalid_argument("observed boundary part must be nonempty");
    std::sort(observed_.begin(), observed_.end());
    observed_.erase(std::unique(observed_.begin(), observed_.end()), observed_.end());
    for (Face f : observed_) {
        if (!face_exists(f, dim())) throw std::invalid_argument("observed face not on domain");
    }
}

SpatialDomain SpatialDomain::unit_interval(std::vector<Face> observed) {
    return SpatialDomain({{0.0, 1.0}}, std::move(observed));
}

SpatialDomain SpatialDomain::unit_square(std::vector<Face> observed) {
    return SpatialDomain({{0.0, 1.0}, {0.0, 1.0}}, std::move(observed));
}

std::vector<Face> SpatialDomain::faces() const {
    if (dim() == 1) return {Face::x_lo, Face::x_hi};
    return {Face::x_lo, Face::x_hi, Face::y_lo, Face::y_hi};
}

std::vector<Face> SpatialDomain::unobserved() const {
    std::vector<Face> out;
    for (Face f : faces())
        if (!is_observed(f)) out.push_back(f);
    return out;
}

bool SpatialDomain::has_face(Face f) const { return face_exists(f, dim()); }

bool SpatialDomain::is_observed(Face f) const {
    return std::find(observed_.begin(), observed_.end(), f) != observed_.end();
}

double SpatialDomain::diameter() const {
    double s = 0.0;
    for (const auto& b : bounds_) s += b.length() * b.length();
    return std::sqrt(s);
}

std::string face_name(Face f, int dim) {
    if (dim == 1) {
        if (f == Face::x_lo) return "left";
        if (f == Face::x_hi) return "right";
        throw std::invalid_argument("face not defined in 1D");
    }
    switch (f) {
        case Face::x_lo: return "x_lo";
        case Face::x_hi: return "x_hi";
        case Face::y_lo: return "y_lo";
        case Face::y_hi: return "y_hi";
    }
    throw std::invalid_argument("unknown face");
}

Face parse_face(std::string_view name, int dim) {
    if (dim == 1) {
        if (name == "left" || name == "x_lo") return Face::x_lo;
        if (name == "right" || name == "x_hi") return Face::x_hi;
    } else {
        if (name == "x_lo") return Face::x_lo;
        if (name == "x_hi") return Face::x_hi;
        if (name == "y_lo") return Face::y_lo;
        if (name == "y_hi") return Face::y_hi;
    }
    throw std::invalid_argument("unknown face '" + std::string(name) + "'");
}

Vec2 outward_normal(const SpatialDomain& domain, Face f) {
    if (!domain.has_face(f)) throw std::invalid_argument("face does not belong to domain");
    switch (f) {
        case Face::x_lo: return {-1.0, 0.0};
        case Face::x_hi: return {1.0, 0.0};
        case Face::y_lo: return {0.0, -1.0};
        case Face::y_hi: return {0.0, 1.0};
    }
    throw std::invalid_argument("unknown face");
}

SpaceTimeGrid::SpaceTimeGrid(SpatialDomain domain, int n_x, int n_t, double T)
    : domain_(std::move(domain)), n_x_(n_x), n_t_(n_t), T_(T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("final time must be positive");
    if (n_x < 8) throw std::invalid_argument("n_x must be at least 8");
    if (n_t < 8) throw std::invalid_argument("n_t must be at least 8");
    node_count_ = 1;
    for (int d = 0; d < dim(); ++d) node_count_ *= (n_x_ + 1);
    for (Index k = 0; k < node_count_; ++k) {
        if (is_boundary(k))
            boundary_.push_back(k);
        else
            interior_.push_back(k);
    }
}

double SpaceTimeGrid::time(int level) const {
    if (level < 0 || level > n_t_) throw std::out_of_range("time level out of range");
    return T_ * (static_cast<double>(level) / n_t_);
}

double SpaceTimeGrid::coordinate(int axis, int i) const {
    const auto& b = domain_.bounds(axis);
    if (i == n_x_) return b.hi;
    return b.lo + b.length() * (static_cast<double>(i) / n_x_);
}

std::array<int, 2> SpaceTimeGrid::multi_index(Index k) const {
    const int m = n_x_ + 1;
    if (dim() == 1) return {static_cast<int>(k), 0};
    return {static_cast<int>(k % m), static_cast<int>(k / m)};
}

Vec2 SpaceTimeGrid::node(Index k) const {
    auto ij = multi_index(k);
    Vec2 p(coordinate(0, ij[0]), 0.0);
    if (dim() == 2) p[1] = coordinate(1, ij[1]);
    return p;
}

bool SpaceTimeGrid::on_face(Index k, Face f) const {
    auto ij = multi_index(k);
    switch (f) {
        case Face::x_lo: return ij[0] == 0;
        case Face::x_hi: return ij[0] == n_x_;
        case Face::y_lo: return dim() == 2 && ij[1] == 0;
        case Face::y_hi: return dim() == 2 && ij[1] == n_x_;
    }
    return false;
}

bool SpaceTimeGrid::is_boundary(Index k) const {
    for (Face f : domain_.faces())
        if (on_face(k, f)) return true;
    return false;
}

std::vector<Index> SpaceTimeGrid::face_nodes(Face f) const {
    if (!domain_.has_face(f)) throw std::invalid_argument("face not on boundary of domain");
    std::vector<Index> out;
    if (dim() == 1) {
        out.push_back(f == Face::x_lo ? 0 : n_x_);
        return out;
    }
    for (int s = 0; s <= n_x_; ++s) {
        switch (f) {
            case Face::x_lo: out.push_back(index(0, s)); break;
            case Face::x_hi: out.push_back(index(n_x_, s)); break;
            case Face::y_lo: out.push_back(index(s, 0)); break;
            case Face::y_hi: out.push_back(index(s, n_x_)); break;
        }
    }
    return out;
}

SpaceTimeGrid build_grid(const SpatialDomain& domain, int n_x, int n_t, double T) {
    return SpaceTimeGrid(domain, n_x, n_t, T);
}

}  // namespace carlab
