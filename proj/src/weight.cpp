#include "carlab/weight.hpp"

#include <cmath>
#include <stdexcept>

namespace carlab {

WeightFunctionPsi WeightFunctionPsi::quadratic(int dim, Vec2 center, double scale) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("psi dimension must be 1 or 2");
    if (!(scale > 0.0)) throw std::invalid_argument("psi scale must be positive");
    WeightFunctionPsi p;
    p.kind_ = "quadratic";
    p.dim_ = dim;
    p.center_ = center;
    if (dim == 1) p.center_[1] = 0.0;
    p.scale_ = scale;
    return p;
}

WeightFunctionPsi WeightFunctionPsi::linear(int dim, Vec2 direction, double offset) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("psi dimension must be 1 or 2");
    WeightFunctionPsi p;
    p.kind_ = "linear";
    p.dim_ = dim;
    p.direction_ = direction;
    if (dim == 1) p.direction_[1] = 0.0;
    if (p.direction_.norm() == 0.0) throw std::invalid_argument("linear psi needs nonzero direction");
    p.offset_ = offset;
    return p;
}

PsiJet WeightFunctionPsi::jet(const Vec2& x) const {
    PsiJet j;
    if (kind_ == "quadratic") {
        Vec2 d = x - center_;
        if (dim_ == 1) d[1] = 0.0;
        j.value = scale_ * d.squaredNorm();
        j.grad = 2.0 * scale_ * d;
        for (int k = 0; k < dim_; ++k) j.hess(k, k) = 2.0 * scale_;
    } else {
        j.value = direction_.dot(x) + offset_;
        if (dim_ == 1) j.value = direction_[0] * x[0] + offset_;
        j.grad = direction_;
    }
    return j;
}

double WeightFunctionPsi::sup_norm(const SpaceTimeGrid& grid) const {
    double m = 0.0;
    for (Index k = 0; k < grid.node_count(); ++k) m = std::max(m, std::abs(value(grid.node(k))));
    return m;
}

void WeightFunctionPsi::require_nondegenerate(const SpaceTimeGrid& grid) const {
    if (grid.dim() != dim_) throw std::invalid_argument("psi and grid dimensions differ");
    for (Index k = 0; k < grid.node_count(); ++k) {
        if (jet(grid.node(k)).grad.norm() == 0.0)
            throw std::domain_error("grad psi vanishes at node " + std::to_string(k));
    }
}

}  // namespace carlab
