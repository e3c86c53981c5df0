#pragma once

#include "carlab/geometry.hpp"

#include <string>

namespace carlab {

struct PsiJet {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
};

// Analytic weight psi. Two families:
//   quadratic: psi = scale * |x - center|^2
//   linear:    psi = direction . x + offset
class WeightFunctionPsi {
public:
    static WeightFunctionPsi quadratic(int dim, Vec2 center, double scale = 1.0);
    static WeightFunctionPsi linear(int dim, Vec2 direction, double offset = 0.0);

    int dim() const { return dim_; }
    const std::string& kind() const { return kind_; }
    const Vec2& center() const { return center_; }
    const Vec2& direction() const { return direction_; }
    double scale() const { return scale_; }
    double offset() const { return offset_; }

    PsiJet jet(const Vec2& x) const;
    double value(const Vec2& x) const { return jet(x).value; }

    /// max |psi| over the grid nodes
    double sup_norm(const SpaceTimeGrid& grid) const;

    // Throws std::domain_error if grad psi vanishes at a node.
    void require_nondegenerate(const SpaceTimeGrid& grid) const;

private:
    std::string kind_;
    int dim_ = 1;
    Vec2 center_ = Vec2::Zero();
    Vec2 direction_ = Vec2::Zero();
    double scale_ = 1.0;
    double offset_ = 0.0;
};

}  // namespace carlab
