#pragma once

#include "carlab/geometry.hpp"

#include <functional>
#include <ostream>

namespace carlab {

using SpaceTimeFunction = std::function<Complex(double t, const Vec2& x)>;

// Complex values on every (node, level) of a grid. Column j holds level j.
class ComplexGridFunction {
public:
    explicit ComplexGridFunction(const SpaceTimeGrid& grid);
    ComplexGridFunction(const SpaceTimeGrid& grid, Eigen::MatrixXcd values);

    static ComplexGridFunction sample(const SpaceTimeGrid& grid, const SpaceTimeFunction& fn);

    const SpaceTimeGrid& grid() const { return grid_; }
    Eigen::MatrixXcd& values() { return values_; }
    const Eigen::MatrixXcd& values() const { return values_; }
    auto level(int j) { return values_.col(j); }
    auto level(int j) const { return values_.col(j); }
    Complex& operator()(Index node, int level) { return values_(node, level); }
    Complex operator()(Index node, int level) const { return values_(node, level); }

    /// max |u| over boundary nodes and all levels
    double boundary_max() const;

    ComplexGridFunction& operator*=(Complex s);
    ComplexGridFunction& operator+=(const ComplexGridFunction& o);
    ComplexGridFunction& operator-=(const ComplexGridFunction& o);

private:
    SpaceTimeGrid grid_;
    Eigen::MatrixXcd values_;
};

ComplexGridFunction operator-(ComplexGridFunction a, const ComplexGridFunction& b);
ComplexGridFunction operator+(ComplexGridFunction a, const ComplexGridFunction& b);
ComplexGridFunction operator*(Complex s, ComplexGridFunction a);

SpatialField sample_space(const SpaceTimeGrid& grid, const std::function<Complex(const Vec2&)>& fn);

/// CSV with columns t, x[, y], re, im
void write_csv(std::ostream& os, const ComplexGridFunction& u);

}  // namespace carlab
