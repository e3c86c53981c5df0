#include "carlab/grid_function.hpp"
#include "carlab/report_io.hpp"

#include <stdexcept>

namespace carlab {

ComplexGridFunction::ComplexGridFunction(const SpaceTimeGrid& grid)
    : grid_(grid), values_(Eigen::MatrixXcd::Zero(grid.node_count(), grid.n_t() + 1)) {}

ComplexGridFunction::ComplexGridFunction(const SpaceTimeGrid& grid, Eigen::MatrixXcd values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != grid_.node_count() || values_.cols() != grid_.n_t() + 1)
        throw std::invalid_argument("grid function shape does not match grid");
}

ComplexGridFunction ComplexGridFunction::sample(const SpaceTimeGrid& grid, const SpaceTimeFunction& fn) {
    ComplexGridFunction u(grid);
    for (int j = 0; j <= grid.n_t(); ++j) {
        const double t = grid.time(j);
        for (Index k = 0; k < grid.node_count(); ++k) u(k, j) = fn(t, grid.node(k));
    }
    return u;
}

double ComplexGridFunction::boundary_max() const {
    double m = 0.0;
    for (Index k : grid_.boundary()) m = std::max(m, values_.row(k).cwiseAbs().maxCoeff());
    return m;
}

ComplexGridFunction& ComplexGridFunction::operator*=(Complex s) {
    values_ *= s;
    return *this;
}

ComplexGridFunction& ComplexGridFunction::operator+=(const ComplexGridFunction& o) {
    if (o.values_.rows() != values_.rows() || o.values_.cols() != values_.cols())
        throw std::invalid_argument("grid function shapes differ");
    values_ += o.values_;
    return *this;
}

ComplexGridFunction& ComplexGridFunction::operator-=(const ComplexGridFunction& o) {
    if (o.values_.rows() != values_.rows() || o.values_.cols() != values_.cols())
        throw std::invalid_argument("grid function shapes differ");
    values_ -= o.values_;
    return *this;
}

ComplexGridFunction operator-(ComplexGridFunction a, const ComplexGridFunction& b) { return a -= b; }
ComplexGridFunction operator+(ComplexGridFunction a, const ComplexGridFunction& b) { return a += b; }
ComplexGridFunction operator*(Complex s, ComplexGridFunction a) { return a *= s; }

SpatialField sample_space(const SpaceTimeGrid& grid, const std::function<Complex(const Vec2&)>& fn) {
    SpatialField v(grid.node_count());
    for (Index k = 0; k < grid.node_count(); ++k) v[k] = fn(grid.node(k));
    return v;
}

void write_csv(std::ostream& os, const ComplexGridFunction& u) {
    const auto& g = u.grid();
    os << (g.dim() == 1 ? "t,x,re,im\n" : "t,x,y,re,im\n");
    for (int j = 0; j <= g.n_t(); ++j) {
        for (Index k = 0; k < g.node_count(); ++k) {
            const Vec2 p = g.node(k);
            os << fmt17(g.time(j)) << ',' << fmt17(p[0]);
            if (g.dim() == 2) os << ',' << fmt17(p[1]);
            os << ',' << fmt17(u(k, j).real()) << ',' << fmt17(u(k, j).imag()) << '\n';
        }
    }
}

}  // namespace carlab
