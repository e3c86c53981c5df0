#include "carlab/coefficients.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace carlab {

namespace {

using std::numbers::pi;

enum class SourceKind { one, exp_it, linear_x, modulated };

SourceKind parse_source(const std::string& s) {
    if (s == "one") return SourceKind::one;
    if (s == "exp_it") return SourceKind::exp_it;
    if (s == "linear_x") return SourceKind::linear_x;
    if (s == "modulated") return SourceKind::modulated;
    throw std::invalid_argument("unknown R preset '" + s + "'");
}

class AnalyticModel final : public CoefficientModel {
public:
    AnalyticModel(const CoefficientSpec& spec, const SpatialDomain& domain)
        : spec_(spec), dim_(domain.dim()), source_(parse_source(spec.R)) {
        for (int k = 0; k < dim_; ++k) {
            lo_[k] = domain.bounds(k).lo;
            len_[k] = domain.bounds(k).length();
        }
        if (dim_ == 2 && spec.offdiag[0] != spec.offdiag[1])
            throw std::invalid_argument("coefficient matrix spec is not symmetric");
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(spec.diag[0]) || !finite(spec.diag[1]) || !finite(spec.linear) ||
            !finite(spec.quadratic) || !finite(spec.time) || !finite(spec.cross) ||
            !finite(spec.c_sine) || !finite(spec.c0.real()) || !finite(spec.c0.imag()))
            throw std::invalid_argument("non-finite coefficient parameter");
    }

    int dim() const override { return dim_; }
    bool time_dependent() const override { return spec_.time != 0.0; }

    CoefficientSample eval(double t, const Vec2& x) const override {
        CoefficientSample s;
        for (int k = 0; k < dim_; ++k) {
            s.a(k, k) = spec_.diag[k] + spec_.linear * x[k] + spec_.quadratic * x[k] * x[k] +
                        spec_.time * t;
            s.a_t(k, k) = spec_.time;
            s.a_x[k](k, k) = spec_.linear + 2.0 * spec_.quadratic * x[k];
            s.a_xx[k][k](k, k) = 2.0 * spec_.quadratic;
        }
        if (dim_ == 2) {
            const double xy = spec_.cross * x[0] * x[1];
            s.a(0, 1) = spec_.offdiag[0] + xy;
            s.a(1, 0) = spec_.offdiag[1] + xy;
            s.a_x[0](0, 1) = s.a_x[0](1, 0) = spec_.cross * x[1];
            s.a_x[1](0, 1) = s.a_x[1](1, 0) = spec_.cross * x[0];
            s.a_xx[0][1](0, 1) = s.a_xx[0][1](1, 0) = spec_.cross;
            s.a_xx[1][0](0, 1) = s.a_xx[1][0](1, 0) = spec_.cross;
        }
        for (int k = 0; k < dim_; ++k) s.b[k] = spec_.b[k];

        double bump = 1.0;
        for (int k = 0; k < dim_; ++k) bump *= std::sin(pi * (x[k] - lo_[k]) / len_[k]);
        s.c = spec_.c0 + spec_.c_sine * bump;

        const Complex I(0.0, 1.0);
        switch (source_) {
            case SourceKind::one:
                s.R = 1.0;
                break;
            case SourceKind::exp_it:
                s.R = std::exp(I * t);
                s.R_t = I * s.R;
                break;
            case SourceKind::linear_x:
                s.R = x[0];
                s.R_x[0] = 1.0;
                break;
            case SourceKind::modulated: {
                const Complex e = std::exp(I * t);
                s.R = (1.0 + 0.5 * x[0]) * e;
                s.R_t = I * s.R;
                s.R_x[0] = 0.5 * e;
                break;
            }
        }
        return s;
    }

private:
    CoefficientSpec spec_;
    int dim_;
    SourceKind source_;
    std::array<double, 2> lo_{0.0, 0.0};
    std::array<double, 2> len_{1.0, 1.0};
};

class PotentialOverride final : public CoefficientModel {
public:
    PotentialOverride(std::shared_ptr<const CoefficientModel> base,
                      std::function<double(const Vec2&)> c)
        : base_(std::move(base)), c_(std::move(c)) {
        if (!base_ || !c_) throw std::invalid_argument("null model or potential");
    }
    int dim() const override { return base_->dim(); }
    bool time_dependent() const override { return base_->time_dependent(); }
    CoefficientSample eval(double t, const Vec2& x) const override {
        CoefficientSample s = base_->eval(t, x);
        s.c = c_(x);
        return s;
    }

private:
    std::shared_ptr<const CoefficientModel> base_;
    std::function<double(const Vec2&)> c_;
};

bool finite_sample(const CoefficientSample& s) {
    return s.a.allFinite() && std::isfinite(s.c.real()) && std::isfinite(s.c.imag()) &&
           std::isfinite(s.R.real()) && std::isfinite(s.R.imag()) &&
           std::isfinite(std::abs(s.b[0])) && std::isfinite(std::abs(s.b[1]));
}

}  // namespace

std::shared_ptr<const CoefficientModel> make_coefficients(const CoefficientSpec& spec,
                                                          const SpatialDomain& domain) {
    return std::make_shared<AnalyticModel>(spec, domain);
}

std::shared_ptr<const CoefficientModel> with_potential(
    std::shared_ptr<const CoefficientModel> base, std::function<double(const Vec2&)> c) {
    return std::make_shared<PotentialOverride>(std::move(base), std::move(c));
}

CoefficientSet::CoefficientSet(std::shared_ptr<const CoefficientModel> model, SpaceTimeGrid grid)
    : model_(std::move(model)), grid_(std::move(grid)) {
    if (!model_) throw std::invalid_argument("null coefficient model");
    if (model_->dim() != grid_.dim())
        throw std::invalid_argument("coefficient model and grid dimensions differ");
    const int d = grid_.dim();
    const Index nn = grid_.node_count();
    const int levels = grid_.n_t() + 1;
    for (int l = 0; l < d; ++l) {
        for (int j = 0; j < d; ++j) a_[l][j].resize(nn, levels);
        b_[l].resize(nn, levels);
    }
    c_.resize(nn, levels);
    R_.resize(nn, levels);

    AssumptionReport& rep = report_;
    rep.symmetry.value = 0.0;
    rep.ellipticity.value = std::numeric_limits<double>::infinity();
    rep.final_source.value = std::numeric_limits<double>::infinity();

    for (int lev = 0; lev < levels; ++lev) {
        const double t = grid_.time(lev);
        for (Index k = 0; k < nn; ++k) {
            const CoefficientSample s = model_->eval(t, grid_.node(k));
            if (!finite_sample(s))
                throw std::domain_error("coefficient evaluation undefined at level " +
                                        std::to_string(lev) + ", node " + std::to_string(k));
            for (int l = 0; l < d; ++l) {
                for (int j = 0; j < d; ++j) a_[l][j](k, lev) = s.a(l, j);
                b_[l](k, lev) = s.b[l];
            }
            c_(k, lev) = s.c;
            R_(k, lev) = s.R;

            const double defect = d == 2 ? std::abs(s.a(0, 1) - s.a(1, 0)) : 0.0;
            if (defect > rep.symmetry.value) {
                rep.symmetry.value = defect;
                rep.symmetry.level = lev;
                rep.symmetry.node = k;
            }
            double lam_min;
            Vec2 vec(1.0, 0.0);
            if (d == 1) {
                lam_min = s.a(0, 0);
            } else {
                Mat2 sym = 0.5 * (s.a + s.a.transpose());
                Eigen::SelfAdjointEigenSolver<Mat2> es(sym);
                lam_min = es.eigenvalues()[0];
                vec = es.eigenvectors().col(0);
                // fix sign for reproducible witnesses
                if (vec[0] < 0.0 || (vec[0] == 0.0 && vec[1] < 0.0)) vec = -vec;
            }
            if (lam_min < rep.ellipticity.value) {
                rep.ellipticity.value = lam_min;
                rep.ellipticity.level = lev;
                rep.ellipticity.node = k;
                rep.ellipticity.witness = vec;
            }
            if (lev == levels - 1) {
                const double r = std::abs(s.R);
                if (r < rep.final_source.value) {
                    rep.final_source.value = r;
                    rep.final_source.level = lev;
                    rep.final_source.node = k;
                }
            }
        }
    }
    rep.symmetry.pass = rep.symmetry.value == 0.0;
    rep.ellipticity.pass = rep.ellipticity.value > 0.0;
    rep.final_source.pass = rep.final_source.value > 0.0;
}

void CoefficientSet::require_valid() const {
    if (!report_.symmetry.pass)
        throw std::domain_error("coefficient matrix is not symmetric");
    if (!report_.ellipticity.pass)
        throw std::domain_error("coefficient matrix is not uniformly elliptic");
    if (!report_.final_source.pass)
        throw std::domain_error("R(T, .) vanishes on the grid");
}

CoefficientSet sample_coefficients(std::shared_ptr<const CoefficientModel> model,
                                   const SpaceTimeGrid& grid) {
    return CoefficientSet(std::move(model), grid);
}

AssumptionReport validate_assumptions(const CoefficientSet& coeffs) { return coeffs.report(); }

}  // namespace carlab
