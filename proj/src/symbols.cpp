#include "carlab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace carlab {

namespace {

Vec2 to_vec2(const Eigen::VectorXd& v, int dim, const char* what) {
    if (v.size() != dim)
        throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                    std::to_string(dim) + ", got " + std::to_string(v.size()));
    Vec2 out = Vec2::Zero();
    for (int k = 0; k < dim; ++k) out[k] = v[k];
    return out;
}

// Grouped so that swapping v and w gives a bit-identical result for symmetric m.
double form(const Mat2& m, const Vec2& v, const Vec2& w, int dim) {
    if (dim == 1) return m(0, 0) * (v[0] * w[0]);
    return (m(0, 0) * (v[0] * w[0]) + m(1, 1) * (v[1] * w[1])) +
           (m(0, 1) * (v[0] * w[1]) + m(1, 0) * (v[1] * w[0]));
}

// Complex bilinear symbol p(t, x, xi0, zeta) = -xi0 + zeta^T a zeta (no conjugation).
Complex psymbol(const Mat2& a, int dim, double xi0, const Eigen::Vector2cd& z) {
    Complex s = -xi0;
    for (int l = 0; l < dim; ++l)
        for (int j = 0; j < dim; ++j) s += a(l, j) * z[l] * z[j];
    return s;
}

std::vector<double> lattice(double lo, double hi, int n) {
    std::vector<double> v;
    if (n <= 1) {
        v.push_back(0.5 * (lo + hi));
        return v;
    }
    for (int i = 0; i < n; ++i)
        v.push_back(i == n - 1 ? hi : lo + (hi - lo) * (static_cast<double>(i) / (n - 1)));
    return v;
}

std::vector<Vec2> space_samples(const SpatialDomain& dom, int per_axis) {
    if (per_axis < 1) throw std::invalid_argument("need at least one space sample per axis");
    std::vector<Vec2> pts;
    auto xs = lattice(dom.bounds(0).lo, dom.bounds(0).hi, per_axis);
    if (dom.dim() == 1) {
        for (double x : xs) pts.emplace_back(x, 0.0);
        return pts;
    }
    auto ys = lattice(dom.bounds(1).lo, dom.bounds(1).hi, per_axis);
    for (double y : ys)
        for (double x : xs) pts.emplace_back(x, y);
    return pts;
}

Vec2 perp(const Vec2& v) { return Vec2(-v[1], v[0]); }

// Unit xi' with a(grad, xi') = 0 (2D only).
Vec2 tangent_direction(const Mat2& a, const Vec2& grad) {
    Vec2 ag = a.transpose() * grad;
    return perp(ag).normalized();
}

}  // namespace

double quad_form(const CoefficientModel& model, double t, const Vec2& x, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& w) {
    const int d = model.dim();
    Vec2 vv = to_vec2(v, d, "quad_form v");
    Vec2 ww = to_vec2(w, d, "quad_form w");
    return form(model.eval(t, x).a, vv, ww, d);
}

double derivative_form(const CoefficientModel& model, int p, double t, const Vec2& x,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
    const int d = model.dim();
    if (p < 0 || p > d) throw std::out_of_range("derivative index out of range");
    Vec2 vv = to_vec2(v, d, "derivative_form v");
    Vec2 ww = to_vec2(w, d, "derivative_form w");
    CoefficientSample s = model.eval(t, x);
    return form(p == 0 ? s.a_t : s.a_x[p - 1], vv, ww, d);
}

double principal_symbol(const CoefficientModel& model, double t, const Vec2& x, double xi0,
                        const Eigen::VectorXd& xi) {
    const int d = model.dim();
    Vec2 v = to_vec2(xi, d, "principal_symbol xi");
    return -xi0 + form(model.eval(t, x).a, v, v, d);
}

double q_closed(const CoefficientSample& s, int dim, const PsiJet& psi, const Vec2& xi, double tau) {
    Mat2 a = s.a;
    Mat2 h = psi.hess;
    Vec2 g = psi.grad;
    if (dim == 1) {
        a(0, 1) = a(1, 0) = a(1, 1) = 0.0;
        h(0, 1) = h(1, 0) = h(1, 1) = 0.0;
        g[1] = 0.0;
    }
    const Vec2 axi = a.transpose() * xi;
    const Vec2 ag = a.transpose() * g;
    const double tau2 = tau * tau;
    double q = 4.0 * (axi.dot(h * axi) + tau2 * ag.dot(h * ag));
    for (int k = 0; k < dim; ++k) {
        const Mat2& ak = s.a_x[k];
        q -= 2.0 * ag[k] * (form(ak, xi, xi, dim) - tau2 * form(ak, g, g, dim));
        q += 4.0 * axi[k] * form(ak, xi, g, dim);
    }
    return q;
}

double q_psi_closed(const CoefficientModel& model, const WeightFunctionPsi& psi, double t,
                    const Vec2& x, const Eigen::VectorXd& xi, double tau) {
    const int d = model.dim();
    if (psi.dim() != d) throw std::invalid_argument("psi and coefficient dimensions differ");
    Vec2 v = to_vec2(xi, d, "q_psi_closed xi");
    PsiJet j = psi.jet(x);
    if (j.grad.norm() == 0.0) throw std::domain_error("grad psi vanishes");
    return q_closed(model.eval(t, x), d, j, v, tau);
}

BracketValue bracket_evaluate(const CoefficientModel& model, const WeightFunctionPsi& psi,
                              double t, const Vec2& x, double xi0, const Eigen::VectorXd& xi,
                              double tau, double fd_step) {
    const int d = model.dim();
    if (psi.dim() != d) throw std::invalid_argument("psi and coefficient dimensions differ");
    if (!(tau > 0.0)) throw std::invalid_argument("bracket oracle needs tau > 0");
    if (!(fd_step > 0.0)) throw std::invalid_argument("bracket oracle needs fd_step > 0");
    const Vec2 v = to_vec2(xi, d, "bracket_oracle xi");
    const Complex I(0.0, 1.0);

    // sign = -1 gives f (xi - i tau grad psi), +1 gives g
    auto zeta = [&](double tt, const Vec2& y, double sign) {
        (void)tt;
        Vec2 g = psi.jet(y).grad;
        Eigen::Vector2cd z;
        for (int k = 0; k < 2; ++k) z[k] = Complex(v[k], sign * tau * g[k]);
        if (d == 1) z[1] = 0.0;
        return z;
    };
    auto symbol_at = [&](double tt, const Vec2& y, double sign) {
        return psymbol(model.eval(tt, y).a, d, xi0, zeta(tt, y, sign));
    };
    // analytic xi-derivatives at (t, x): d/dxi0 = -1, d/dxi_k = 2 (a zeta)_k
    const Mat2 a = model.eval(t, x).a;
    auto dxi = [&](double sign, int k) -> Complex {
        if (k == 0) return -1.0;
        Eigen::Vector2cd z = zeta(t, x, sign);
        Complex s = 0.0;
        for (int j = 0; j < d; ++j) s += a(k - 1, j) * z[j];
        return 2.0 * s;
    };
    auto dvar = [&](double sign, int k) -> Complex {
        const double hstep = fd_step;
        if (k == 0) return (symbol_at(t + hstep, x, sign) - symbol_at(t - hstep, x, sign)) / (2.0 * hstep);
        Vec2 e = Vec2::Zero();
        e[k - 1] = hstep;
        return (symbol_at(t, x + e, sign) - symbol_at(t, x - e, sign)) / (2.0 * hstep);
    };

    Complex br = 0.0;
    for (int k = 0; k <= d; ++k) {
        br += dxi(-1.0, k) * dvar(+1.0, k) - dvar(-1.0, k) * dxi(+1.0, k);
    }
    const Complex q = br / (2.0 * I * tau);
    BracketValue out;
    out.value = q.real();
    out.imag_residual = std::abs(q.imag()) / (1.0 + std::abs(q.real()));
    return out;
}

double bracket_oracle(const CoefficientModel& model, const WeightFunctionPsi& psi, double t,
                      const Vec2& x, double xi0, const Eigen::VectorXd& xi, double tau,
                      double fd_step) {
    BracketValue b = bracket_evaluate(model, psi, t, x, xi0, xi, tau, fd_step);
    if (b.imag_residual > 1e-8)
        throw std::runtime_error("bracket oracle: imaginary residual " +
                                 std::to_string(b.imag_residual) + " exceeds tolerance");
    return b.value;
}

double default_fd_step(const SpatialDomain& domain) { return 1e-5 * domain.diameter(); }

RamsaiResult check_ramsai(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                          int n_space_samples, int n_sphere_samples) {
    const SpaceTimeGrid& grid = coeffs.grid();
    const int d = grid.dim();
    if (psi.dim() != d) throw std::invalid_argument("psi and grid dimensions differ");
    if (n_sphere_samples < 1) throw std::invalid_argument("need at least one sphere sample");
    RamsaiResult r;
    auto pts = space_samples(grid.domain(), n_space_samples);
    for (int lev = 0; lev <= grid.n_t(); ++lev) {
        const double t = grid.time(lev);
        for (const Vec2& x : pts) {
            PsiJet j = psi.jet(x);
            if (j.grad.norm() == 0.0) throw std::domain_error("grad psi vanishes at a sample");
            if (d == 1) continue;
            CoefficientSample s = coeffs.model().eval(t, x);
            const Vec2 e = tangent_direction(s.a, j.grad);
            for (double sign : {1.0, -1.0}) {
                const Vec2 xi = sign * e;
                const double q = q_closed(s, d, j, xi, 0.0);
                ++r.sample_count;
                if (q < r.min) {
                    r.min = q;
                    r.t = t;
                    r.x = x;
                    r.xi = xi;
                }
            }
        }
    }
    if (d == 1) r.vacuous = true;
    return r;
}

Condition1Result check_condition1(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                                  const SpatialDomain& domain) {
    const SpaceTimeGrid& grid = coeffs.grid();
    if (domain.dim() != grid.dim() || psi.dim() != grid.dim())
        throw std::invalid_argument("dimension mismatch in condition check");
    Condition1Result r;
    auto faces = domain.unobserved();
    if (faces.empty()) {
        r.vacuous = true;
        return r;
    }
    const int d = grid.dim();
    for (Face f : faces) {
        const Vec2 nu = outward_normal(domain, f);
        for (Index k : grid.face_nodes(f)) {
            const Vec2 x = grid.node(k);
            const Vec2 g = psi.jet(x).grad;
            for (int lev = 0; lev <= grid.n_t(); ++lev) {
                const double v = form(coeffs.model().eval(grid.time(lev), x).a, nu, g, d);
                if (v > r.max) {
                    r.max = v;
                    r.level = lev;
                    r.node = k;
                }
            }
        }
    }
    return r;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 10; ++k) g.push_back(std::ldexp(1.0, k));
    return g;
}

LambdaSearchResult find_min_lambda(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                                   const std::vector<double>& lambda_grid,
                                   const SampleSpec& samples) {
    const SpaceTimeGrid& grid = coeffs.grid();
    const int d = grid.dim();
    if (psi.dim() != d) throw std::invalid_argument("psi and grid dimensions differ");
    if (lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0) || (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])))
            throw std::invalid_argument("lambda grid must be positive and increasing");
    }
    auto pts = space_samples(grid.domain(), samples.space_per_axis);
    auto times = lattice(grid.t_floor(), grid.T(), samples.time_samples);
    const int n_ang = std::max(samples.angles, 2);

    LambdaSearchResult res;
    for (double lambda : lambda_grid) {
        double qmin = std::numeric_limits<double>::infinity();
        for (double t : times) {
            for (const Vec2& x : pts) {
                const PsiJet j = psi.jet(x);
                if (j.grad.norm() == 0.0) throw std::domain_error("grad psi vanishes at a sample");
                const CoefficientSample s = coeffs.model().eval(t, x);
                // jet of exp(lambda (psi - psi(x))): value 1; the shift only rescales q by
                // a positive factor and keeps the exponentials finite.
                PsiJet c;
                c.value = 1.0;
                c.grad = lambda * j.grad;
                c.hess = lambda * (j.hess + lambda * j.grad * j.grad.transpose());
                if (d == 1) c.hess(0, 1) = c.hess(1, 0) = c.hess(1, 1) = c.grad[1] = 0.0;
                const Vec2 e = d == 2 ? tangent_direction(s.a, c.grad) : Vec2::Zero();
                const double agg = form(s.a, c.grad, c.grad, d);
                for (int i = 0; i < n_ang; ++i) {
                    // closure of the characteristic set: tau = 0 included, xi' = 0 only in 1D
                    const double th = i == n_ang - 1
                                          ? std::numbers::pi / 2
                                          : (std::numbers::pi / 2) * (static_cast<double>(i) / (n_ang - 1));
                    double rs = std::cos(th), tau = std::sin(th);
                    if (d == 1) {
                        if (i != n_ang - 1) continue;
                        rs = 0.0;
                        tau = 1.0;
                    }
                    Vec2 xi = rs * e;
                    const double xi0 = form(s.a, xi, xi, d) - tau * tau * agg;
                    const double norm = std::abs(xi0) + xi.squaredNorm() + tau * tau;
                    const double sc = 1.0 / std::sqrt(norm);
                    xi *= sc;
                    tau *= sc;
                    qmin = std::min(qmin, q_closed(s, d, c, xi, tau));
                }
            }
        }
        res.lambdas.push_back(lambda);
        res.q_min.push_back(qmin);
        if (!res.lambda && qmin > 0.0) res.lambda = lambda;
    }
    return res;
}

GardingResult estimate_garding_constant(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                                        double lambda, const SampleSpec& samples,
                                        const std::vector<double>& taus) {
    const SpaceTimeGrid& grid = coeffs.grid();
    const int d = grid.dim();
    if (psi.dim() != d) throw std::invalid_argument("psi and grid dimensions differ");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    for (double tau : taus)
        if (!(tau > 0.0)) throw std::invalid_argument("Garding sampler needs tau > 0");
    auto pts = space_samples(grid.domain(), samples.space_per_axis);
    auto times = lattice(grid.t_floor(), grid.T(), samples.time_samples);
    std::vector<Vec2> dirs;
    if (d == 1) {
        dirs = {Vec2(1.0, 0.0), Vec2(-1.0, 0.0)};
    } else {
        const int nd = std::max(samples.directions, 1);
        for (int i = 0; i < nd; ++i) {
            const double th = 2.0 * std::numbers::pi * (static_cast<double>(i) / nd);
            dirs.emplace_back(std::cos(th), std::sin(th));
        }
    }
    GardingResult res;
    for (double t : times) {
        for (const Vec2& x : pts) {
            const PsiJet j = psi.jet(x);
            const CoefficientSample s = coeffs.model().eval(t, x);
            const double phi = std::exp(lambda * j.value) / t;
            PsiJet al;
            al.grad = lambda * phi * j.grad;
            al.hess = lambda * phi * (j.hess + lambda * j.grad * j.grad.transpose());
            if (d == 1) al.hess(0, 1) = al.hess(1, 0) = al.hess(1, 1) = al.grad[1] = 0.0;
            for (double tau : taus) {
                for (double r : samples.magnitudes) {
                    for (const Vec2& dir : dirs) {
                        const Vec2 xi = r * dir;
                        const double den = xi.squaredNorm() + tau * tau * phi * phi;
                        const double ratio = q_closed(s, d, al, xi, tau) / den;
                        const double ratio2 = q_closed(s, d, al, 2.0 * xi, 2.0 * tau) / (4.0 * den);
                        res.homogeneity_defect = std::max(
                            res.homogeneity_defect, std::abs(ratio2 - ratio) / std::max(1.0, std::abs(ratio)));
                        res.constant = std::min(res.constant, ratio);
                        ++res.sample_count;
                        if (r == 0.0) break;  // direction irrelevant for xi' = 0
                    }
                }
            }
        }
    }
    return res;
}

PseudoconvexityReport check_pseudoconvexity(const CoefficientSet& coeffs,
                                            const WeightFunctionPsi& psi,
                                            const std::vector<double>& lambda_grid,
                                            const SampleSpec& samples,
                                            const std::vector<double>& garding_taus) {
    PseudoconvexityReport rep;
    psi.require_nondegenerate(coeffs.grid());
    RamsaiResult rr = check_ramsai(coeffs, psi, samples.space_per_axis);
    rep.ramsai_min = rr.min;
    rep.ramsai_vacuous = rr.vacuous;
    Condition1Result c1 = check_condition1(coeffs, psi, coeffs.grid().domain());
    rep.condition1_max = c1.max;
    rep.condition1_vacuous = c1.vacuous;
    rep.lambda_search = find_min_lambda(coeffs, psi, lambda_grid, samples);
    rep.lambda_found = rep.lambda_search.lambda.has_value();
    rep.lambda = rep.lambda_found ? *rep.lambda_search.lambda : lambda_grid.back();
    GardingResult gr = estimate_garding_constant(coeffs, psi, rep.lambda, samples, garding_taus);
    rep.garding_constant = gr.constant;
    rep.sample_count = rr.sample_count + gr.sample_count;
    rep.verdict = rep.ramsai_min > 0.0 && rep.condition1_max < 0.0;
    return rep;
}

}  // namespace carlab
