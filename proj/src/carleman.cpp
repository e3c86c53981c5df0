#include "carlab/carleman.hpp"

#include "carlab/differences.hpp"
#include "carlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace carlab {

namespace {

const Complex I_unit(0.0, 1.0);

struct GridDerivatives {
    // first[p](k, lev), second[p][q](k, lev)
    std::array<Eigen::MatrixXcd, 2> first;
    std::array<std::array<Eigen::MatrixXcd, 2>, 2> second;
};

GridDerivatives spatial_derivatives(const SpaceTimeGrid& grid, const Eigen::MatrixXcd& v,
                                    bool with_second) {
    SpatialDifferences sd(grid);
    GridDerivatives d;
    const int dim = grid.dim();
    d.first[0] = sd.D(1, 0) * v;
    if (dim == 2) d.first[1] = sd.D(0, 1) * v;
    if (with_second) {
        d.second[0][0] = sd.D(2, 0) * v;
        if (dim == 2) {
            d.second[0][1] = sd.D(1, 1) * v;
            d.second[1][0] = d.second[0][1];
            d.second[1][1] = sd.D(0, 2) * v;
        }
    }
    return d;
}

// Time derivative at level lev >= 1: centered, one-sided at the last level.
Complex time_derivative(const Eigen::MatrixXcd& v, Index k, int lev, int n, double dt) {
    if (lev < n) return (v(k, lev + 1) - v(k, lev - 1)) / (2.0 * dt);
    return (3.0 * v(k, n) - 4.0 * v(k, n - 1) + v(k, n - 2)) / (2.0 * dt);
}

Complex form_c(const Mat2& a, const Vec2& g, const Eigen::Vector2cd& v, int dim) {
    Complex s = 0.0;
    for (int l = 0; l < dim; ++l)
        for (int j = 0; j < dim; ++j) s += a(l, j) * g[l] * v[j];
    return s;
}

double form_r(const Mat2& a, const Vec2& v, const Vec2& w, int dim) {
    double s = 0.0;
    for (int l = 0; l < dim; ++l)
        for (int j = 0; j < dim; ++j) s += a(l, j) * v[l] * w[j];
    return s;
}

// Re sum a_lj p_l conj(q_j)
double form_h(const Mat2& a, const Eigen::Vector2cd& p, const Eigen::Vector2cd& q, int dim) {
    double s = 0.0;
    for (int l = 0; l < dim; ++l)
        for (int j = 0; j < dim; ++j) s += a(l, j) * std::real(p[l] * std::conj(q[j]));
    return s;
}

void check_grid(const SpaceTimeGrid& a, const ComplexGridFunction& u, const char* what) {
    if (u.values().rows() != a.node_count() || u.values().cols() != a.n_t() + 1)
        throw std::invalid_argument(std::string(what) + ": grid function does not match grid");
}

void check_weights(const SpaceTimeGrid& grid, const CarlemanWeights& w) {
    if (w.phi.rows() != grid.node_count() || w.phi.cols() != grid.n_t() + 1)
        throw std::invalid_argument("weights were built on a different grid");
}

}  // namespace

CarlemanWeights build_weights(const WeightFunctionPsi& psi, double lambda, double tau,
                              const SpaceTimeGrid& grid) {
    if (!(lambda > 0.0) || !(tau > 0.0)) throw std::invalid_argument("lambda and tau must be positive");
    psi.require_nondegenerate(grid);
    CarlemanWeights w;
    w.psi = psi;
    w.lambda = lambda;
    w.tau = tau;
    w.psi_sup = psi.sup_norm(grid);
    const Index nn = grid.node_count();
    const int n = grid.n_t();
    w.phi = Eigen::MatrixXd::Zero(nn, n + 1);
    w.alpha = Eigen::MatrixXd::Zero(nn, n + 1);
    w.exp_factor = Eigen::MatrixXd::Zero(nn, n + 1);
    const double top = std::exp(2.0 * lambda * w.psi_sup);
    w.alpha_max = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < nn; ++k) {
        const double e = std::exp(lambda * psi.value(grid.node(k)));
        for (int lev = 1; lev <= n; ++lev) {
            const double t = grid.time(lev);
            w.phi(k, lev) = e / t;
            w.alpha(k, lev) = (e - top) / t;
            if (!(w.alpha(k, lev) < 0.0) || !(w.phi(k, lev) > 0.0) || !std::isfinite(w.alpha(k, lev)))
                throw std::logic_error("weight invariant violated at node " + std::to_string(k));
            w.alpha_max = std::max(w.alpha_max, w.alpha(k, lev));
        }
    }
    for (Index k = 0; k < nn; ++k)
        for (int lev = 1; lev <= n; ++lev)
            w.exp_factor(k, lev) = std::exp(tau * (w.alpha(k, lev) - w.alpha_max));
    return w;
}

double resolved_tau_limit(const WeightFunctionPsi& psi, double lambda, const SpaceTimeGrid& grid) {
    const double top = std::exp(2.0 * lambda * psi.sup_norm(grid));
    const double T = grid.time(grid.n_t());
    double worst = 0.0;
    for (Index k = 0; k < grid.node_count(); ++k) {
        const PsiJet j = psi.jet(grid.node(k));
        const double e = std::exp(lambda * j.value);
        double v = grid.dt() * (top - e) / (T * T);
        for (int p = 0; p < grid.dim(); ++p) v += grid.h(p) * lambda * e * std::abs(j.grad[p]) / T;
        worst = std::max(worst, v);
    }
    return 1.0 / worst;
}

ConjugatedParts apply_conjugated_operators(const CoefficientSet& coeffs,
                                           const CarlemanWeights& weights,
                                           const ComplexGridFunction& v) {
    const SpaceTimeGrid& grid = coeffs.grid();
    check_grid(grid, v, "apply_conjugated_operators");
    check_weights(grid, weights);
    const int dim = grid.dim();
    const int n = grid.n_t();
    const double dt = grid.dt();
    const double lam = weights.lambda, tau = weights.tau;
    GridDerivatives d = spatial_derivatives(grid, v.values(), true);
    ConjugatedParts out{ComplexGridFunction(grid), ComplexGridFunction(grid)};
    for (int lev = 1; lev <= n; ++lev) {
        const double t = grid.time(lev);
        for (Index k = 0; k < grid.node_count(); ++k) {
            const Vec2 x = grid.node(k);
            const CoefficientSample s = coeffs.model().eval(t, x);
            const PsiJet j = weights.psi.jet(x);
            const double phi = weights.phi(k, lev);
            const double beta = tau * lam * phi;
            Eigen::Vector2cd gv = Eigen::Vector2cd::Zero();
            for (int p = 0; p < dim; ++p) gv[p] = d.first[p](k, lev);
            const double N = form_r(s.a, j.grad, j.grad, dim);
            double diva_psi = 0.0;
            for (int kk = 0; kk < dim; ++kk)
                for (int jj = 0; jj < dim; ++jj) diva_psi += s.a_x[kk](kk, jj) * j.grad[jj];
            const Complex val = v(k, lev);
            out.p1(k, lev) = 2.0 * beta * form_c(s.a, j.grad, gv, dim) + tau * lam * lam * phi * N * val +
                             beta * diva_psi * val;
            Complex second = 0.0;
            for (int l = 0; l < dim; ++l)
                for (int m = 0; m < dim; ++m) second += s.a(l, m) * d.second[l][m](k, lev);
            out.p2(k, lev) = I_unit * time_derivative(v.values(), k, lev, n, dt) - second -
                             lam * lam * tau * tau * phi * phi * N * val;
        }
    }
    return out;
}

CarlemanRow carleman_budget(const CoefficientSet& coeffs, const CarlemanWeights& weights,
                            const ComplexGridFunction& z, const ComplexGridFunction& g) {
    const SpaceTimeGrid& grid = coeffs.grid();
    check_grid(grid, z, "carleman_budget z");
    check_grid(grid, g, "carleman_budget g");
    check_weights(grid, weights);
    const double zmax = z.values().cwiseAbs().maxCoeff();
    if (z.boundary_max() > 1e-12 * (1.0 + zmax))
        throw std::invalid_argument("z violates the Dirichlet condition");

    const int dim = grid.dim();
    const int n = grid.n_t();
    const double tau = weights.tau;
    const RealField sw = spatial_weights(grid);
    const RealField tw = time_weights(grid, 1);
    const Eigen::MatrixXd& E = weights.exp_factor;

    CarlemanRow row;
    row.tau = tau;
    row.log_scale = weights.log_scale();

    ComplexGridFunction w(grid, z.values().cwiseProduct(E.cast<Complex>()));
    ConjugatedParts P = apply_conjugated_operators(coeffs, weights, w);
    GridDerivatives dz = spatial_derivatives(grid, z.values(), false);

    for (int lev = 1; lev <= n; ++lev) {
        const double wt = tw[lev - 1];
        for (Index k = 0; k < grid.node_count(); ++k) {
            const double phi = weights.phi(k, lev);
            const double e2 = E(k, lev) * E(k, lev);
            if (e2 == 0.0 && P.p1(k, lev) == 0.0 && P.p2(k, lev) == 0.0) continue;
            double grad2 = 0.0;
            for (int p = 0; p < dim; ++p) grad2 += std::norm(dz.first[p](k, lev));
            const double tp = tau * phi;
            row.lhs_volume += wt * sw[k] * (tp * grad2 + tp * tp * tp * std::norm(z(k, lev))) * e2;
            row.lhs_p1p2 += wt * sw[k] * (std::norm(P.p1(k, lev)) + std::norm(P.p2(k, lev)));
            row.rhs_source += wt * sw[k] * std::norm(g(k, lev)) * e2;
        }
    }
    Complex fin = 0.0;
    for (Index k = 0; k < grid.node_count(); ++k)
        fin += sw[k] * I_unit * w(k, n) * std::conj(P.p1(k, n));
    row.rhs_final = std::abs(fin.real());

    for (Face f : grid.domain().observed()) {
        BoundaryTrace tr = neumann_trace(z, f, 0);
        const RealField fw = face_weights(grid, f);
        auto nodes = grid.face_nodes(f);
        for (int lev = 1; lev <= n; ++lev)
            for (std::size_t c = 0; c < nodes.size(); ++c) {
                const Index k = nodes[c];
                const double e2 = E(k, lev) * E(k, lev);
                row.rhs_boundary += tw[lev - 1] * fw[static_cast<Index>(c)] * tau * weights.phi(k, lev) *
                                    std::norm(tr.values(lev - 1, static_cast<Index>(c))) * e2;
            }
    }

    // consistency of (z, g) with the centered discrete operator
    ComplexGridFunction pz = apply_operator(coeffs, z);
    double num = 0.0, den = 0.0;
    for (int lev = 1; lev < n; ++lev)
        for (Index k : grid.interior()) {
            num += std::norm(pz(k, lev) - g(k, lev));
            den += std::norm(g(k, lev));
        }
    row.equation_residual = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);

    const double lhs = row.lhs_volume + row.lhs_p1p2;
    const double rhs = row.rhs_final + row.rhs_source + row.rhs_boundary;
    if (rhs == 0.0) {
        row.excluded = true;
        row.empirical_C = lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        row.empirical_C = lhs / rhs;
    }
    return row;
}

double max_C_variation(const CarlemanReport& rep, std::size_t first) {
    if (first >= rep.max_C.size()) return 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = first; i < rep.max_C.size(); ++i) {
        lo = std::min(lo, rep.max_C[i]);
        hi = std::max(hi, rep.max_C[i]);
    }
    return lo > 0.0 ? (hi - lo) / lo : std::numeric_limits<double>::infinity();
}

CarlemanReport carleman_sweep(const CoefficientSet& coeffs, const WeightFunctionPsi& psi,
                              double lambda, const std::vector<CarlemanMember>& ensemble,
                              const std::vector<double>& tau_grid) {
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1])) throw std::invalid_argument("tau grid must be increasing");
    CarlemanReport rep;
    rep.taus = tau_grid;
    for (double tau : tau_grid) {
        CarlemanWeights w = build_weights(psi, lambda, tau, coeffs.grid());
        double mx = 0.0;
        for (std::size_t m = 0; m < ensemble.size(); ++m) {
            CarlemanRow row = carleman_budget(coeffs, w, ensemble[m].z, ensemble[m].g);
            row.member = static_cast<int>(m);
            if (row.excluded)
                ++rep.excluded;
            else
                mx = std::max(mx, row.empirical_C);
            rep.rows.push_back(row);
        }
        rep.max_C.push_back(mx);
    }
    for (std::size_t i = 0; i + 1 < tau_grid.size(); ++i) {
        if (max_C_variation(rep, i) <= 0.1) {
            rep.tau0_star = tau_grid[i];
            break;
        }
    }
    return rep;
}

EnergyIdentityResult energy_identity_check(const CoefficientSet& coeffs,
                                           const CarlemanWeights& weights,
                                           const ComplexGridFunction& w, int first_level) {
    const SpaceTimeGrid& grid = coeffs.grid();
    check_grid(grid, w, "energy_identity_check");
    check_weights(grid, weights);
    const int n = grid.n_t();
    if (first_level < 1 || first_level > n - 2) throw std::invalid_argument("bad first level");
    const int dim = grid.dim();
    const double dt = grid.dt();
    const double lam = weights.lambda, tau = weights.tau;
    const RealField sw = spatial_weights(grid);
    const RealField tw = time_weights(grid, first_level);

    ConjugatedParts P = apply_conjugated_operators(coeffs, weights, w);
    GridDerivatives d = spatial_derivatives(grid, w.values(), false);
    EnergyIdentityResult res;

    double lhs = 0.0;
    for (int lev = first_level; lev <= n; ++lev) {
        const double t = grid.time(lev);
        const double wt = tw[lev - first_level];
        for (Index k = 0; k < grid.node_count(); ++k) {
            lhs += wt * sw[k] * std::real(P.p1(k, lev) * std::conj(P.p2(k, lev)));

            const Vec2 x = grid.node(k);
            const CoefficientSample s = coeffs.model().eval(t, x);
            const PsiJet j = weights.psi.jet(x);
            const Vec2& gp = j.grad;
            const Mat2& H = j.hess;
            const Mat2& A = s.a;
            const double phi = weights.phi(k, lev);
            const double beta = tau * lam * phi;
            Vec2 V = Vec2::Zero();
            for (int l = 0; l < dim; ++l)
                for (int m = 0; m < dim; ++m) V[l] += A(l, m) * gp[m];
            const double N = form_r(A, gp, gp, dim);
            const double ssq = beta * beta * N;
            double trAH = 0.0;
            for (int l = 0; l < dim; ++l)
                for (int m = 0; m < dim; ++m) trAH += A(l, m) * H(l, m);
            const double kappa = beta * trAH;
            Vec2 div_a = Vec2::Zero();  // sum_m d_m a_mj
            for (int m = 0; m < dim; ++m)
                for (int jj = 0; jj < dim; ++jj) div_a[jj] += s.a_x[m](m, jj);
            const double mu = lam * N + div_a.head(dim).dot(gp.head(dim));
            const double mm = beta * mu;
            Mat2 dV = Mat2::Zero();  // dV(m, l) = d_m V_l
            Vec2 dN = Vec2::Zero();
            for (int m = 0; m < dim; ++m) {
                for (int l = 0; l < dim; ++l)
                    for (int jj = 0; jj < dim; ++jj) dV(m, l) += s.a_x[m](l, jj) * gp[jj] + A(l, jj) * H(jj, m);
                dN[m] = form_r(s.a_x[m], gp, gp, dim);
                for (int l = 0; l < dim; ++l)
                    for (int jj = 0; jj < dim; ++jj) dN[m] += 2.0 * A(l, jj) * H(l, m) * gp[jj];
            }
            Vec2 dm = Vec2::Zero();
            for (int p = 0; p < dim; ++p) {
                double dmu = lam * dN[p];
                for (int kk = 0; kk < dim; ++kk)
                    for (int jj = 0; jj < dim; ++jj)
                        dmu += s.a_xx[p][kk](kk, jj) * gp[jj] + s.a_x[kk](kk, jj) * H(jj, p);
                dm[p] = beta * (lam * gp[p] * mu + dmu);
            }
            Vec2 Ej = Vec2::Zero();  // sum_m d_m(m a_mj)
            for (int jj = 0; jj < dim; ++jj) {
                for (int m = 0; m < dim; ++m) Ej[jj] += dm[m] * A(m, jj);
                Ej[jj] += mm * div_a[jj];
            }
            Vec2 dtbV = -beta * V / t;
            for (int l = 0; l < dim; ++l)
                for (int m = 0; m < dim; ++m) dtbV[l] += beta * s.a_t(l, m) * gp[m];

            const Complex wv = w(k, lev);
            Eigen::Vector2cd gw = Eigen::Vector2cd::Zero();
            for (int p = 0; p < dim; ++p) gw[p] = d.first[p](k, lev);
            const Complex wt_ = time_derivative(w.values(), k, lev, n, dt);
            Complex Vgw = 0.0, divgw = 0.0, dtbVgw = 0.0, Egw = 0.0;
            for (int p = 0; p < dim; ++p) {
                Vgw += V[p] * gw[p];
                divgw += div_a[p] * gw[p];
                dtbVgw += dtbV[p] * std::conj(gw[p]);
                Egw += Ej[p] * gw[p];
            }
            double tg = std::imag(wv * dtbVgw) + kappa * std::imag(wt_ * std::conj(wv));

            double vg = 2.0 * lam * beta * std::norm(Vgw) + 2.0 * beta * std::real(divgw * std::conj(Vgw));
            Complex cross = 0.0;
            for (int m = 0; m < dim; ++m)
                for (int jj = 0; jj < dim; ++jj)
                    for (int l = 0; l < dim; ++l) cross += A(m, jj) * dV(m, l) * gw[jj] * std::conj(gw[l]);
            vg += 2.0 * beta * std::real(cross);
            for (int l = 0; l < dim; ++l) vg -= beta * V[l] * form_h(s.a_x[l], gw, gw, dim);
            vg -= kappa * form_h(A, gw, gw, dim);
            vg += std::real(Egw * std::conj(wv));

            const double t3 = tau * tau * tau;
            const double cubic = (2.0 * std::pow(lam, 4) * t3 * phi * phi * phi * N * N +
                                  t3 * lam * lam * lam * phi * phi * phi * V.head(dim).dot(dN.head(dim)) +
                                  kappa * ssq) *
                                 std::norm(wv);
            res.time_groups += wt * sw[k] * tg;
            res.volume_groups += wt * sw[k] * vg;
            res.cubic_group += wt * sw[k] * cubic;
        }
    }

    auto final_at = [&](int lev) {
        Complex s = 0.0;
        for (Index k = 0; k < grid.node_count(); ++k) s += sw[k] * I_unit * w(k, lev) * std::conj(P.p1(k, lev));
        return s.real();
    };
    res.final_term = 0.5 * (final_at(n) - final_at(first_level));

    for (Face f : grid.domain().faces()) {
        const Vec2 nu = outward_normal(grid.domain(), f);
        BoundaryTrace tr = neumann_trace(w, f, 0);
        const RealField fw = face_weights(grid, f);
        auto nodes = grid.face_nodes(f);
        for (int lev = first_level; lev <= n; ++lev) {
            const double t = grid.time(lev);
            for (std::size_t c = 0; c < nodes.size(); ++c) {
                const Index k = nodes[c];
                const Vec2 x = grid.node(k);
                const CoefficientSample s = coeffs.model().eval(t, x);
                const PsiJet j = weights.psi.jet(x);
                const double beta = tau * lam * weights.phi(k, lev);
                const double wq = tw[lev - first_level] * fw[static_cast<Index>(c)];
                const Complex dnu = tr.values(lev - 1, static_cast<Index>(c));
                res.boundary_group -= wq * beta * form_r(s.a, nu, nu, dim) * form_r(s.a, j.grad, nu, dim) * std::norm(dnu);
                // lateral terms that vanish for w = 0 on the boundary
                const Complex wv = w(k, lev);
                const Complex wt_ = time_derivative(w.values(), k, lev, n, dt);
                Vec2 V = s.a * j.grad;
                res.sigma_terms += wq * (beta * std::abs(V.head(dim).dot(nu.head(dim))) + 1.0) *
                                   (std::abs(wv) * std::abs(wt_) + std::norm(wv));
            }
        }
    }

    res.lhs = lhs;
    res.rhs = res.final_term + res.time_groups + res.volume_groups + res.boundary_group + res.cubic_group;
    const double scale = std::max(std::abs(res.lhs), std::abs(res.rhs));
    res.relative_discrepancy = scale > 0.0 ? std::abs(res.lhs - res.rhs) / scale : 0.0;
    return res;
}

EllipticSliceResult elliptic_slice_check(const CoefficientSet& coeffs,
                                         const CarlemanWeights& weights, int level,
                                         const SpatialField& w, const SpatialField& q,
                                         const SpatialField& w_t) {
    const SpaceTimeGrid& grid = coeffs.grid();
    check_weights(grid, weights);
    if (level < 1 || level > grid.n_t()) throw std::invalid_argument("slice level out of range");
    const Index nn = grid.node_count();
    if (w.size() != nn || q.size() != nn || w_t.size() != nn)
        throw std::invalid_argument("slice fields do not match grid");
    const int dim = grid.dim();
    const double tau = weights.tau;
    SpatialDifferences sd(grid);
    std::array<SpatialField, 2> g1;
    std::array<std::array<SpatialField, 2>, 2> g2;
    g1[0] = sd.D(1, 0) * w;
    g2[0][0] = sd.D(2, 0) * w;
    if (dim == 2) {
        g1[1] = sd.D(0, 1) * w;
        g2[0][1] = sd.D(1, 1) * w;
        g2[1][0] = g2[0][1];
        g2[1][1] = sd.D(0, 2) * w;
    }
    const RealField sw = spatial_weights(grid);
    EllipticSliceResult r;
    for (Index k = 0; k < nn; ++k) {
        const double tp = tau * weights.phi(k, level);
        const double e2 = std::pow(weights.exp_factor(k, level), 2);
        double hs = 0.0, gs = 0.0;
        for (int l = 0; l < dim; ++l) {
            gs += std::norm(g1[l][k]);
            for (int m = 0; m < dim; ++m) hs += std::norm(g2[l][m][k]);
        }
        r.lhs += sw[k] * (hs / tp + tp * gs + tp * tp * tp * std::norm(w[k])) * e2;
        r.rhs += sw[k] * (std::norm(q[k]) + std::norm(w_t[k])) * e2;
    }
    ComplexGridFunction holder(grid);
    holder.level(level) = w;
    for (Face f : grid.domain().observed()) {
        auto nodes = grid.face_nodes(f);
        const RealField fw = face_weights(grid, f);
        BoundaryTrace tr = neumann_trace(holder, f, 0);
        for (std::size_t c = 0; c < nodes.size(); ++c) {
            const Index k = nodes[c];
            const double e2 = std::pow(weights.exp_factor(k, level), 2);
            r.rhs += fw[static_cast<Index>(c)] * tau * weights.phi(k, level) *
                     std::norm(tr.values(level - 1, static_cast<Index>(c))) * e2;
        }
    }
    if (r.lhs == 0.0 && r.rhs == 0.0) {
        r.excluded = true;
        return r;
    }
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : std::numeric_limits<double>::infinity();
    return r;
}

double h3tau_norm(const SpaceTimeGrid& grid, const SpatialField& v, double tau) {
    if (v.size() != grid.node_count()) throw std::invalid_argument("field size does not match grid");
    if (grid.n_x() < 8) throw std::invalid_argument("grid too coarse for third differences");
    DataMetric m(grid);
    return m.h3_norm(v) + std::pow(tau, 3) * l2_norm(grid, v);
}

}  // namespace carlab
