#include "carlab/inversion.hpp"

#include "carlab/differences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace carlab {

namespace {

const Complex I_unit(0.0, 1.0);

double inner_w(const RealField& w, const RealField& a, const RealField& b) {
    return (w.array() * a.array() * b.array()).sum();
}

double real_l2(const SpaceTimeGrid& grid, const RealField& f) {
    return l2_norm(grid, f.cast<Complex>());
}

// L^2(Q) norm over interior nodes of levels 1..n_t-1 (where apply_operator lives)
double interior_norm(const SpaceTimeGrid& grid, const Eigen::MatrixXcd& v) {
    const RealField sw = spatial_weights(grid);
    double s = 0.0;
    for (int j = 1; j < grid.n_t(); ++j)
        for (Index k : grid.interior()) s += grid.dt() * sw[k] * std::norm(v(k, j));
    return std::sqrt(s);
}

ComplexGridFunction solve_with_source(const CoefficientSet& coeffs, const RealField& f, const SpatialField& u0) {
    const SpaceTimeGrid& grid = coeffs.grid();
    if (f.size() != grid.node_count()) throw std::invalid_argument("source size does not match grid");
    if (u0.size() != grid.node_count()) throw std::invalid_argument("initial data size does not match grid");
    SourceField g = [&coeffs, &f](double t, SpatialField& out) {
        const SpaceTimeGrid& gr = coeffs.grid();
        for (Index k : gr.interior()) out[k] = coeffs.model().eval(t, gr.node(k)).R * f[k];
    };
    return solve_ivp_field(coeffs, g, u0);
}

// sum_m c_m prod_k sin(m_k pi (x_k - lo_k) / L_k) over 1 <= m_k <= band
struct SineSeries {
    int dim = 1;
    int band = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> len{1.0, 1.0};
    std::vector<double> coef;

    double operator()(const Vec2& x) const {
        double s = 0.0;
        const int my = dim == 2 ? band : 1;
        for (int q = 0; q < my; ++q)
            for (int p = 0; p < band; ++p) {
                double v = std::sin((p + 1) * std::numbers::pi * (x[0] - lo[0]) / len[0]);
                if (dim == 2) v *= std::sin((q + 1) * std::numbers::pi * (x[1] - lo[1]) / len[1]);
                s += coef[static_cast<std::size_t>(q * band + p)] * v;
            }
        return s;
    }
};

SineSeries random_series(const SpatialDomain& dom, int band, std::mt19937_64& rng) {
    if (band < 1) throw std::invalid_argument("band limit must be at least 1");
    SineSeries s;
    s.dim = dom.dim();
    s.band = band;
    for (int k = 0; k < s.dim; ++k) {
        s.lo[k] = dom.bounds()[k].lo;
        s.len[k] = dom.bounds()[k].hi - dom.bounds()[k].lo;
    }
    std::normal_distribution<double> normal;
    const int count = s.dim == 2 ? band * band : band;
    s.coef.resize(static_cast<std::size_t>(count));
    double n2 = 0.0;
    for (auto& c : s.coef) {
        c = normal(rng);
        n2 += c * c;
    }
    // the basis is orthogonal with |.|^2 = prod L_k / 2
    double cell = 1.0;
    for (int k = 0; k < s.dim; ++k) cell *= 0.5 * s.len[k];
    const double scale = 1.0 / std::sqrt(n2 * cell);
    for (auto& c : s.coef) c *= scale;
    return s;
}

void summarize_ratios(const std::vector<double>& r, double& mx, double& med) {
    mx = 0.0;
    med = 0.0;
    if (r.empty()) return;
    std::vector<double> s = r;
    std::sort(s.begin(), s.end());
    mx = s.back();
    const std::size_t m = s.size() / 2;
    med = s.size() % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
}

}  // namespace

void add_relative_noise(Observation& obs, const DataMetric& metric, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");
    if (sigma == 0.0) return;
    const SpaceTimeGrid& grid = metric.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto draw = [&] { return Complex(normal(rng), normal(rng)); };

    Observation xi = zero_like(obs);
    for (Index k : grid.interior()) xi.final_state[k] = draw();
    for (auto& tr : xi.traces)
        for (Index r = 0; r < tr.values.rows(); ++r)
            for (Index c = 0; c < tr.values.cols(); ++c) tr.values(r, c) = draw();

    const int channels = metric.channels(obs);
    for (int ch = 0; ch < channels; ++ch) {
        const double size = metric.channel_norm(obs, ch);
        const double xn = metric.channel_norm(xi, ch);
        if (size == 0.0 || xn == 0.0) continue;
        const double s = sigma * size / xn;
        if (ch == 0)
            obs.final_state += s * xi.final_state;
        else
            obs.traces[static_cast<std::size_t>(ch - 1)].values += s * xi.traces[static_cast<std::size_t>(ch - 1)].values;
    }
}

InverseData synthesize_data(const CoefficientSet& coeffs, const RealField& f, const SpatialField& u0,
                            double noise_level, std::uint64_t seed) {
    coeffs.require_valid();
    if (!f.allFinite()) throw std::invalid_argument("source must be finite");
    InverseData d;
    d.obs = observe(solve_with_source(coeffs, f, u0));
    d.noise_level = noise_level;
    d.seed = seed;
    add_relative_noise(d.obs, DataMetric(coeffs.grid()), noise_level, seed);
    return d;
}

Reconstruction reconstruct_source(const CoefficientSet& coeffs, const InverseData& data, double reg,
                                  int max_iters, double tol) {
    if (!(reg >= 0.0)) throw std::invalid_argument("regularization must be nonnegative");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    SourceToData F(coeffs);
    const RealField& w = F.weights();
    auto normal_op = [&](const RealField& x) -> RealField {
        return F.adjoint(F.apply(x)) + reg * x;
    };

    Reconstruction out;
    const Index nn = coeffs.grid().node_count();
    out.f = RealField::Zero(nn);
    RealField b = F.adjoint(data.obs);
    const double bnorm = std::sqrt(inner_w(w, b, b));
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    RealField r = b;
    RealField p = r;
    double rr = inner_w(w, r, r);
    for (int it = 1; it <= max_iters; ++it) {
        RealField Ap = normal_op(p);
        const double pAp = inner_w(w, p, Ap);
        if (!(pAp > 0.0)) break;
        const double a = rr / pAp;
        out.f += a * p;
        r -= a * Ap;
        const double rr_new = inner_w(w, r, r);
        out.iterations = it;
        out.relative_residual = std::sqrt(rr_new) / bnorm;
        if (out.relative_residual <= tol) {
            out.converged = true;
            break;
        }
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    return out;
}

RealField random_source(const SpaceTimeGrid& grid, int band, std::mt19937_64& rng) {
    SineSeries s = random_series(grid.domain(), band, rng);
    RealField f(grid.node_count());
    for (Index k = 0; k < grid.node_count(); ++k) f[k] = s(grid.node(k));
    const double n = real_l2(grid, f);
    return n > 0.0 ? RealField(f / n) : f;
}

void summarize(StabilityReport& rep) {
    std::vector<double> r;
    rep.finite = rep.excluded = rep.violations = 0;
    for (const auto& e : rep.entries) {
        if (e.excluded)
            ++rep.excluded;
        else if (e.violation)
            ++rep.violations;
        else if (std::isfinite(e.ratio)) {
            ++rep.finite;
            r.push_back(e.ratio);
        }
    }
    summarize_ratios(r, rep.max_ratio, rep.median_ratio);
}

StabilityEntry stability_pair_ratio(const CoefficientSet& coeffs, const RealField& f, const RealField& f_tilde,
                                    const SpatialField& u0, const SpatialField& u0_tilde) {
    const SpaceTimeGrid& grid = coeffs.grid();
    ComplexGridFunction u = solve_with_source(coeffs, f, u0);
    ComplexGridFunction v = solve_with_source(coeffs, f_tilde, u0_tilde);
    Observation d = observe(u - v);
    DataMetric m(grid);
    StabilityEntry e;
    e.num = real_l2(grid, f - f_tilde);
    e.h3_term = m.h3_norm(d.final_state);
    e.boundary_terms = m.boundary_terms(d);
    const double den = e.h3_term + e.boundary_terms;
    if (den == 0.0) {
        if (e.num == 0.0) {
            e.excluded = true;
            e.flags = "zero_pair";
        } else {
            e.violation = true;
            e.ratio = std::numeric_limits<double>::infinity();
            e.flags = "stability_violation";
        }
        return e;
    }
    e.ratio = e.num / den;
    return e;
}

StabilityReport stability_sweep(const CoefficientSet& coeffs, const StabilitySpec& spec) {
    if (spec.count < 2) throw std::invalid_argument("stability sweep needs at least 2 pairs");
    std::mt19937_64 rng(spec.seed);
    std::vector<std::pair<RealField, RealField>> pairs;
    for (int i = 0; i < spec.count; ++i) {
        RealField f = random_source(coeffs.grid(), spec.band, rng);
        RealField g = random_source(coeffs.grid(), spec.band, rng);
        pairs.emplace_back(std::move(f), std::move(g));
    }
    return stability_sweep(coeffs, pairs);
}

StabilityReport stability_sweep(const CoefficientSet& coeffs,
                                const std::vector<std::pair<RealField, RealField>>& pairs) {
    StabilityReport rep;
    const SpatialField zero = SpatialField::Zero(coeffs.grid().node_count());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        bool repeat = false;
        for (std::size_t j = 0; j < i && !repeat; ++j)
            repeat = pairs[j].first == pairs[i].first && pairs[j].second == pairs[i].second;
        if (repeat) {
            ++rep.duplicates;
            continue;
        }
        StabilityEntry e = stability_pair_ratio(coeffs, pairs[i].first, pairs[i].second, zero, zero);
        e.pair_id = static_cast<int>(i);
        rep.entries.push_back(e);
    }
    summarize(rep);
    return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

NoiseSweep noise_sweep(const CoefficientSet& coeffs, const RealField& f, const std::vector<double>& sigmas,
                       double reg, std::uint64_t seed, int max_iters, double tol) {
    const SpaceTimeGrid& grid = coeffs.grid();
    const SpatialField zero = SpatialField::Zero(grid.node_count());
    const double fn = real_l2(grid, f);
    if (fn == 0.0) throw std::invalid_argument("noise sweep needs a nonzero source");
    NoiseSweep out;
    InverseData clean = synthesize_data(coeffs, f, zero, 0.0, seed);
    out.noiseless_error = real_l2(grid, reconstruct_source(coeffs, clean, reg, max_iters, tol).f - f) / fn;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        InverseData d = clean;
        d.noise_level = sigmas[i];
        d.seed = seed + 1 + i;
        add_relative_noise(d.obs, DataMetric(grid), d.noise_level, d.seed);
        Reconstruction r = reconstruct_source(coeffs, d, reg, max_iters, tol);
        NoisePoint p{sigmas[i], real_l2(grid, r.f - f) / fn, r.iterations, r.converged};
        out.points.push_back(p);
        xs.push_back(p.sigma);
        ys.push_back(p.error);
    }
    if (xs.size() >= 2) out.slope = loglog_slope(xs, ys);
    return out;
}

namespace {

class TransformedModel final : public CoefficientModel {
public:
    explicit TransformedModel(std::shared_ptr<const CoefficientModel> base) : base_(std::move(base)) {
        if (!base_) throw std::invalid_argument("null coefficient model");
    }
    int dim() const override { return base_->dim(); }
    bool time_dependent() const override { return true; }
    CoefficientSample eval(double t, const Vec2& x) const override {
        CoefficientSample s = base_->eval(t, x);
        const int d = dim();
        const Complex Rb = std::conj(s.R);
        if (Rb == 0.0) throw std::domain_error("R vanishes");
        CVec2 gR = CVec2::Zero();
        for (int p = 0; p < d; ++p) gR[p] = std::conj(s.R_x[p]);
        Complex div = 0.0, agg = 0.0, bg = 0.0;
        for (int l = 0; l < d; ++l) {
            bg += s.b[l] * gR[l];
            for (int j = 0; j < d; ++j) {
                div += s.a_x[l](l, j) * gR[j] + s.a(l, j) * std::conj(s.R_xx[l][j]);
                agg += s.a(l, j) * gR[l] * gR[j];
            }
        }
        CoefficientSample o = s;
        for (int l = 0; l < d; ++l) {
            Complex ag = 0.0;
            for (int j = 0; j < d; ++j) ag += s.a(l, j) * gR[j];
            o.b[l] = s.b[l] + 2.0 * ag / Rb;
        }
        o.c = s.c - I_unit * std::conj(s.R_t) / Rb + div / Rb - 2.0 * agg / (Rb * Rb) - bg / Rb;
        o.R = 1.0;
        o.R_t = 0.0;
        o.R_x = {};
        o.R_xx = {};
        return o;
    }

private:
    std::shared_ptr<const CoefficientModel> base_;
};

}  // namespace

std::shared_ptr<const CoefficientModel> transformed_model(std::shared_ptr<const CoefficientModel> base) {
    return std::make_shared<TransformedModel>(std::move(base));
}

TransformationCheck verify_transformation(const CoefficientSet& coeffs, const ComplexGridFunction& w,
                                          const RealField& q) {
    const SpaceTimeGrid& grid = coeffs.grid();
    if (w.values().rows() != grid.node_count() || w.values().cols() != grid.n_t() + 1)
        throw std::invalid_argument("grid function does not match grid");
    if (q.size() != grid.node_count()) throw std::invalid_argument("q does not match grid");
    const Eigen::MatrixXcd& R = coeffs.R();
    if (R.cwiseAbs().minCoeff() == 0.0) throw std::domain_error("R vanishes on the grid");

    ComplexGridFunction wt(grid, (I_unit * R.conjugate().array() * w.values().array()).matrix());
    CoefficientSet tset(transformed_model(coeffs.model_ptr()), grid);
    ComplexGridFunction pw = apply_operator(tset, wt);
    Eigen::MatrixXcd target = Eigen::MatrixXcd::Zero(grid.node_count(), grid.n_t() + 1);
    for (int j = 0; j <= grid.n_t(); ++j)
        for (Index k = 0; k < grid.node_count(); ++k) target(k, j) = I_unit * std::norm(R(k, j)) * q[k];
    const double tn = interior_norm(grid, target);
    const double dn = interior_norm(grid, pw.values() - target);
    TransformationCheck c;
    if (tn == 0.0) {
        c.undefined = dn == 0.0;
        c.residual = dn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return c;
    }
    c.residual = dn / tn;
    return c;
}

CoefficientEntry coefficient_reduction(const ReductionSetup& setup, const RealSpatialFunction& c1,
                                       const RealSpatialFunction& c2) {
    const SpaceTimeGrid& grid = setup.grid;
    CoefficientSet s1(with_potential(setup.base, c1), grid);
    CoefficientSet s2(with_potential(setup.base, c2), grid);
    ComplexGridFunction u1 = solve_ivp(s1, nullptr, setup.u0, Direction::forward, setup.boundary);
    ComplexGridFunction u2 = solve_ivp(s2, nullptr, setup.u0, Direction::forward, setup.boundary);
    ComplexGridFunction w = u1 - u2;

    CoefficientEntry e;
    RealField dc(grid.node_count());
    for (Index k = 0; k < grid.node_count(); ++k) dc[k] = c1(grid.node(k)) - c2(grid.node(k));
    e.num = real_l2(grid, dc);

    const Eigen::MatrixXd mag = u2.values().cwiseAbs();
    e.min_abs_u2 = mag.minCoeff();
    e.floor = setup.floor_fraction * mag.maxCoeff();

    // P with c1 applied to w equals (c2 - c1) u2
    ComplexGridFunction pw = apply_operator(s1, w);
    Eigen::MatrixXcd rhs = (-dc).cast<Complex>().asDiagonal() * u2.values();
    const double rn = interior_norm(grid, rhs);
    const double dn = interior_norm(grid, pw.values() - rhs);
    e.residual = rn > 0.0 ? dn / rn : (dn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

    Observation d = observe(w);
    DataMetric m(grid);
    e.h3_term = m.h3_norm(d.final_state);
    e.boundary_terms = m.boundary_terms(d);
    const double den = e.h3_term + e.boundary_terms;
    if (e.num == 0.0 && den == 0.0) {
        e.excluded = true;
        e.flags = "identical_coefficients";
        return e;
    }
    if (!(e.min_abs_u2 > e.floor)) {
        e.excluded = true;
        e.flags = "u2_below_floor";
        return e;
    }
    e.ratio = den > 0.0 ? e.num / den : std::numeric_limits<double>::infinity();
    if (den == 0.0) e.flags = "stability_violation";
    return e;
}

CoefficientReport coefficient_sweep(const ReductionSetup& setup, int count, int band, double amplitude,
                                    std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("count must be positive");
    std::mt19937_64 rng(seed);
    CoefficientReport rep;
    std::vector<double> ratios;
    for (int i = 0; i < count; ++i) {
        SineSeries s1 = random_series(setup.grid.domain(), band, rng);
        SineSeries s2 = random_series(setup.grid.domain(), band, rng);
        auto c1 = [s1, amplitude](const Vec2& x) { return 1.0 + amplitude * s1(x); };
        auto c2 = [s2, amplitude](const Vec2& x) { return 1.0 + amplitude * s2(x); };
        CoefficientEntry e = coefficient_reduction(setup, c1, c2);
        e.pair_id = i;
        if (e.excluded)
            ++rep.excluded;
        else if (std::isfinite(e.ratio)) {
            ++rep.finite;
            ratios.push_back(e.ratio);
        }
        rep.entries.push_back(e);
    }
    summarize_ratios(ratios, rep.max_ratio, rep.median_ratio);
    return rep;
}

}  // namespace carlab
