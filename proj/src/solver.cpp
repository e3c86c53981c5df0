#include "carlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace carlab {

namespace {

const Complex I_unit(0.0, 1.0);

// Second-order one-sided d/dnu at a face node: (3/2 u_b - 2 u_{b+1} + 1/2 u_{b+2}) / h
// along the inward direction.
struct TraceStencil {
    std::vector<std::array<Index, 3>> nodes;
    double coef[3];
};

TraceStencil trace_stencil(const SpaceTimeGrid& grid, Face face) {
    if (!grid.domain().has_face(face)) throw std::invalid_argument("face not on boundary of domain");
    TraceStencil st;
    const int axis = (face == Face::x_lo || face == Face::x_hi) ? 0 : 1;
    const double h = grid.h(axis);
    st.coef[0] = 1.5 / h;
    st.coef[1] = -2.0 / h;
    st.coef[2] = 0.5 / h;
    const int n = grid.n_x();
    const bool lo = (face == Face::x_lo || face == Face::y_lo);
    for (Index k : grid.face_nodes(face)) {
        auto ij = grid.multi_index(k);
        std::array<Index, 3> row{};
        for (int s = 0; s < 3; ++s) {
            auto m = ij;
            m[axis] = lo ? s : n - s;
            row[s] = grid.dim() == 1 ? m[0] : grid.index(m[0], m[1]);
        }
        st.nodes.push_back(row);
    }
    return st;
}

// Time derivative over levels first..n: row r uses (col, weight) pairs.
std::vector<std::vector<std::pair<int, double>>> dt_stencil(int count, double dt) {
    if (count < 3) throw std::invalid_argument("need three levels for a time derivative");
    std::vector<std::vector<std::pair<int, double>>> rows(count);
    const double s = 1.0 / (2.0 * dt);
    for (int r = 0; r < count; ++r) {
        if (r == 0)
            rows[r] = {{0, -3.0 * s}, {1, 4.0 * s}, {2, -1.0 * s}};
        else if (r == count - 1)
            rows[r] = {{r, 3.0 * s}, {r - 1, -4.0 * s}, {r - 2, 1.0 * s}};
        else
            rows[r] = {{r + 1, s}, {r - 1, -s}};
    }
    return rows;
}

void check_shape(const SpaceTimeGrid& grid, const SpatialField& v, const char* what) {
    if (v.size() != grid.node_count())
        throw std::invalid_argument(std::string(what) + ": field size does not match grid");
}

}  // namespace

CSparseMatrix assemble_spatial_operator(const CoefficientModel& model, const SpaceTimeGrid& grid,
                                        double t) {
    const Index nn = grid.node_count();
    const int n = grid.n_x();
    std::vector<Eigen::Triplet<Complex>> trip;
    if (grid.dim() == 1) {
        const double h = grid.h(0);
        for (int i = 1; i < n; ++i) {
            const double x = grid.coordinate(0, i);
            const CoefficientSample s = model.eval(t, Vec2(x, 0.0));
            const double ap = model.eval(t, Vec2(x + 0.5 * h, 0.0)).a(0, 0);
            const double am = model.eval(t, Vec2(x - 0.5 * h, 0.0)).a(0, 0);
            const Complex bb = s.b[0] / (2.0 * h);
            trip.emplace_back(i, i + 1, ap / (h * h) - bb);
            trip.emplace_back(i, i - 1, am / (h * h) + bb);
            trip.emplace_back(i, i, -(ap + am) / (h * h) - s.c);
        }
    } else {
        const double hx = grid.h(0), hy = grid.h(1);
        const double cross = 1.0 / (4.0 * hx * hy);
        for (int j = 1; j < n; ++j) {
            for (int i = 1; i < n; ++i) {
                const Index k = grid.index(i, j);
                const Vec2 p = grid.node(k);
                const CoefficientSample s = model.eval(t, p);
                const double axp = model.eval(t, p + Vec2(0.5 * hx, 0.0)).a(0, 0);
                const double axm = model.eval(t, p - Vec2(0.5 * hx, 0.0)).a(0, 0);
                const double ayp = model.eval(t, p + Vec2(0.0, 0.5 * hy)).a(1, 1);
                const double aym = model.eval(t, p - Vec2(0.0, 0.5 * hy)).a(1, 1);
                trip.emplace_back(k, grid.index(i + 1, j), axp / (hx * hx) - s.b[0] / (2.0 * hx));
                trip.emplace_back(k, grid.index(i - 1, j), axm / (hx * hx) + s.b[0] / (2.0 * hx));
                trip.emplace_back(k, grid.index(i, j + 1), ayp / (hy * hy) - s.b[1] / (2.0 * hy));
                trip.emplace_back(k, grid.index(i, j - 1), aym / (hy * hy) + s.b[1] / (2.0 * hy));
                trip.emplace_back(k, k, -(axp + axm) / (hx * hx) - (ayp + aym) / (hy * hy) - s.c);
                // d_x(a12 d_y u) + d_y(a21 d_x u), nodal a12/a21
                const double a12p = model.eval(t, grid.node(grid.index(i + 1, j))).a(0, 1);
                const double a12m = model.eval(t, grid.node(grid.index(i - 1, j))).a(0, 1);
                const double a21p = model.eval(t, grid.node(grid.index(i, j + 1))).a(1, 0);
                const double a21m = model.eval(t, grid.node(grid.index(i, j - 1))).a(1, 0);
                if (a12p != 0.0 || a12m != 0.0 || a21p != 0.0 || a21m != 0.0) {
                    trip.emplace_back(k, grid.index(i + 1, j + 1), cross * (a12p + a21p));
                    trip.emplace_back(k, grid.index(i + 1, j - 1), cross * (-a12p - a21m));
                    trip.emplace_back(k, grid.index(i - 1, j + 1), cross * (-a12m - a21p));
                    trip.emplace_back(k, grid.index(i - 1, j - 1), cross * (a12m + a21m));
                }
            }
        }
    }
    CSparseMatrix L(nn, nn);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

CrankNicolson::CrankNicolson(const CoefficientSet& coeffs)
    : coeffs_(coeffs), boundary_(coeffs.grid().boundary()), interior_(coeffs.grid().interior()) {
    coeffs_.require_valid();
    cache_.resize(coeffs_.grid().n_t());
}

const CrankNicolson::Step& CrankNicolson::step(int j, bool need_B_factor) const {
    const SpaceTimeGrid& grid = coeffs_.grid();
    if (j < 0 || j >= grid.n_t()) throw std::out_of_range("step index out of range");
    const int key = coeffs_.model().time_dependent() ? j : 0;
    auto& slot = cache_[key];
    if (!slot) {
        const double t = grid.T() * ((j + 0.5) / grid.n_t());
        CSparseMatrix L = assemble_spatial_operator(coeffs_.model(), grid, t);
        const Index nn = grid.node_count();
        std::vector<Index> pos_i(nn, -1), pos_b(nn, -1);
        for (std::size_t p = 0; p < interior_.size(); ++p) pos_i[interior_[p]] = static_cast<Index>(p);
        for (std::size_t p = 0; p < boundary_.size(); ++p) pos_b[boundary_[p]] = static_cast<Index>(p);
        std::vector<Eigen::Triplet<Complex>> tii, tib;
        for (int o = 0; o < L.outerSize(); ++o) {
            for (CSparseMatrix::InnerIterator it(L, o); it; ++it) {
                const Index r = pos_i[it.row()];
                if (r < 0) continue;
                if (pos_i[it.col()] >= 0)
                    tii.emplace_back(r, pos_i[it.col()], it.value());
                else
                    tib.emplace_back(r, pos_b[it.col()], it.value());
            }
        }
        const Index ni = unknowns();
        CSparseMatrix Lii(ni, ni);
        Lii.setFromTriplets(tii.begin(), tii.end());
        auto st = std::make_shared<Step>();
        st->Lib.resize(ni, static_cast<Index>(boundary_.size()));
        st->Lib.setFromTriplets(tib.begin(), tib.end());
        CSparseMatrix Id(ni, ni);
        Id.setIdentity();
        const Complex half = 0.5 * grid.dt() * I_unit;
        st->A = Id + half * Lii;
        st->B = Id - half * Lii;
        st->A.makeCompressed();
        st->B.makeCompressed();
        st->lu_A = std::make_shared<Eigen::SparseLU<CSparseMatrix>>();
        st->lu_A->compute(st->A);
        if (st->lu_A->info() != Eigen::Success)
            throw std::runtime_error("singular step matrix at level " + std::to_string(j));
        slot = st;
    }
    if (need_B_factor && !slot->lu_B) {
        slot->lu_B = std::make_shared<Eigen::SparseLU<CSparseMatrix>>();
        slot->lu_B->compute(slot->B);
        if (slot->lu_B->info() != Eigen::Success)
            throw std::runtime_error("singular backward step matrix at level " + std::to_string(j));
    }
    return *slot;
}

Eigen::VectorXcd CrankNicolson::restrict(const SpatialField& full) const {
    Eigen::VectorXcd v(unknowns());
    for (std::size_t p = 0; p < interior_.size(); ++p) v[p] = full[interior_[p]];
    return v;
}

void CrankNicolson::prolong(const Eigen::VectorXcd& inner, SpatialField& full) const {
    for (std::size_t p = 0; p < interior_.size(); ++p) full[interior_[p]] = inner[p];
}

ComplexGridFunction solve_ivp_field(const CoefficientSet& coeffs, const SourceField& g,
                                    const SpatialField& u0, Direction direction,
                                    const SpaceTimeFunction& boundary) {
    const SpaceTimeGrid& grid = coeffs.grid();
    check_shape(grid, u0, "solve_ivp initial data");
    CrankNicolson cn(coeffs);
    const int n = grid.n_t();
    const double dt = grid.dt();
    const auto& bnodes = grid.boundary();

    ComplexGridFunction u(grid);
    auto boundary_values = [&](int level) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Index>(bnodes.size()));
        if (boundary) {
            const double t = grid.time(level);
            for (std::size_t p = 0; p < bnodes.size(); ++p) v[p] = boundary(t, grid.node(bnodes[p]));
        }
        return v;
    };
    const int start = direction == Direction::forward ? 0 : n;
    u.level(start) = u0;
    if (!boundary) {
        const double scale = 1.0 + u0.cwiseAbs().maxCoeff();
        for (Index k : bnodes)
            if (std::abs(u0[k]) > 1e-12 * scale)
                throw std::invalid_argument("initial data must vanish on the boundary");
    }
    {
        Eigen::VectorXcd b0 = boundary_values(start);
        for (std::size_t p = 0; p < bnodes.size(); ++p) u(bnodes[p], start) = b0[p];
    }

    SpatialField gfull = SpatialField::Zero(grid.node_count());
    SpatialField full = SpatialField::Zero(grid.node_count());
    for (int s = 0; s < n; ++s) {
        const int j = direction == Direction::forward ? s : n - 1 - s;  // step j: levels j, j+1
        const auto& st = cn.step(j, direction == Direction::backward);
        const double thalf = grid.T() * ((j + 0.5) / n);
        Eigen::VectorXcd G = Eigen::VectorXcd::Zero(cn.unknowns());
        if (g) {
            gfull.setZero();
            g(thalf, gfull);
            check_shape(grid, gfull, "source");
            G = cn.restrict(gfull);
        }
        Eigen::VectorXcd bsum = boundary_values(j) + boundary_values(j + 1);
        Eigen::VectorXcd next;
        if (direction == Direction::forward) {
            Eigen::VectorXcd rhs = st.B * cn.restrict(u.level(j)) -
                                   (0.5 * dt * I_unit) * (st.Lib * bsum) - (dt * I_unit) * G;
            next = st.lu_A->solve(rhs);
            if (st.lu_A->info() != Eigen::Success)
                throw std::runtime_error("linear solve failed at level " + std::to_string(j + 1));
            full = u.level(j + 1);
            cn.prolong(next, full);
            Eigen::VectorXcd bv = boundary_values(j + 1);
            for (std::size_t p = 0; p < bnodes.size(); ++p) full[bnodes[p]] = bv[p];
            u.level(j + 1) = full;
        } else {
            Eigen::VectorXcd rhs = st.A * cn.restrict(u.level(j + 1)) +
                                   (0.5 * dt * I_unit) * (st.Lib * bsum) + (dt * I_unit) * G;
            next = st.lu_B->solve(rhs);
            if (st.lu_B->info() != Eigen::Success)
                throw std::runtime_error("linear solve failed at level " + std::to_string(j));
            full = u.level(j);
            cn.prolong(next, full);
            Eigen::VectorXcd bv = boundary_values(j);
            for (std::size_t p = 0; p < bnodes.size(); ++p) full[bnodes[p]] = bv[p];
            u.level(j) = full;
        }
    }
    return u;
}

ComplexGridFunction solve_ivp(const CoefficientSet& coeffs, const SpaceTimeFunction& g,
                              const SpatialField& u0, Direction direction,
                              const SpaceTimeFunction& boundary) {
    SourceField sf;
    if (g) {
        const SpaceTimeGrid& grid = coeffs.grid();
        sf = [&grid, g](double t, SpatialField& out) {
            for (Index k : grid.interior()) out[k] = g(t, grid.node(k));
        };
    }
    return solve_ivp_field(coeffs, sf, u0, direction, boundary);
}

ComplexGridFunction apply_operator(const CoefficientSet& coeffs, const ComplexGridFunction& u) {
    const SpaceTimeGrid& grid = coeffs.grid();
    if (u.values().rows() != grid.node_count() || u.values().cols() != grid.n_t() + 1)
        throw std::invalid_argument("grid function does not match coefficient grid");
    ComplexGridFunction out(grid);
    const double dt = grid.dt();
    CSparseMatrix L;
    const bool td = coeffs.model().time_dependent();
    if (!td) L = assemble_spatial_operator(coeffs.model(), grid, 0.0);
    for (int j = 1; j < grid.n_t(); ++j) {
        if (td) L = assemble_spatial_operator(coeffs.model(), grid, grid.time(j));
        SpatialField r = I_unit * (u.level(j + 1) - u.level(j - 1)) / (2.0 * dt) - L * u.level(j);
        for (Index k : grid.interior()) out(k, j) = r[k];
    }
    return out;
}

SpaceTimeFunction manufactured_source(std::shared_ptr<const CoefficientModel> model,
                                      const AnalyticSolution& u) {
    if (!model) throw std::invalid_argument("null coefficient model");
    if (!u.value || !u.dt || !u.grad || !u.hess)
        throw std::invalid_argument("manufactured solution is missing derivatives");
    return [model, u](double t, const Vec2& x) -> Complex {
        const int d = model->dim();
        const CoefficientSample s = model->eval(t, x);
        const Eigen::Vector2cd g = u.grad(t, x);
        const Eigen::Matrix2cd H = u.hess(t, x);
        Complex div = 0.0;
        for (int l = 0; l < d; ++l)
            for (int j = 0; j < d; ++j) div += s.a_x[l](l, j) * g[j] + s.a(l, j) * H(l, j);
        Complex adv = 0.0;
        for (int l = 0; l < d; ++l) adv += s.b[l] * g[l];
        return I_unit * u.dt(t, x) - div + adv + s.c * u.value(t, x);
    };
}

BoundaryTrace neumann_trace(const ComplexGridFunction& u, Face face, int order_dt) {
    if (order_dt != 0 && order_dt != 1) throw std::invalid_argument("order_dt must be 0 or 1");
    const SpaceTimeGrid& grid = u.grid();
    TraceStencil st = trace_stencil(grid, face);
    const int n = grid.n_t();
    BoundaryTrace tr;
    tr.face = face;
    tr.first_level = 1;
    tr.kind = TraceKind::neumann;
    const Index nf = static_cast<Index>(st.nodes.size());
    tr.values.resize(n, nf);
    for (int l = 1; l <= n; ++l)
        for (Index c = 0; c < nf; ++c) {
            Complex v = 0.0;
            for (int s = 0; s < 3; ++s) v += st.coef[s] * u(st.nodes[c][s], l);
            tr.values(l - 1, c) = v;
        }
    if (order_dt == 1) {
        auto rows = dt_stencil(n, grid.dt());
        Eigen::MatrixXcd d(n, nf);
        for (int r = 0; r < n; ++r) {
            d.row(r).setZero();
            for (auto [c, w] : rows[r]) d.row(r) += w * tr.values.row(c);
        }
        tr.values = d;
        tr.kind = TraceKind::neumann_dt;
    }
    return tr;
}

Observation observe(const ComplexGridFunction& u) {
    Observation o;
    const SpaceTimeGrid& grid = u.grid();
    o.final_state = u.level(grid.n_t());
    for (Face f : grid.domain().observed()) {
        o.traces.push_back(neumann_trace(u, f, 0));
        o.traces.push_back(neumann_trace(u, f, 1));
    }
    return o;
}

DataMetric::DataMetric(const SpaceTimeGrid& grid)
    : grid_(grid), gram_(h3_gram(grid)), tw_(time_weights(grid, 1)) {}

double DataMetric::trace_inner(const BoundaryTrace& a, const BoundaryTrace& b) const {
    if (a.face != b.face || a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
        throw std::invalid_argument("trace shapes differ");
    if (a.values.rows() != tw_.size()) throw std::invalid_argument("trace levels do not match grid");
    const RealField fw = face_weights(grid_, a.face);
    double s = 0.0;
    for (Index l = 0; l < a.values.rows(); ++l)
        for (Index c = 0; c < a.values.cols(); ++c)
            s += tw_[l] * fw[c] * std::real(std::conj(a.values(l, c)) * b.values(l, c));
    return s;
}

double DataMetric::inner(const Observation& a, const Observation& b) const {
    if (a.traces.size() != b.traces.size()) throw std::invalid_argument("observation channel mismatch");
    if (a.final_state.size() != grid_.node_count() || b.final_state.size() != grid_.node_count())
        throw std::invalid_argument("final state size does not match grid");
    Eigen::VectorXcd mb = gram_ * b.final_state;
    double s = a.final_state.dot(mb).real();
    for (std::size_t c = 0; c < a.traces.size(); ++c) s += trace_inner(a.traces[c], b.traces[c]);
    return s;
}

double DataMetric::norm(const Observation& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }

double DataMetric::h3_norm(const SpatialField& v) const {
    if (v.size() != grid_.node_count()) throw std::invalid_argument("field size does not match grid");
    Eigen::VectorXcd mv = gram_ * v;
    return std::sqrt(std::max(0.0, v.dot(mv).real()));
}

double DataMetric::channel_norm(const Observation& a, int channel) const {
    if (channel == 0) return h3_norm(a.final_state);
    const auto& tr = a.traces.at(static_cast<std::size_t>(channel - 1));
    return std::sqrt(std::max(0.0, trace_inner(tr, tr)));
}

double DataMetric::boundary_terms(const Observation& a) const {
    double s0 = 0.0, s1 = 0.0;
    for (const auto& tr : a.traces) (tr.kind == TraceKind::neumann ? s0 : s1) += trace_inner(tr, tr);
    return std::sqrt(s0) + std::sqrt(s1);
}

Observation zero_like(const Observation& o) {
    Observation z;
    z.final_state = SpatialField::Zero(o.final_state.size());
    for (const auto& tr : o.traces) {
        BoundaryTrace t = tr;
        t.values.setZero();
        z.traces.push_back(t);
    }
    return z;
}

Observation axpy(double alpha, const Observation& x, const Observation& y) {
    if (x.traces.size() != y.traces.size()) throw std::invalid_argument("observation channel mismatch");
    Observation r = y;
    r.final_state += alpha * x.final_state;
    for (std::size_t c = 0; c < r.traces.size(); ++c) r.traces[c].values += alpha * x.traces[c].values;
    return r;
}

SourceToData::SourceToData(const CoefficientSet& coeffs)
    : coeffs_(coeffs), cn_(coeffs), metric_(coeffs.grid()), w_(spatial_weights(coeffs.grid())) {
    const SpaceTimeGrid& grid = coeffs.grid();
    r_half_.resize(grid.node_count(), grid.n_t());
    for (int j = 0; j < grid.n_t(); ++j) {
        const double t = grid.T() * ((j + 0.5) / grid.n_t());
        for (Index k = 0; k < grid.node_count(); ++k) r_half_(k, j) = coeffs.model().eval(t, grid.node(k)).R;
    }
}

ComplexGridFunction SourceToData::solve(const RealField& f) const {
    const SpaceTimeGrid& grid = coeffs_.grid();
    if (f.size() != grid.node_count()) throw std::invalid_argument("source size does not match grid");
    ComplexGridFunction u(grid);
    const double dt = grid.dt();
    Eigen::VectorXcd cur = Eigen::VectorXcd::Zero(cn_.unknowns());
    SpatialField full = SpatialField::Zero(grid.node_count());
    for (int j = 0; j < grid.n_t(); ++j) {
        const auto& st = cn_.step(j);
        SpatialField g = r_half_.col(j).cwiseProduct(f.cast<Complex>());
        Eigen::VectorXcd rhs = st.B * cur - (dt * I_unit) * cn_.restrict(g);
        cur = st.lu_A->solve(rhs);
        cn_.prolong(cur, full);
        u.level(j + 1) = full;
    }
    return u;
}

Observation SourceToData::apply(const RealField& f) const { return observe(solve(f)); }

RealField SourceToData::adjoint(const Observation& r) const {
    const SpaceTimeGrid& grid = coeffs_.grid();
    const int n = grid.n_t();
    const Index nn = grid.node_count();
    if (r.final_state.size() != nn) throw std::invalid_argument("residual final state size mismatch");
    const auto& observed = grid.domain().observed();
    if (r.traces.size() != 2 * observed.size()) throw std::invalid_argument("residual trace count mismatch");

    // s_j = O_j^T W r for every level j
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(nn, n + 1);
    s.col(n) += metric_.gram() * r.final_state;
    const RealField tw = time_weights(grid, 1);
    auto rows = dt_stencil(n, grid.dt());
    for (const auto& tr : r.traces) {
        if (tr.values.rows() != n) throw std::invalid_argument("residual trace levels mismatch");
        TraceStencil st = trace_stencil(grid, tr.face);
        const RealField fw = face_weights(grid, tr.face);
        if (tr.values.cols() != static_cast<Index>(st.nodes.size()))
            throw std::invalid_argument("residual trace width mismatch");
        Eigen::MatrixXcd wr(n, tr.values.cols());
        for (int l = 0; l < n; ++l) wr.row(l) = tw[l] * tr.values.row(l).cwiseProduct(fw.transpose().cast<Complex>());
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, tr.values.cols());
        if (tr.kind == TraceKind::neumann) {
            rho = wr;
        } else {
            for (int l = 0; l < n; ++l)
                for (auto [c, w] : rows[l]) rho.row(c) += w * wr.row(l);
        }
        for (int l = 0; l < n; ++l)
            for (std::size_t c = 0; c < st.nodes.size(); ++c)
                for (int q = 0; q < 3; ++q) s(st.nodes[c][q], l + 1) += st.coef[q] * rho(l, static_cast<Index>(c));
    }

    const double dt = grid.dt();
    Eigen::VectorXcd mu = cn_.restrict(s.col(n));
    Eigen::VectorXcd gamma = Eigen::VectorXcd::Zero(cn_.unknowns());
    for (int j = n - 1; j >= 0; --j) {
        const auto& st = cn_.step(j);
        Eigen::VectorXcd nu = st.lu_A->adjoint().solve(mu);
        Eigen::VectorXcd rh = cn_.restrict(r_half_.col(j));
        gamma += (dt * I_unit) * rh.conjugate().cwiseProduct(nu);
        mu = cn_.restrict(s.col(j)) + st.B.adjoint() * nu;
    }
    RealField out = RealField::Zero(nn);
    const auto& interior = grid.interior();
    for (std::size_t p = 0; p < interior.size(); ++p)
        out[interior[p]] = gamma[static_cast<Index>(p)].real() / w_[interior[p]];
    return out;
}

RealField adjoint_apply(const CoefficientSet& coeffs, const Observation& residual) {
    return SourceToData(coeffs).adjoint(residual);
}

double adjoint_mismatch(const CoefficientSet& coeffs, int trials, std::uint64_t seed) {
    SourceToData F(coeffs);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const RealField& w = F.weights();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        RealField f = RealField::Zero(coeffs.grid().node_count());
        for (Index k : coeffs.grid().interior()) f[k] = N(rng);
        Observation y = F.apply(f);
        Observation r = y;
        for (Index k = 0; k < r.final_state.size(); ++k) r.final_state[k] = Complex(N(rng), N(rng));
        for (auto& tr : r.traces)
            for (Index i = 0; i < tr.values.size(); ++i) tr.values.data()[i] = Complex(N(rng), N(rng));
        const double lhs = F.metric().inner(r, y);
        const double rhs = (w.array() * f.array() * F.adjoint(r).array()).sum();
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
    return worst;
}

double norm_drift(const CoefficientSet& coeffs, std::uint64_t seed) {
    const SpaceTimeGrid& grid = coeffs.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    SpatialField u0 = SpatialField::Zero(grid.node_count());
    for (Index k : grid.interior()) u0[k] = Complex(N(rng), N(rng));
    ComplexGridFunction u = solve_ivp(coeffs, nullptr, u0);
    double drift = 0.0;
    for (int j = 0; j < grid.n_t(); ++j) {
        const double a = l2_norm(grid, u.level(j));
        const double b = l2_norm(grid, u.level(j + 1));
        drift = std::max(drift, std::abs(b - a) / a);
    }
    return drift;
}

}  // namespace carlab
