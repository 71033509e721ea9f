#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lorentzmorse/geodesic.hpp"
#include "lorentzmorse/metric.hpp"

namespace lmc {

// Piecewise-linear path on X x R with N interior nodes on a uniform grid.
// Endpoints are fixed and never mutate.  Sphere nodes are ambient unit
// vectors; tangent data lives in per-node orthonormal frames.
class DiscretePath {
public:
    DiscretePath(Manifold M, int N, Vec x0, Vec x1, double y0, double y1)
        : M_(std::move(M)),
          N_(N),
          x0_(std::move(x0)),
          x1_(std::move(x1)),
          y0_(y0),
          y1_(y1),
          x_(N),
          y_(Vec::Zero(N)) {
        if (N < 1) throw std::invalid_argument("DiscretePath: N >= 1 required");
        for (int j = 0; j < N; ++j) x_[j] = x0_;
    }

    const Manifold& manifold() const { return M_; }
    int N() const { return N_; }
    double h() const { return 1.0 / (N_ + 1); }
    const Vec& x0() const { return x0_; }
    const Vec& x1() const { return x1_; }
    double y0() const { return y0_; }
    double y1() const { return y1_; }

    // node accessors over the full grid 0..N+1
    Vec node_x(int j) const {
        if (j == 0) return x0_;
        if (j == N_ + 1) return x1_;
        return x_[j - 1];
    }
    double node_y(int j) const {
        if (j == 0) return y0_;
        if (j == N_ + 1) return y1_;
        return y_(j - 1);
    }
    void set_interior(int j, const Vec& x, double y) {
        x_[j - 1] = M_.project_point(x);
        y_(j - 1) = y;
    }

    // straight-line (chordal) interpolation between the endpoints
    void linear_init() {
        for (int j = 1; j <= N_; ++j) {
            double t = j * h();
            Vec x = (1.0 - t) * x0_ + t * x1_;
            set_interior(j, x, (1.0 - t) * y0_ + t * y1_);
        }
    }

    // flat state vector [x-nodes ambient..., y-nodes] used by flow drivers
    Vec flatten() const {
        int d = M_.ambient_dim();
        Vec u(d * N_ + N_);
        for (int j = 0; j < N_; ++j) u.segment(j * d, d) = x_[j];
        u.tail(N_) = y_;
        return u;
    }
    void unflatten(const Vec& u) {
        int d = M_.ambient_dim();
        for (int j = 0; j < N_; ++j)
            x_[j] = M_.project_point(u.segment(j * d, d));
        y_ = u.tail(N_);
    }

private:
    Manifold M_;
    int N_;
    Vec x0_, x1_;
    double y0_, y1_;
    std::vector<Vec> x_;
    Vec y_;
};

// Tangent vector at a DiscretePath in per-node frame coordinates:
// xi stacks n-dim chart components for interior nodes, eta the y-components.
struct PathTangent {
    Vec xi;   // n*N
    Vec eta;  // N

    Vec stacked() const {
        Vec u(xi.size() + eta.size());
        u << xi, eta;
        return u;
    }
    static PathTangent split(const Vec& u, int nN, int N) {
        PathTangent t;
        t.xi = u.head(nN);
        t.eta = u.tail(N);
        return t;
    }
    static PathTangent zero(int nN, int N) {
        return {Vec::Zero(nN), Vec::Zero(N)};
    }
};

// Per-path chart data: orthonormal frames at the interior nodes.
class PathChart {
public:
    explicit PathChart(const DiscretePath& p) : p_(&p) {
        const Manifold& M = p.manifold();
        frames_.reserve(p.N());
        for (int j = 1; j <= p.N(); ++j)
            frames_.push_back(M.tangent_frame(p.node_x(j)));
    }

    const Mat& frame(int j) const { return frames_[j - 1]; }  // j = 1..N

    // move the path along a tangent with step s (projective retraction)
    DiscretePath retract(const PathTangent& t, double s = 1.0) const {
        const DiscretePath& p = *p_;
        int n = p.manifold().dim();
        DiscretePath q = p;
        for (int j = 1; j <= p.N(); ++j) {
            Vec dx = frames_[j - 1] * t.xi.segment((j - 1) * n, n);
            q.set_interior(j, p.node_x(j) + s * dx,
                           p.node_y(j) + s * t.eta(j - 1));
        }
        return q;
    }

private:
    const DiscretePath* p_;
    std::vector<Mat> frames_;
};

// ---------------------------------------------------------------------------
// W^{1,2}-type Riemannian structure on the node space

// Stiffness-form Gram matrix of the discretized metric
//   <u,v> = int g(D_t xi_u, D_t xi_v) + int eta_u' eta_v',
// with parallel-transport-corrected differences in the x-block.
inline Mat w_matrix(const DiscretePath& p, const PathChart& chart) {
    const Manifold& M = p.manifold();
    int n = M.dim(), N = p.N();
    double h = p.h();
    int dim = n * N + N;
    Mat W = Mat::Zero(dim, dim);
    // x-block
    for (int i = 0; i <= N; ++i) {  // element between nodes i and i+1
        bool li = (i >= 1), ri = (i + 1 <= N);
        Mat B;
        if (li && ri) {
            // transport from node i+1 back to node i, expressed in frames
            const Mat& Fl = chart.frame(i);
            const Mat& Fr = chart.frame(i + 1);
            Mat T(M.ambient_dim(), n);
            for (int c = 0; c < n; ++c)
                T.col(c) = M.parallel_transport(p.node_x(i + 1), p.node_x(i),
                                                Fr.col(c));
            B = Fl.transpose() * T;
        }
        if (li)
            W.block((i - 1) * n, (i - 1) * n, n, n) +=
                Mat::Identity(n, n) / h;
        if (ri)
            W.block(i * n, i * n, n, n) += Mat::Identity(n, n) / h;
        if (li && ri) {
            W.block((i - 1) * n, i * n, n, n) -= B / h;
            W.block(i * n, (i - 1) * n, n, n) -= B.transpose() / h;
        }
    }
    // y-block
    int off = n * N;
    for (int j = 0; j < N; ++j) {
        W(off + j, off + j) = 2.0 / h;
        if (j + 1 < N) {
            W(off + j, off + j + 1) = -1.0 / h;
            W(off + j + 1, off + j) = -1.0 / h;
        }
    }
    return W;
}

inline double w_inner(const DiscretePath& p, const PathChart& chart,
                      const PathTangent& u, const PathTangent& v) {
    if (u.xi.size() != v.xi.size() || u.eta.size() != v.eta.size())
        throw std::invalid_argument("w_inner: mismatched mesh");
    Mat W = w_matrix(p, chart);
    return u.stacked().dot(W * v.stacked());
}

// ---------------------------------------------------------------------------
// Discretized Lorentzian energy and its derivatives

// E_{a,b+shift} with composite-midpoint quadrature on the linear elements.
inline double path_energy(const SplitMetric& m, const DiscretePath& p,
                          double shift = 0.0) {
    if (shift < 0) throw std::invalid_argument("path_energy: shift >= 0");
    double h = p.h(), E = 0.0;
    for (int i = 0; i <= p.N(); ++i) {
        Vec dx = (p.node_x(i + 1) - p.node_x(i)) / h;
        double dy = (p.node_y(i + 1) - p.node_y(i)) / h;
        double ym = 0.5 * (p.node_y(i) + p.node_y(i + 1));
        E += h * (0.5 * m.a(ym) * dx.squaredNorm() -
                  0.5 * (m.b(ym) + shift) * dy * dy);
    }
    return E;
}

// Nodal differential of the energy in chart coordinates.
inline PathTangent path_denergy(const SplitMetric& m, const DiscretePath& p,
                                const PathChart& chart, double shift = 0.0) {
    const Manifold& M = p.manifold();
    int n = M.dim(), N = p.N();
    double h = p.h();
    std::vector<Vec> gx(N, Vec::Zero(M.ambient_dim()));
    Vec gy = Vec::Zero(N);
    for (int i = 0; i <= N; ++i) {
        Vec dx = (p.node_x(i + 1) - p.node_x(i)) / h;
        double dy = (p.node_y(i + 1) - p.node_y(i)) / h;
        double ym = 0.5 * (p.node_y(i) + p.node_y(i + 1));
        double A = m.a(ym), Ap = m.da(ym);
        double B = m.b(ym) + shift, Bp = m.db(ym);
        double gy_mid = 0.25 * h * Ap * dx.squaredNorm() -
                        0.25 * h * Bp * dy * dy;
        if (i >= 1) {  // left node interior
            gx[i - 1] -= A * dx;
            gy(i - 1) += gy_mid + B * dy;
        }
        if (i + 1 <= N) {  // right node interior
            gx[i] += A * dx;
            gy(i + 1 - 1) += gy_mid - B * dy;
        }
    }
    PathTangent out = PathTangent::zero(n * N, N);
    for (int j = 1; j <= N; ++j)
        out.xi.segment((j - 1) * n, n) = chart.frame(j).transpose() * gx[j - 1];
    out.eta = gy;
    return out;
}

namespace detail {

// Block-tridiagonal factorization of the stiffness Gram matrix: the x-block
// couples neighbouring interior nodes through parallel transport, the
// y-block is the standard second-difference matrix.  O(N) solve.
class WSolver {
public:
    WSolver(const DiscretePath& p, const PathChart& chart)
        : n_(p.manifold().dim()), N_(p.N()) {
        const Manifold& M = p.manifold();
        double h = p.h();
        u_.resize(N_ > 1 ? N_ - 1 : 0);
        for (int i = 1; i + 1 <= N_; ++i) {
            const Mat& Fl = chart.frame(i);
            const Mat& Fr = chart.frame(i + 1);
            Mat T(M.ambient_dim(), n_);
            for (int c = 0; c < n_; ++c)
                T.col(c) = M.parallel_transport(p.node_x(i + 1), p.node_x(i),
                                                Fr.col(c));
            u_[i - 1] = -(Fl.transpose() * T) / h;
        }
        Mat D = (2.0 / h) * Mat::Identity(n_, n_);
        dhat_inv_.resize(N_);
        lower_.resize(u_.size());
        dhat_inv_[0] = D.inverse();
        for (int j = 1; j < N_; ++j) {
            lower_[j - 1] = u_[j - 1].transpose() * dhat_inv_[j - 1];
            dhat_inv_[j] = Mat(D - lower_[j - 1] * u_[j - 1]).inverse();
        }
        ydiag_.resize(N_);
        yoff_ = -1.0 / h;
        ydiag_[0] = 2.0 / h;
        for (int j = 1; j < N_; ++j)
            ydiag_[j] = 2.0 / h - yoff_ * yoff_ / ydiag_[j - 1];
    }

    Vec solve(const Vec& rhs) const {
        Vec out(rhs.size());
        std::vector<Vec> z(N_);
        z[0] = rhs.segment(0, n_);
        for (int j = 1; j < N_; ++j)
            z[j] = rhs.segment(j * n_, n_) - lower_[j - 1] * z[j - 1];
        Vec xj = dhat_inv_[N_ - 1] * z[N_ - 1];
        out.segment((N_ - 1) * n_, n_) = xj;
        for (int j = N_ - 2; j >= 0; --j) {
            xj = dhat_inv_[j] * (z[j] - u_[j] * xj);
            out.segment(j * n_, n_) = xj;
        }
        int off = n_ * N_;
        Vec w(N_);
        w(0) = rhs(off);
        for (int j = 1; j < N_; ++j)
            w(j) = rhs(off + j) - (yoff_ / ydiag_[j - 1]) * w(j - 1);
        out(off + N_ - 1) = w(N_ - 1) / ydiag_[N_ - 1];
        for (int j = N_ - 2; j >= 0; --j)
            out(off + j) = (w(j) - yoff_ * out(off + j + 1)) / ydiag_[j];
        return out;
    }

private:
    int n_, N_;
    std::vector<Mat> u_, lower_, dhat_inv_;
    std::vector<double> ydiag_;
    double yoff_;
};

}  // namespace detail

// Riesz representative of the energy differential in the W structure.
inline PathTangent path_gradient(const SplitMetric& m, const DiscretePath& p,
                                 const PathChart& chart, double shift = 0.0) {
    PathTangent d = path_denergy(m, p, chart, shift);
    detail::WSolver solver(p, chart);
    Vec g = solver.solve(d.stacked());
    return PathTangent::split(g, static_cast<int>(d.xi.size()), p.N());
}

// Analytic Hessian of the discrete energy in chart coordinates, including
// the chart curvature correction on sphere nodes.
inline Mat path_hessian(const SplitMetric& m, const DiscretePath& p,
                        const PathChart& chart, double shift = 0.0) {
    const Manifold& M = p.manifold();
    int n = M.dim(), N = p.N(), d = M.ambient_dim();
    double h = p.h();
    int dim_amb = d * N + N;
    Mat H = Mat::Zero(dim_amb, dim_amb);
    std::vector<Vec> gx(N, Vec::Zero(d));  // ambient x-partials for the
                                           // chart correction
    auto xidx = [d](int j) { return (j - 1) * d; };  // j = 1..N interior
    int yoff = d * N;

    for (int i = 0; i <= N; ++i) {
        Vec dx = (p.node_x(i + 1) - p.node_x(i)) / h;
        double dy = (p.node_y(i + 1) - p.node_y(i)) / h;
        double ym = 0.5 * (p.node_y(i) + p.node_y(i + 1));
        double A = m.a(ym), Ap = m.da(ym), App = m.dda(ym);
        double B = m.b(ym) + shift, Bp = m.db(ym), Bpp = m.ddb(ym);
        bool li = (i >= 1), ri = (i + 1 <= N);
        int jl = i, jr = i + 1;  // grid node indices

        if (li) gx[jl - 1] -= A * dx;
        if (ri) gx[jr - 1] += A * dx;

        // xx
        if (li)
            H.block(xidx(jl), xidx(jl), d, d) += (A / h) * Mat::Identity(d, d);
        if (ri)
            H.block(xidx(jr), xidx(jr), d, d) += (A / h) * Mat::Identity(d, d);
        if (li && ri) {
            H.block(xidx(jl), xidx(jr), d, d) -= (A / h) * Mat::Identity(d, d);
            H.block(xidx(jr), xidx(jl), d, d) -= (A / h) * Mat::Identity(d, d);
        }
        // xy: d2 e / dx_p dy_q = sigma_p * (1/2) A' dx  for q in {l,r}
        for (int ps = 0; ps < 2; ++ps) {
            int pj = ps == 0 ? jl : jr;
            double sg = ps == 0 ? -1.0 : 1.0;
            bool pin = ps == 0 ? li : ri;
            if (!pin) continue;
            for (int qs = 0; qs < 2; ++qs) {
                int qj = qs == 0 ? jl : jr;
                bool qin = qs == 0 ? li : ri;
                if (!qin) continue;
                Vec cross = sg * 0.5 * Ap * dx;
                H.block(xidx(pj), yoff + qj - 1, d, 1) += cross;
                H.block(yoff + qj - 1, xidx(pj), 1, d) += cross.transpose();
            }
        }
        // yy
        double common = 0.125 * h * App * dx.squaredNorm() -
                        0.125 * h * Bpp * dy * dy;
        if (ri)
            H(yoff + jr - 1, yoff + jr - 1) += common - Bp * dy - B / h;
        if (li)
            H(yoff + jl - 1, yoff + jl - 1) += common + Bp * dy - B / h;
        if (li && ri) {
            H(yoff + jl - 1, yoff + jr - 1) += common + B / h;
            H(yoff + jr - 1, yoff + jl - 1) += common + B / h;
        }
    }

    if (M.kind() != ManifoldKind::RoundSphere2) return H;

    // restrict to chart coordinates: J^T H J plus the projective-chart
    // second derivative, d2 phi/dxi^2 |_0 = -p, contracting the ambient
    // gradient
    int dim = n * N + N;
    Mat J = Mat::Zero(dim_amb, dim);
    for (int j = 1; j <= N; ++j)
        J.block(xidx(j), (j - 1) * n, d, n) = chart.frame(j);
    for (int j = 0; j < N; ++j) J(yoff + j, n * N + j) = 1.0;
    Mat Hc = J.transpose() * H * J;
    for (int j = 1; j <= N; ++j) {
        double gn = gx[j - 1].dot(p.node_x(j));
        Hc.block((j - 1) * n, (j - 1) * n, n, n) -=
            gn * Mat::Identity(n, n);
    }
    return Hc;
}

// Newton refinement to a critical point of the discrete energy (saddle
// points included; no line search, the start must already be close).
inline DiscretePath refine_to_critical(const SplitMetric& m, DiscretePath p,
                                       double shift = 0.0, double tol = 1e-12,
                                       int max_iter = 30) {
    for (int it = 0; it < max_iter; ++it) {
        PathChart chart(p);
        PathTangent g = path_denergy(m, p, chart, shift);
        if (g.stacked().norm() <= tol) return p;
        Mat H = path_hessian(m, p, chart, shift);
        Vec step = H.fullPivLu().solve(-g.stacked());
        PathTangent t =
            PathTangent::split(step, static_cast<int>(g.xi.size()), p.N());
        p = chart.retract(t);
    }
    PathChart chart(p);
    if (path_denergy(m, p, chart, shift).stacked().norm() > 1e-8)
        throw std::runtime_error("refine_to_critical: no convergence");
    return p;
}

// Sample a solved geodesic onto the N-node grid (re-integrates the IVP).
inline DiscretePath path_from_record(const SplitMetric& m,
                                     const GeodesicRecord& rec, int N,
                                     double ivp_tol = 1e-11) {
    auto tr = integrate_ivp(m, rec.x0, rec.y0, rec.v0, rec.eta0, ivp_tol);
    DiscretePath p(m.manifold(), N, rec.x0, rec.x1, rec.y0, rec.y1);
    for (int j = 1; j <= N; ++j) {
        auto s = tr.at(j * p.h());
        p.set_interior(j, s.x, s.y);
    }
    return p;
}

}  // namespace lmc
