#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lorentzmorse/geodesic.hpp"
#include "lorentzmorse/shooting.hpp"

namespace lmc {

// Linearization of the geodesic right-hand side at base state u applied to a
// variation w (same packing).  All metric derivatives are analytic.
inline Vec variational_rhs(const SplitMetric& m, const Vec& u, const Vec& w) {
    int d = m.manifold().ambient_dim();
    GeodesicState s = GeodesicState::unpack(u, d);
    GeodesicState v = GeodesicState::unpack(w, d);
    double a = m.a(s.y), ap = m.da(s.y), app = m.dda(s.y);
    double b = m.b(s.y), bp = m.db(s.y), bpp = m.ddb(s.y);
    double r = ap / a;                     // (h3) quotient
    double rp = (app * a - ap * ap) / (a * a);

    GeodesicState out;
    out.x = v.xi;
    out.y = v.eta;
    out.xi = -rp * v.y * s.eta * s.xi - r * (v.eta * s.xi + s.eta * v.xi);
    if (m.manifold().kind() == ManifoldKind::RoundSphere2)
        out.xi -= 2.0 * s.xi.dot(v.xi) * s.x + s.xi.squaredNorm() * v.x;
    double num = 0.5 * ap * s.xi.squaredNorm() + 0.5 * bp * s.eta * s.eta;
    double dnum = 0.5 * (app * s.xi.squaredNorm() + bpp * s.eta * s.eta) * v.y +
                  ap * s.xi.dot(v.xi) + bp * s.eta * v.eta;
    out.eta = -(dnum * b - num * bp * v.y) / (b * b);
    return out.pack();
}

struct ConjugateReport {
    int count = 0;                   // total multiplicity in (0,1)
    std::vector<double> times;       // one entry per unit of multiplicity
    bool certified = true;           // no accumulation detected
    double end_det = 0.0;            // scaled determinant at t = 1
    bool endpoint_nonconjugate = false;
};

namespace detail {

// Dense solution of the base geodesic bundled with n+1 Jacobi fields that
// vanish at t=0 and have independent initial velocities.
struct JacobiBundle {
    Dopri5::Solution sol;
    int d = 1;   // ambient dim
    int K = 2;   // number of Jacobi columns (= intrinsic dim + 1)

    Vec base(double t) const { return sol.eval(t).head(2 * d + 2); }
    // column k of the Jacobi data at time t
    Vec field(double t, int k) const {
        Vec full = sol.eval(t);
        return full.segment((k + 1) * (2 * d + 2), 2 * d + 2);
    }
};

inline JacobiBundle integrate_jacobi(const SplitMetric& m,
                                     const GeodesicRecord& rec,
                                     double tol = 1e-9) {
    const Manifold& M = m.manifold();
    int d = M.ambient_dim(), n = M.dim(), K = n + 1;
    int blk = 2 * d + 2;
    Mat frame0 = M.tangent_frame(rec.x0);

    GeodesicState s0;
    s0.x = rec.x0;
    s0.y = rec.y0;
    s0.xi = M.project_tangent(rec.x0, rec.v0);
    s0.eta = rec.eta0;

    Vec u0 = Vec::Zero(blk * (K + 1));
    u0.head(blk) = s0.pack();
    for (int k = 0; k < K; ++k) {
        GeodesicState w;
        w.x = Vec::Zero(d);
        w.y = 0.0;
        w.xi = (k < n) ? Vec(frame0.col(k)) : Vec(Vec::Zero(d));
        w.eta = (k < n) ? 0.0 : 1.0;
        u0.segment((k + 1) * blk, blk) = w.pack();
    }

    auto rhs = [&m, blk, K](double t, const Vec& u) {
        Vec du(u.size());
        Vec base = u.head(blk);
        du.head(blk) = geodesic_rhs(m, t, base);
        for (int k = 0; k < K; ++k)
            du.segment((k + 1) * blk, blk) =
                variational_rhs(m, base, u.segment((k + 1) * blk, blk));
        return du;
    };
    std::function<void(Vec&)> project = nullptr;
    if (M.kind() == ManifoldKind::RoundSphere2) {
        // keep the base on the sphere and the variations tangent
        project = [d, blk, K](Vec& u) {
            Vec x = u.segment(0, d);
            x /= x.norm();
            u.segment(0, d) = x;
            Vec xi = u.segment(d + 1, d);
            u.segment(d + 1, d) = xi - x.dot(xi) * x;
            for (int k = 0; k < K; ++k) {
                int off = (k + 1) * blk;
                Vec dx = u.segment(off, d);
                u.segment(off, d) = dx - x.dot(dx) * x;
            }
        };
    }
    Dopri5 ode;
    ode.rtol = tol;
    ode.atol = tol * 1e-2;
    JacobiBundle J;
    J.d = d;
    J.K = K;
    J.sol = Dopri5{ode}.integrate(rhs, 0.0, 1.0, u0, project);
    return J;
}

// Endpoint matrix of the Jacobi fields at time t in a frame that is carried
// continuously along the curve; det is normalized by t^K so it has a nonzero
// limit at t -> 0.
class JacobiDet {
public:
    JacobiDet(const Manifold& M, const JacobiBundle& J) : M_(&M), J_(&J) {
        int d = J.d;
        Vec x0 = J.base(0.0).head(d);
        frame_t_ = 0.0;
        frame_ = M.tangent_frame(x0);
    }

    // matrix D(t); advances the internal frame to t (monotone use expected,
    // small backtracking is fine because the frame is transported pointwise)
    Mat matrix(double t) {
        const Manifold& M = *M_;
        const JacobiBundle& J = *J_;
        int d = J.d, n = M.dim(), K = J.K;
        Vec x = J.base(t).head(d);
        if (M.kind() == ManifoldKind::RoundSphere2) {
            Vec xf = J.base(frame_t_).head(d);
            Mat F(d, n);
            for (int c = 0; c < n; ++c)
                F.col(c) = M.parallel_transport(xf, x, frame_.col(c));
            // re-orthonormalize against drift
            F.col(0).normalize();
            if (n > 1) {
                F.col(1) -= F.col(0).dot(F.col(1)) * F.col(0);
                F.col(1).normalize();
            }
            frame_ = F;
            frame_t_ = t;
        }
        Mat D(K, K);
        for (int k = 0; k < K; ++k) {
            Vec w = J.field(t, k);
            D.block(0, k, n, 1) = frame_.transpose() * w.head(d);
            D(n, k) = w(d);
        }
        return D;
    }

    double normalized_det(double t) {
        Mat D = matrix(t);
        return D.determinant() / std::pow(t, D.rows());
    }

private:
    const Manifold* M_;
    const JacobiBundle* J_;
    double frame_t_;
    Mat frame_;
};

}  // namespace detail

// Count conjugate points along a solved geodesic by scanning the normalized
// Jacobi determinant for sign changes, refining each by bisection, and
// reading the multiplicity off the singular values of the endpoint matrix.
inline ConjugateReport conjugate_points(const SplitMetric& m,
                                        const GeodesicRecord& rec,
                                        int scan_samples = 800,
                                        double t_tol = 1e-10) {
    if (scan_samples < 8)
        throw std::invalid_argument("conjugate_points: scan too coarse");
    auto J = detail::integrate_jacobi(m, rec);
    detail::JacobiDet det(m.manifold(), J);

    double t_min = 1e-3, t_end = 1.0;
    std::vector<double> ts(scan_samples + 1);
    std::vector<double> ds(scan_samples + 1);
    double scale = 0.0;
    for (int i = 0; i <= scan_samples; ++i) {
        ts[i] = t_min + (t_end - t_min) * i / scan_samples;
        ds[i] = det.normalized_det(ts[i]);
        scale = std::max(scale, std::abs(ds[i]));
    }
    if (scale == 0.0)
        throw std::runtime_error("conjugate_points: vanishing determinant");

    ConjugateReport rep;
    for (int i = 0; i < scan_samples; ++i) {
        bool sign_change = ds[i] * ds[i + 1] < 0.0;
        bool touch = !sign_change && i > 0 &&
                     std::abs(ds[i]) < 1e-10 * scale &&
                     std::abs(ds[i]) < std::abs(ds[i - 1]) &&
                     std::abs(ds[i]) < std::abs(ds[i + 1]);
        if (!sign_change && !touch) continue;
        double t_star;
        if (sign_change) {
            double lo = ts[i], hi = ts[i + 1];
            double dlo = ds[i];
            while (hi - lo > t_tol) {
                double mid = 0.5 * (lo + hi);
                double dm = det.normalized_det(mid);
                if (dm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (dm * dlo < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            t_star = 0.5 * (lo + hi);
        } else {
            t_star = ts[i];
        }
        if (t_star >= 1.0 - 1e-9) continue;  // endpoint handled separately
        Mat D = det.matrix(t_star);
        Eigen::JacobiSVD<Mat> svd(D);
        double smax = svd.singularValues()(0);
        int mult = 0;
        for (int k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) < 1e-6 * std::max(smax, 1e-300))
                ++mult;
        mult = std::max(mult, 1);
        for (int k = 0; k < mult; ++k) rep.times.push_back(t_star);
        rep.count += mult;
    }

    // accumulation guard: too many roots inside a short window is a sign the
    // scan cannot be trusted
    for (size_t i = 0; i + 5 < rep.times.size(); ++i)
        if (rep.times[i + 5] - rep.times[i] < 1e-3) rep.certified = false;

    rep.end_det = det.normalized_det(1.0) / scale;
    rep.endpoint_nonconjugate = std::abs(rep.end_det) >= 1e-6;
    return rep;
}

// Batch endpoint certification.  An empty batch passes vacuously; a single
// conjugate endpoint pair fails the whole batch.
struct CertifyResult {
    bool all_nonconjugate = true;
    std::vector<int> failed_ids;
    std::vector<double> end_dets;
};

inline CertifyResult certify_nonconjugate(
    const SplitMetric& m, const std::vector<GeodesicRecord>& recs) {
    CertifyResult out;
    for (const auto& r : recs) {
        auto rep = conjugate_points(m, r);
        out.end_dets.push_back(rep.end_det);
        if (!rep.endpoint_nonconjugate) {
            out.all_nonconjugate = false;
            out.failed_ids.push_back(r.id);
        }
    }
    return out;
}

}  // namespace lmc
