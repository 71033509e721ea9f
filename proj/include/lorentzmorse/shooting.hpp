#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lorentzmorse/geodesic.hpp"

namespace lmc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// principal value in (-pi, pi]
inline double wrap_angle(double t) {
    double w = std::remainder(t, kTwoPi);
    return w;
}

struct EndpointPair {
    Vec x0, x1;
    double y0 = 0.0, y1 = 0.0;

    void validate(const Manifold& M, double s0) const {
        if (!M.valid_point(x0) || !M.valid_point(x1))
            throw std::domain_error("endpoints: invalid base point");
        if (std::abs(y0) >= s0 || std::abs(y1) >= s0)
            throw std::domain_error("endpoints: y outside the open slab");
        bool same_base = (M.kind() == ManifoldKind::RoundSphere2)
                             ? (x0 - x1).norm() < 1e-12
                             : true;
        if (M.kind() != ManifoldKind::RoundSphere2) {
            same_base = true;
            for (int i = 0; i < x0.size(); ++i)
                if (std::abs(wrap_angle(x0(i) - x1(i))) > 1e-12)
                    same_base = false;
        }
        if (same_base && std::abs(y0 - y1) < 1e-12)
            throw std::invalid_argument("endpoints must be distinct");
    }
};

struct SearchSpec {
    double c_max = 10.0;
    int halton_seeds = 200;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    double dedup_radius = 1e-5;
    double ivp_tol = 1e-11;
    double slab_margin = 1.0;  // discard trajectories leaving |y| > s0+margin
    double s0 = 1.0;
    int path_samples = 128;    // stored samples = path_samples+1
};

struct ShootingLog {
    int seeds_tried = 0;
    int newton_failures = 0;
    int slab_discards = 0;
    int duplicates = 0;
};

namespace detail {

// Halton low-discrepancy sequence, radical inverse in the given base.
inline double radical_inverse(int base, int i) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

// Endpoint residual in R^{n+1}: frame coordinates of the base mismatch plus
// the y mismatch.  Flat manifolds compare modulo 2*pi per factor so that
// every winding class is reachable from its own basin.
inline Vec endpoint_residual(const SplitMetric& m, const EndpointPair& ep,
                             const Mat& frame0, const Vec& v, double ivp_tol,
                             Trajectory* out_traj = nullptr) {
    const Manifold& M = m.manifold();
    int n = M.dim();
    Vec xi0 = frame0 * v.head(n);
    auto tr = integrate_ivp(m, ep.x0, ep.y0, xi0, v(n), ivp_tol);
    auto e = tr.end();
    Vec r(n + 1);
    if (M.kind() == ManifoldKind::RoundSphere2) {
        Mat f1 = M.tangent_frame(ep.x1);
        r.head(n) = f1.transpose() * (e.x - ep.x1);
        // antipodal mirror also zeroes the projection; penalize it
        if (e.x.dot(ep.x1) < 0) r.head(n).array() += 2.0;
    } else {
        for (int i = 0; i < n; ++i) r(i) = wrap_angle(e.x(i) - ep.x1(i));
    }
    r(n) = e.y - ep.y1;
    if (out_traj) *out_traj = std::move(tr);
    return r;
}

inline Mat residual_jacobian(const SplitMetric& m, const EndpointPair& ep,
                             const Mat& frame0, const Vec& v, double ivp_tol) {
    int k = static_cast<int>(v.size());
    Mat J(k, k);
    for (int i = 0; i < k; ++i) {
        double h = 1e-7 * std::max(1.0, std::abs(v(i)));
        Vec vp = v, vm = v;
        vp(i) += h;
        vm(i) -= h;
        Vec rp = endpoint_residual(m, ep, frame0, vp, ivp_tol);
        Vec rm = endpoint_residual(m, ep, frame0, vm, ivp_tol);
        J.col(i) = (rp - rm) / (2 * h);
    }
    return J;
}

}  // namespace detail

// Multi-start shooting for all connecting geodesics with energy <= c_max.
// Structured seeds (straight lines per winding class on flat manifolds,
// great-circle guesses on the sphere) are combined with a Halton scan of the
// velocity box implied by the a priori estimate, then refined by damped
// Newton iteration on the endpoint map.
inline std::vector<GeodesicRecord> solve_bvp(const SplitMetric& m,
                                             const EndpointPair& ep,
                                             const GammaBounds& gb,
                                             const SearchSpec& spec,
                                             ShootingLog* log = nullptr) {
    const Manifold& M = m.manifold();
    ep.validate(M, spec.s0);
    int n = M.dim();
    Mat frame0 = M.tangent_frame(ep.x0);
    ShootingLog local_log;
    ShootingLog& L = log ? *log : local_log;

    // velocity box from the energy identity and the a priori bound on |y'|
    double eta_max =
        std::sqrt(std::max(gb.p1 * std::max(spec.c_max, 0.0) + gb.q1, 1.0)) *
        1.2;
    double xi_max =
        std::sqrt(2.0 * (std::max(spec.c_max, 0.0) +
                         0.5 * gb.beta_hi * eta_max * eta_max) /
                  std::max(gb.alpha_lo, 1e-12)) *
        1.1;

    std::vector<Vec> seeds;
    double dy = ep.y1 - ep.y0;
    if (M.is_flat()) {
        // straight-line guess per winding tuple
        std::vector<double> base(n);
        for (int i = 0; i < n; ++i) base[i] = wrap_angle(ep.x1(i) - ep.x0(i));
        int kmax = static_cast<int>(std::ceil(xi_max / kTwoPi)) + 1;
        std::vector<std::vector<int>> tuples{{}};
        for (int i = 0; i < n; ++i) {
            std::vector<std::vector<int>> next;
            for (auto& t : tuples)
                for (int k = -kmax; k <= kmax; ++k) {
                    auto u = t;
                    u.push_back(k);
                    next.push_back(std::move(u));
                }
            tuples = std::move(next);
        }
        for (auto& t : tuples) {
            Vec v(n + 1);
            bool in_box = true;
            for (int i = 0; i < n; ++i) {
                v(i) = base[i] + kTwoPi * t[i];
                if (std::abs(v(i)) > xi_max) in_box = false;
            }
            v(n) = dy;
            if (in_box) seeds.push_back(v);
        }
    } else {
        // great-circle guesses: signed lengths +-d + 2*pi*k along the
        // connecting direction
        double d = M.dist(ep.x0, ep.x1);
        Vec u = M.project_tangent(ep.x0, ep.x1 - ep.x0);
        if (u.norm() > 1e-12) {
            u.normalize();
            Vec uf = frame0.transpose() * u;
            int kmax = static_cast<int>(std::ceil(xi_max / kTwoPi)) + 1;
            for (int k = -kmax; k <= kmax; ++k) {
                for (double base : {d, -d}) {
                    double Ls = base + kTwoPi * k;
                    if (std::abs(Ls) > xi_max || std::abs(Ls) < 1e-9) continue;
                    Vec v(n + 1);
                    v.head(n) = Ls * uf;
                    v(n) = dy;
                    seeds.push_back(v);
                }
            }
        }
    }
    for (int i = 1; i <= spec.halton_seeds; ++i) {
        Vec v(n + 1);
        for (int j = 0; j < n; ++j) {
            static const int primes[3] = {2, 3, 5};
            v(j) = (2.0 * detail::radical_inverse(primes[j], i) - 1.0) * xi_max;
        }
        v(n) = (2.0 * detail::radical_inverse(n == 1 ? 3 : 5, i) - 1.0) *
               eta_max;
        seeds.push_back(v);
    }

    std::vector<GeodesicRecord> found;
    std::vector<Vec> accepted_v;
    int next_id = 0;
    for (const Vec& seed : seeds) {
        ++L.seeds_tried;
        Vec v = seed;
        bool converged = false;
        try {
            Vec r = detail::endpoint_residual(m, ep, frame0, v, spec.ivp_tol);
            for (int it = 0; it < spec.newton_max_iter; ++it) {
                double rn = r.norm();
                if (rn <= spec.newton_tol) {
                    converged = true;
                    break;
                }
                Mat J = detail::residual_jacobian(m, ep, frame0, v,
                                                  spec.ivp_tol);
                Vec dvec = J.fullPivLu().solve(-r);
                // Armijo backtracking on the residual norm
                double s = 1.0;
                bool improved = false;
                for (int bt = 0; bt < 20; ++bt) {
                    Vec vt = v + s * dvec;
                    Vec rt = detail::endpoint_residual(m, ep, frame0, vt,
                                                       spec.ivp_tol);
                    if (rt.norm() <= (1.0 - 1e-4 * s) * rn) {
                        v = vt;
                        r = rt;
                        improved = true;
                        break;
                    }
                    s *= 0.5;
                }
                if (!improved) break;
            }
        } catch (const std::exception&) {
            converged = false;
        }
        if (!converged) {
            ++L.newton_failures;
            continue;
        }
        bool dup = false;
        for (const Vec& w : accepted_v)
            if ((w - v).norm() < spec.dedup_radius) dup = true;
        if (dup) {
            ++L.duplicates;
            continue;
        }

        Trajectory tr;
        detail::endpoint_residual(m, ep, frame0, v, spec.ivp_tol, &tr);
        GeodesicRecord rec;
        rec.x0 = ep.x0;
        rec.x1 = ep.x1;
        rec.y0 = ep.y0;
        rec.y1 = ep.y1;
        rec.v0 = frame0 * v.head(n);
        rec.eta0 = v(n);
        rec.energy = pointwise_energy(m, tr.at(0.0));
        rec.residual =
            detail::endpoint_residual(m, ep, frame0, v, spec.ivp_tol).norm();

        bool slab_ok = true;
        rec.x_samples.resize(spec.path_samples + 1);
        rec.y_samples.resize(spec.path_samples + 1);
        rec.eta_samples.resize(spec.path_samples + 1);
        for (int i = 0; i <= spec.path_samples; ++i) {
            auto s = tr.at(static_cast<double>(i) / spec.path_samples);
            rec.x_samples[i] = s.x;
            rec.y_samples[i] = s.y;
            rec.eta_samples[i] = s.eta;
            if (std::abs(s.y) > spec.s0 + spec.slab_margin) slab_ok = false;
        }
        if (!slab_ok) {
            ++L.slab_discards;
            continue;
        }
        if (rec.energy > spec.c_max) continue;

        if (M.is_flat()) {
            auto e = tr.end();
            rec.winding.resize(n);
            for (int i = 0; i < n; ++i) {
                double total = e.x(i) - ep.x0(i);
                double principal = wrap_angle(ep.x1(i) - ep.x0(i));
                rec.winding[i] =
                    static_cast<int>(std::lround((total - principal) / kTwoPi));
            }
        }
        rec.id = next_id++;
        accepted_v.push_back(v);
        found.push_back(std::move(rec));
    }
    std::sort(found.begin(), found.end(),
              [](const GeodesicRecord& a, const GeodesicRecord& b) {
                  return a.energy < b.energy;
              });
    for (size_t i = 0; i < found.size(); ++i) found[i].id = static_cast<int>(i);
    return found;
}

// Closed-form winding count on the flat cylinder: the number of integers k
// with |dtheta0 + 2 pi k| <= sqrt(2 c_max + dy^2).
inline int flat_cylinder_winding_count(double dtheta0, double dy,
                                       double c_max) {
    double r = std::sqrt(2.0 * c_max + dy * dy);
    int lo = static_cast<int>(std::ceil((-r - dtheta0) / kTwoPi - 1e-12));
    int hi = static_cast<int>(std::floor((r - dtheta0) / kTwoPi + 1e-12));
    return std::max(0, hi - lo + 1);
}

}  // namespace lmc
