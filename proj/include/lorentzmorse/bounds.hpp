#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lorentzmorse/geodesic.hpp"
#include "lorentzmorse/metric.hpp"

namespace lmc {

// L2 norm squared of y' from the stored samples (trapezoid rule).
inline double yprime_l2sq(const GeodesicRecord& r) {
    size_t n = r.eta_samples.size();
    if (n < 2) return 0.0;
    double h = 1.0 / (n - 1), s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        s += w * r.eta_samples[i] * r.eta_samples[i];
    }
    return s * h;
}

inline double eta_max(const GeodesicRecord& r) {
    double m = 0.0;
    for (double e : r.eta_samples) m = std::max(m, std::abs(e));
    return m;
}

inline double y_max(const GeodesicRecord& r) {
    double m = 0.0;
    for (double y : r.y_samples) m = std::max(m, std::abs(y));
    return m;
}

// The three inequalities of the a priori estimate, with measured slack.
inline std::vector<BoundCheck> verify_stima(const GeodesicRecord& rec,
                                            const GammaBounds& g) {
    std::vector<BoundCheck> out;
    double c = rec.energy;
    double cplus = std::max(c, 0.0);
    out.push_back({"y-sup", y_max(rec), g.s0});
    out.push_back({"yprime-sup-sq", eta_max(rec) * eta_max(rec),
                   g.p1 * cplus + g.q1});
    out.push_back({"energy-lower", -c, 0.5 * g.beta_hi * g.q1});
    return out;
}

// Shifted-energy lower bound: a critical point of E_{alpha,beta+mu} with
// 0 <= mu <= lambda satisfies
//   E_{alpha,beta+lambda} >= -(1/2)(beta_hi+lambda) q1.
// The record must be a geodesic of the mu-shifted metric; its energy field
// is then E_{alpha,beta+mu}.
inline BoundCheck verify_stima2(const GeodesicRecord& rec_mu, double mu,
                                const GammaBounds& g) {
    double e_lambda =
        rec_mu.energy - 0.5 * (g.lambda - mu) * yprime_l2sq(rec_mu);
    return {"stima2-mu=" + std::to_string(mu), -e_lambda,
            0.5 * (g.beta_hi + g.lambda) * g.q1};
}

// Elementary Hilbert-space inequality used by the Palais-Smale argument:
//   |u|^2 + chi (|u|/|v|) <u,v>  >=  (1/2) min_{theta in [0,1]} |theta v + (1-theta) u|^2.
struct HilvecResult {
    double lhs, rhs;
    bool holds;
};

inline HilvecResult hilvec_bound(const Vec& u, const Vec& v, double chi) {
    if (v.norm() == 0.0)
        throw std::invalid_argument("hilvec_bound: v must be nonzero");
    double lhs = u.squaredNorm() + chi * (u.norm() / v.norm()) * u.dot(v);
    // minimize |u + theta (v-u)|^2 over [0,1]
    Vec d = v - u;
    double dn = d.squaredNorm();
    double theta = (dn > 0.0) ? std::clamp(-u.dot(d) / dn, 0.0, 1.0) : 0.0;
    double rhs = 0.5 * (u + theta * d).squaredNorm();
    return {lhs, rhs, lhs >= rhs - 1e-12};
}

// Explicit bounds from the two-level boundedness lemma: any path with
// E_{a0,b0} <= c and E_{a1,b1+lambda} >= c' satisfies
//   |y'|_2^2 <= (2c (1 + Da/alpha_lo) - 2c') / K,
//   int g(x',x') <= 2c/alpha_lo + (beta_hi/alpha_lo) |y'|_2^2,
// with K = lambda - Db - (beta_hi/alpha_lo) Da.  A negative first bound
// certifies the set is empty.
struct InterlivBounds {
    double yprime_l2sq_max;
    double xprime_l2sq_max;
    bool empty;  // level sets are incompatible
};

inline InterlivBounds interliv_bound(double c, double cprime,
                                     const GammaBounds& g, double d_alpha,
                                     double d_beta) {
    double radius = g.lambda * g.alpha_lo / (g.alpha_lo + g.beta_hi);
    if (std::max(d_alpha, d_beta) >= radius)
        throw std::invalid_argument(
            "interliv_bound: metric distance outside the admissible radius");
    double K = g.lambda - d_beta - (g.beta_hi / g.alpha_lo) * d_alpha;
    double y2 = (2.0 * c * (1.0 + d_alpha / g.alpha_lo) - 2.0 * cprime) / K;
    InterlivBounds out;
    out.empty = y2 < 0.0;
    out.yprime_l2sq_max = std::max(y2, 0.0);
    out.xprime_l2sq_max =
        2.0 * c / g.alpha_lo + (g.beta_hi / g.alpha_lo) * out.yprime_l2sq_max;
    return out;
}

}  // namespace lmc
