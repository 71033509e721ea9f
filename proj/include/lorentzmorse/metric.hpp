#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzmorse/manifold.hpp"

namespace lmc {

// quintic smoothstep, C^2, s(0)=0, s(1)=1
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
inline double smoothstep5_d(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return t * t * (30.0 + t * (-60.0 + 30.0 * t));
}
inline double smoothstep5_dd(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return t * (60.0 + t * (-180.0 + 120.0 * t));
}

// Scalar profile in y with two derivatives.  The metric catalog is built
// from these; alpha(x,y) = a(y) * I and beta(x,y) = b(y).
struct Profile {
    std::function<double(double)> f, df, ddf;
    double operator()(double y) const { return f(y); }
};

inline Profile constant_profile(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; },
            [](double) { return 0.0; }};
}

// c0 + eps*cos(freq*y)
inline Profile cos_profile(double c0, double eps, double freq = 1.0) {
    return {[=](double y) { return c0 + eps * std::cos(freq * y); },
            [=](double y) { return -eps * freq * std::sin(freq * y); },
            [=](double y) { return -eps * freq * freq * std::cos(freq * y); }};
}

// c0 + eps*exp(-y^2)
inline Profile gauss_profile(double c0, double eps) {
    return {[=](double y) { return c0 + eps * std::exp(-y * y); },
            [=](double y) { return -2.0 * y * eps * std::exp(-y * y); },
            [=](double y) {
                return eps * std::exp(-y * y) * (4.0 * y * y - 2.0);
            }};
}

// polynomial in y, coeffs low-to-high
inline Profile poly_profile(std::vector<double> coeffs) {
    auto eval = [](const std::vector<double>& c, double y) {
        double v = 0.0;
        for (size_t i = c.size(); i-- > 0;) v = v * y + c[i];
        return v;
    };
    std::vector<double> d1, d2;
    for (size_t i = 1; i < coeffs.size(); ++i) d1.push_back(i * coeffs[i]);
    for (size_t i = 1; i < d1.size(); ++i) d2.push_back(i * d1[i]);
    return {[=](double y) { return eval(coeffs, y); },
            [=](double y) { return eval(d1, y); },
            [=](double y) { return eval(d2, y); }};
}

// Split Lorentzian structure on X x R:
//   h = g(alpha x', x') - beta |y'|^2,  alpha = a(y) I,  beta = b(y).
// The catalog formulas are all isotropic and x-independent, which keeps
// every derived quantity (geodesic flow, Hessians, cutoffs) closed-form.
class SplitMetric {
public:
    SplitMetric(Manifold manifold, Profile a, Profile b, std::string tag)
        : manifold_(std::move(manifold)),
          a_(std::move(a)),
          b_(std::move(b)),
          tag_(std::move(tag)) {}

    const Manifold& manifold() const { return manifold_; }
    const std::string& tag() const { return tag_; }

    double a(double y) const { return a_.f(y); }
    double da(double y) const { return a_.df(y); }
    double dda(double y) const { return a_.ddf(y); }
    double b(double y) const { return b_.f(y); }
    double db(double y) const { return b_.df(y); }
    double ddb(double y) const { return b_.ddf(y); }

    bool is_product() const { return product_; }
    void mark_product(bool p) { product_ = p; }

    struct Eval {
        Mat alpha;
        double beta;
        Mat d_alpha_dy;
        double d_beta_dy;
    };

    Eval eval(const Vec& x, double y) const {
        if (!manifold_.valid_point(x))
            throw std::domain_error("eval_metric: invalid manifold point");
        if (!std::isfinite(y))
            throw std::domain_error("eval_metric: non-finite y");
        int n = manifold_.ambient_dim();
        Eval e;
        e.alpha = a_.f(y) * Mat::Identity(n, n);
        e.beta = b_.f(y);
        e.d_alpha_dy = a_.df(y) * Mat::Identity(n, n);
        e.d_beta_dy = b_.df(y);
        if (e.beta <= 0.0)
            throw std::domain_error("eval_metric: beta must be positive");
        return e;
    }

private:
    Manifold manifold_;
    Profile a_, b_;
    std::string tag_;
    bool product_ = false;
};

inline SplitMetric product_metric(Manifold m, double a0 = 1.0, double b0 = 1.0) {
    SplitMetric sm(std::move(m), constant_profile(a0), constant_profile(b0),
                   "product");
    sm.mark_product(true);
    return sm;
}

// ---------------------------------------------------------------------------
// Gamma bounds and the constants of the a priori estimate

struct GammaBounds {
    double s0 = 1.0;
    double alpha_lo = 1.0, alpha_hi = 1.0;
    double beta_lo = 1.0, beta_hi = 1.0;
    double a = 0.0, b = 0.0;
    // derived
    double p1 = 0.0, q1 = 0.0, lambda = 0.0, c0 = 0.0;

    static constexpr double kLambdaCap = 1e3;
};

inline double p1_of(double beta_lo, double beta_hi, double a, double b,
                    double s0) {
    if (a + b == 0.0) return 0.0;
    return a / (a + b) * beta_hi / (beta_lo * beta_lo) *
           std::exp(2.0 * (a + b) * s0);
}

inline double q1_of(double beta_lo, double beta_hi, double a, double b,
                    double s0, double dy) {
    return beta_hi * beta_hi / (beta_lo * beta_lo) * dy * dy *
           std::exp(2.0 * (a + b) * s0);
}

// Fill the derived constants p1, q1, lambda = 2/p1 (capped), and the level
// c0 strictly below -(1/2)(beta_hi+lambda) q1.
inline GammaBounds derive_constants(GammaBounds in, double y0, double y1) {
    if (std::abs(y0) >= in.s0 || std::abs(y1) >= in.s0)
        throw std::invalid_argument("derive_constants: endpoint outside slab");
    if (in.alpha_lo > in.alpha_hi || in.beta_lo > in.beta_hi)
        throw std::invalid_argument("derive_constants: inverted bounds");
    GammaBounds g = in;
    g.p1 = p1_of(g.beta_lo, g.beta_hi, g.a, g.b, g.s0);
    g.q1 = q1_of(g.beta_lo, g.beta_hi, g.a, g.b, g.s0, y1 - y0);
    g.lambda = (g.p1 > 0.0) ? std::min(2.0 / g.p1, GammaBounds::kLambdaCap)
                            : GammaBounds::kLambdaCap;
    g.c0 = -0.5 * (g.beta_hi + g.lambda) * g.q1 - 1.0;
    return g;
}

// Estimate the (h3)/(h4) quotient suprema on a y-grid, inflated by 10%.
// For isotropic alpha the (h3) quotient is |a'(y)|/a(y).
inline void estimate_ab(const SplitMetric& m, GammaBounds& g, int samples = 2001) {
    double lo = -(g.s0 + 1.0), hi = g.s0 + 1.0;
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < samples; ++i) {
        double y = lo + (hi - lo) * i / (samples - 1);
        sa = std::max(sa, std::abs(m.da(y)) / m.a(y));
        sb = std::max(sb, std::abs(m.db(y)) / m.b(y));
    }
    g.a = 1.1 * sa;
    g.b = 1.1 * sb;
}

// Sample alpha/beta ranges over the extended slab.
inline void estimate_ranges(const SplitMetric& m, GammaBounds& g,
                            int samples = 2001) {
    double lo = -(g.s0 + 1.0), hi = g.s0 + 1.0;
    double alo = 1e300, ahi = -1e300, blo = 1e300, bhi = -1e300;
    for (int i = 0; i < samples; ++i) {
        double y = lo + (hi - lo) * i / (samples - 1);
        alo = std::min(alo, m.a(y));
        ahi = std::max(ahi, m.a(y));
        blo = std::min(blo, m.b(y));
        bhi = std::max(bhi, m.b(y));
    }
    g.alpha_lo = alo;
    g.alpha_hi = ahi;
    g.beta_lo = blo;
    g.beta_hi = bhi;
}

// ---------------------------------------------------------------------------
// Convexity check of the slab condition (h0)

struct ConvexityViolation {
    double y;
    double max_eig;  // offending eigenvalue of d_alpha_dy (signed)
};

struct ConvexityReport {
    bool convex = true;
    std::vector<ConvexityViolation> violations;
    std::vector<std::pair<double, double>> samples;  // (y, extremal eig)
};

// Checks d_y alpha <= 0 for sampled y > s0 and >= 0 for y < -s0.
// Isotropic alpha means the extremal eigenvalue is just a'(y).
inline ConvexityReport check_convexity(const SplitMetric& m, double s0,
                                       double y_max, int samples,
                                       double tol = 1e-10) {
    if (samples <= 0)
        throw std::invalid_argument("check_convexity: empty grid");
    ConvexityReport rep;
    for (int i = 0; i < samples; ++i) {
        double y = s0 + (y_max - s0) * i / std::max(1, samples - 1);
        for (double sy : {y, -y}) {
            double d = m.da(sy);
            rep.samples.push_back({sy, d});
            bool ok = (sy > 0) ? (d <= tol) : (d >= -tol);
            if (!ok) {
                rep.convex = false;
                rep.violations.push_back({sy, d});
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Slab cutoff: blend (alpha,beta) to (alpha_lo I, beta_lo) outside the slab

struct CutoffSpec {
    double s0 = 1.0;
    double width = 1.0;  // transition width; psi=0 beyond s0+width
};

inline SplitMetric apply_slab_cutoff(const SplitMetric& m,
                                     const GammaBounds& g,
                                     CutoffSpec spec = {}) {
    if (spec.width <= 0.0)
        throw std::invalid_argument("apply_slab_cutoff: width must be positive");
    double s0 = spec.s0, w = spec.width;
    double alo = g.alpha_lo, blo = g.beta_lo;
    auto psi = [s0, w](double y) {
        return 1.0 - smoothstep5((std::abs(y) - s0) / w);
    };
    auto dpsi = [s0, w](double y) {
        double s = (y >= 0) ? 1.0 : -1.0;
        return -s / w * smoothstep5_d((std::abs(y) - s0) / w);
    };
    auto ddpsi = [s0, w](double y) {
        return -1.0 / (w * w) * smoothstep5_dd((std::abs(y) - s0) / w);
    };
    auto blend = [psi, dpsi, ddpsi](const Profile& p, double base) {
        Profile out;
        out.f = [=](double y) { return psi(y) * p.f(y) + (1 - psi(y)) * base; };
        out.df = [=](double y) {
            return psi(y) * p.df(y) + dpsi(y) * (p.f(y) - base);
        };
        out.ddf = [=](double y) {
            return psi(y) * p.ddf(y) + 2.0 * dpsi(y) * p.df(y) +
                   ddpsi(y) * (p.f(y) - base);
        };
        return out;
    };
    Profile pa{[&m](double y) { return m.a(y); },
               [&m](double y) { return m.da(y); },
               [&m](double y) { return m.dda(y); }};
    Profile pb{[&m](double y) { return m.b(y); },
               [&m](double y) { return m.db(y); },
               [&m](double y) { return m.ddb(y); }};
    SplitMetric out(m.manifold(), blend(pa, alo), blend(pb, blo),
                    m.tag() + "+cutoff");
    out.mark_product(m.is_product() && m.a(0.0) == alo && m.b(0.0) == blo);
    return out;
}

}  // namespace lmc
