#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lorentzmorse/metric.hpp"
#include "lorentzmorse/ode.hpp"

namespace lmc {

// State layout for the geodesic flow on X x R:
//   u = [x (d), y, xi = x' (d), eta = y'],  d = ambient dim of X.
struct GeodesicState {
    Vec x;
    double y;
    Vec xi;
    double eta;

    static GeodesicState unpack(const Vec& u, int d) {
        GeodesicState s;
        s.x = u.segment(0, d);
        s.y = u(d);
        s.xi = u.segment(d + 1, d);
        s.eta = u(2 * d + 1);
        return s;
    }
    Vec pack() const {
        int d = static_cast<int>(x.size());
        Vec u(2 * d + 2);
        u.segment(0, d) = x;
        u(d) = y;
        u.segment(d + 1, d) = xi;
        u(2 * d + 1) = eta;
        return u;
    }
};

// Pointwise Lorentzian energy (1/2) a|x'|^2 - (1/2) b|y'|^2; constant along
// geodesics.
inline double pointwise_energy(const SplitMetric& m, const GeodesicState& s) {
    return 0.5 * m.a(s.y) * s.xi.squaredNorm() -
           0.5 * m.b(s.y) * s.eta * s.eta;
}

// Right-hand side of the geodesic equations.  For alpha = a(y) I the
// x-equation reads nabla_t x' = -(a'/a) y' x' (plus the sphere constraint
// term in ambient coordinates); the y-equation is
//   y'' = -(a'(y)|x'|^2 + b'(y)|y'|^2) / (2 b(y)).
inline Vec geodesic_rhs(const SplitMetric& m, double /*t*/, const Vec& u) {
    int d = m.manifold().ambient_dim();
    GeodesicState s = GeodesicState::unpack(u, d);
    double a = m.a(s.y), da = m.da(s.y);
    double b = m.b(s.y), db = m.db(s.y);
    Vec xacc = -(da / a) * s.eta * s.xi;
    if (m.manifold().kind() == ManifoldKind::RoundSphere2)
        xacc -= s.xi.squaredNorm() * s.x;
    double yacc = -(0.5 * da * s.xi.squaredNorm() +
                    0.5 * db * s.eta * s.eta) / b;
    GeodesicState ds;
    ds.x = s.xi;
    ds.y = s.eta;
    ds.xi = xacc;
    ds.eta = yacc;
    return ds.pack();
}

struct Trajectory {
    Dopri5::Solution sol;
    int d = 1;  // ambient dim

    GeodesicState at(double t) const {
        return GeodesicState::unpack(sol.eval(t), d);
    }
    GeodesicState end() const { return GeodesicState::unpack(sol.y_end, d); }
};

// Integrate the geodesic initial value problem over [0,1].
// Sphere states are re-projected after every accepted step; a drift beyond
// 1e-9 before projection is an integration failure.
inline Trajectory integrate_ivp(const SplitMetric& m, const Vec& x0, double y0,
                                const Vec& v0, double eta0,
                                double tol = 1e-11) {
    const Manifold& M = m.manifold();
    if (!M.valid_point(x0))
        throw std::domain_error("integrate_ivp: invalid start point");
    if (tol <= 0) throw std::invalid_argument("integrate_ivp: tol must be > 0");
    int d = M.ambient_dim();
    GeodesicState s0;
    s0.x = x0;
    s0.y = y0;
    s0.xi = M.project_tangent(x0, v0);
    s0.eta = eta0;

    Dopri5 ode;
    ode.rtol = tol;
    ode.atol = tol * 1e-2;
    std::function<void(Vec&)> project = nullptr;
    if (M.kind() == ManifoldKind::RoundSphere2) {
        project = [d](Vec& u) {
            Vec x = u.segment(0, d);
            double n = x.norm();
            if (std::abs(n - 1.0) > 1e-9)
                throw std::runtime_error(
                    "integrate_ivp: sphere constraint violated");
            x /= n;
            Vec xi = u.segment(d + 1, d);
            xi -= x.dot(xi) * x;
            u.segment(0, d) = x;
            u.segment(d + 1, d) = xi;
        };
    }
    auto rhs = [&m](double t, const Vec& u) { return geodesic_rhs(m, t, u); };
    Trajectory tr;
    tr.d = d;
    tr.sol = Dopri5{ode}.integrate(rhs, 0.0, 1.0, s0.pack(), project);
    return tr;
}

// Max pointwise-energy drift over a uniform sample of the dense output.
inline double energy_drift(const SplitMetric& m, const Trajectory& tr,
                           int samples = 200) {
    double c = pointwise_energy(m, tr.at(0.0));
    double drift = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double t = static_cast<double>(i) / samples;
        drift = std::max(drift, std::abs(pointwise_energy(m, tr.at(t)) - c));
    }
    return drift;
}

// One inequality of a bound report: lhs <= rhs with measured slack.
struct BoundCheck {
    std::string id;
    double lhs = 0.0, rhs = 0.0;
    double slack() const { return rhs - lhs; }
    bool holds(double tol = 0.0) const { return lhs <= rhs + tol; }
};

struct IndexData {
    int i_con = 0;
    int i_disc = 0;
    bool agreement = false;
    bool nondegenerate = false;
    bool certified = false;  // both routes completed
    int mesh_N = 0;
    std::vector<double> conjugate_times;
};

struct GeodesicRecord {
    int id = -1;
    Vec x0, x1;          // endpoint base points (unwrapped coords / unit vecs)
    double y0 = 0, y1 = 0;
    Vec v0;              // initial x-velocity (ambient)
    double eta0 = 0;     // initial y-velocity
    double energy = 0;
    double residual = 0; // endpoint map residual after refinement
    std::vector<int> winding;  // circle/torus only
    IndexData index;
    std::vector<BoundCheck> bound_report;
    // dense samples of the solved path on a uniform grid (for later stages)
    std::vector<Vec> x_samples;
    std::vector<double> y_samples;
    std::vector<double> eta_samples;
};

}  // namespace lmc
