#pragma once

#include <cmath>
#include <vector>

#include "lorentzmorse/path.hpp"

namespace lmc {

struct FlowConfig {
    double lambda = 1.0;   // shift of the auxiliary energy
    double c0 = -1.0;      // activation level for the auxiliary gradient
    double rest_tol = 1e-8;
    double step_init = 1e-2;
    double step_min = 1e-9;
    double step_max = 0.5;
    double err_tol = 1e-6;
    double t_max = 200.0;
    int max_steps = 200000;
};

struct FieldEval {
    PathTangent F;        // bounded descent field in chart coordinates
    double E = 0.0;       // Lorentzian energy
    double E_aux = 0.0;   // shifted energy E_{a,b+lambda}
    double F_norm = 0.0;  // W-norm of F
    double G_norm = 0.0;  // W-norm of the unbounded field
    double chi = 0.0;     // activation weight used
};

// Negative pseudo-gradient: -G = grad E + chi(c0 - E_aux) (|grad E| / |grad E_aux|) grad E_aux,
// normalized to F = G / sqrt(1 + |G|^2).  All norms are W-norms.  E decreases
// along F everywhere; E_aux decreases wherever the activation is saturated.
inline FieldEval pseudo_gradient_F(const SplitMetric& m, const DiscretePath& p,
                                   const PathChart& chart,
                                   const FlowConfig& cfg) {
    FieldEval out;
    out.E = path_energy(m, p);
    out.E_aux = path_energy(m, p, cfg.lambda);

    detail::WSolver W(p, chart);
    PathTangent dE = path_denergy(m, p, chart, 0.0);
    Vec bE = dE.stacked();
    Vec vE = W.solve(bE);
    double nE2 = std::max(bE.dot(vE), 0.0);  // |grad E|_W^2 = dE . grad E
    double nE = std::sqrt(nE2);

    out.chi = smoothstep5(cfg.c0 - out.E_aux);
    Vec vG;
    double g2;
    if (out.chi > 0.0) {
        Vec bA = path_denergy(m, p, chart, cfg.lambda).stacked();
        Vec vA = W.solve(bA);
        double nA2 = std::max(bA.dot(vA), 0.0);
        double nA = std::sqrt(nA2);
        double c = (nA > 0.0) ? out.chi * (nE / nA) : 0.0;
        vG = -(vE + c * vA);
        g2 = nE2 + 2.0 * c * bE.dot(vA) + c * c * nA2;
    } else {
        vG = -vE;
        g2 = nE2;
    }
    out.G_norm = std::sqrt(std::max(g2, 0.0));
    Vec vF = vG / std::sqrt(1.0 + out.G_norm * out.G_norm);
    out.F = PathTangent::split(vF, static_cast<int>(dE.xi.size()), p.N());
    out.F_norm = out.G_norm / std::sqrt(1.0 + out.G_norm * out.G_norm);
    return out;
}

struct FlowSample {
    double t, E, E_aux, F_norm;
};

struct FlowResult {
    DiscretePath end;
    bool converged = false;   // reached a rest point (|F| <= rest_tol)
    double t = 0.0;
    int steps = 0, rejected = 0;
    std::vector<FlowSample> trace;
};

namespace detail {

// ambient velocity of a chart tangent (frame columns times components)
inline Vec ambient_velocity(const DiscretePath& p, const PathChart& chart,
                            const PathTangent& t) {
    const Manifold& M = p.manifold();
    int d = M.ambient_dim(), n = M.dim(), N = p.N();
    Vec v(d * N + N);
    for (int j = 1; j <= N; ++j)
        v.segment((j - 1) * d, d) =
            chart.frame(j) * t.xi.segment((j - 1) * n, n);
    v.tail(N) = t.eta;
    return v;
}

}  // namespace detail

// Integrate the bounded descent flow with an adaptive Heun scheme in the
// flattened node coordinates (projective retraction after each step).  Steps
// that would raise the energy are rejected.
inline FlowResult flow(const SplitMetric& m, DiscretePath p,
                       const FlowConfig& cfg) {
    FlowResult out{p};
    double h = cfg.step_init, t = 0.0;
    PathChart chart(p);
    FieldEval f = pseudo_gradient_F(m, p, chart, cfg);
    out.trace.push_back({t, f.E, f.E_aux, f.F_norm});
    while (t < cfg.t_max && out.steps + out.rejected < cfg.max_steps) {
        if (f.F_norm <= cfg.rest_tol) {
            out.converged = true;
            break;
        }
        Vec u = p.flatten();
        Vec k1 = detail::ambient_velocity(p, chart, f.F);
        DiscretePath p1 = p;
        p1.unflatten(u + h * k1);
        PathChart chart1(p1);
        FieldEval f1 = pseudo_gradient_F(m, p1, chart1, cfg);
        Vec k2 = detail::ambient_velocity(p1, chart1, f1.F);
        double err = 0.5 * h * (k2 - k1).norm();
        DiscretePath p2 = p;
        p2.unflatten(u + 0.5 * h * (k1 + k2));
        PathChart chart2(p2);
        FieldEval f2 = pseudo_gradient_F(m, p2, chart2, cfg);
        bool ok = err <= cfg.err_tol && f2.E <= f.E + 1e-12;
        if (ok) {
            p = std::move(p2);
            chart = std::move(chart2);
            f = f2;
            t += h;
            ++out.steps;
            out.trace.push_back({t, f.E, f.E_aux, f.F_norm});
        } else {
            ++out.rejected;
        }
        double grow;
        if (!ok)
            grow = 0.5;
        else if (err > 0.0)
            grow = std::clamp(0.9 * std::sqrt(cfg.err_tol / err), 0.2, 2.0);
        else
            grow = 1.5;
        h = std::clamp(h * grow, cfg.step_min, cfg.step_max);
        if (!ok && h <= cfg.step_min) break;
    }
    out.end = std::move(p);
    out.t = t;
    return out;
}

}  // namespace lmc
