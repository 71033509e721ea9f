#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lorentzmorse/manifold.hpp"

namespace lmc {

// A rest point of a descent system, graded by its relative index, carrying
// an orthonormal frame of the unstable directions used for seeding.
struct RestPoint {
    int id = -1;
    Vec u;              // flattened coordinates
    int index = 0;      // relative Morse index
    double E = 0.0;
    Mat unstable_frame; // dim x index, orthonormal
};

// One connecting orbit between two rest points.
struct FlowOrbit {
    int from = -1, to = -1;
    int sign = 1;            // +-1 in integer mode
    Vec seed_dir;            // direction on the unstable sphere
    Vec crossing;            // state at the mid-level set E = (E0+E1)/2
    double miss = 0.0;       // refined closest-approach distance
};

struct FlowLineConfig {
    double seed_radius = 1e-3;
    double rest_tol = 1e-7;
    double match_radius = 5e-3;   // snap radius for limit binning
    double dedup_radius = 1e-3;   // orbit merge radius at the mid-level
    double accept_miss = 2e-4;    // refined miss distance for an orbit
    double step_init = 1e-2;
    double step_max = 0.5;
    double err_tol = 1e-6;
    double t_max = 400.0;
    int max_steps = 400000;
    int scan_1d = 64;             // seeds on S^1
    int scan_2d = 220;            // seeds on S^2
    int refine_sweeps = 60;       // coordinate-descent budget per candidate
    double refine_giveup = 0.5;   // abandon candidates stuck above this
                                  // miss level (relative to the state scale)
    unsigned jitter_seed = 12345;
};

// Descent system interface bundled as callables; F must be globally bounded
// and E strictly decreasing along it away from rest points.
struct DescentSystem {
    int dim = 0;
    std::function<Vec(const Vec&)> F;
    std::function<double(const Vec&)> E;
    std::function<Vec(const Vec&)> retract;  // projection onto the state space
};

namespace detail {

struct FlowOutcome {
    Vec u;
    bool at_rest = false;
    double min_dist = 1e300;  // closest approach to the tracked target
    Vec closest;              // state at closest approach
    std::vector<Vec> states;  // sparse trail for level-crossing lookup
    std::vector<double> energies;
};

// Adaptive Heun descent; optionally tracks the closest approach to `target`
// and stops early once the energy falls below `e_floor`.
inline FlowOutcome flow_descend(const DescentSystem& sys, Vec u,
                                const FlowLineConfig& cfg,
                                const Vec* target = nullptr,
                                double e_floor = -1e300) {
    FlowOutcome out;
    double h = cfg.step_init, t = 0.0;
    Vec f = sys.F(u);
    double eu = sys.E(u);
    int steps = 0;
    auto track = [&](const Vec& s, double e) {
        out.states.push_back(s);
        out.energies.push_back(e);
        if (target) {
            double d = (s - *target).norm();
            if (d < out.min_dist) {
                out.min_dist = d;
                out.closest = s;
            }
        }
    };
    track(u, eu);
    while (t < cfg.t_max && steps < cfg.max_steps) {
        if (f.norm() <= cfg.rest_tol) {
            out.at_rest = true;
            break;
        }
        if (eu < e_floor) break;
        Vec u1 = sys.retract(u + h * f);
        Vec f1 = sys.F(u1);
        double err = 0.5 * h * (f1 - f).norm();
        bool ok = false;
        if (err <= cfg.err_tol) {
            Vec u2 = sys.retract(u + 0.5 * h * (f + f1));
            double e_new = sys.E(u2);
            if (e_new <= eu + 1e-12) {
                ok = true;
                u = u2;
                f = sys.F(u);
                eu = e_new;
                t += h;
                track(u, eu);
            }
        }
        ++steps;
        double grow;
        if (!ok)
            grow = 0.5;
        else if (err > 0.0)
            grow = std::clamp(0.9 * std::sqrt(cfg.err_tol / err), 0.2, 2.0);
        else
            grow = 1.5;
        h = std::clamp(h * grow, 1e-10, cfg.step_max);
    }
    out.u = u;
    return out;
}

// nearest rest point within the match radius (scaled by state norm)
inline int bin_limit(const Vec& u, const std::vector<RestPoint>& rest,
                     double radius) {
    int best = -1;
    double bd = 1e300;
    for (const auto& r : rest) {
        double d = (u - r.u).norm();
        if (d < bd) {
            bd = d;
            best = r.id;
        }
    }
    double scale = std::max(1.0, u.norm());
    return (bd <= radius * scale * 10.0) ? best : -1;
}

// state at the first crossing of the level E = level (linear interpolation
// between the recorded trail states)
inline Vec level_crossing(const FlowOutcome& fo, double level) {
    for (size_t i = 1; i < fo.energies.size(); ++i) {
        if (fo.energies[i - 1] >= level && fo.energies[i] < level) {
            double a = fo.energies[i - 1], b = fo.energies[i];
            double w = (a - level) / std::max(a - b, 1e-300);
            return (1.0 - w) * fo.states[i - 1] + w * fo.states[i];
        }
    }
    return fo.states.back();
}

// uniform-ish directions on S^{k-1}
inline std::vector<Vec> sphere_grid(int k, const FlowLineConfig& cfg) {
    std::vector<Vec> out;
    if (k == 1) {
        out.push_back(Vec::Constant(1, 1.0));
        out.push_back(Vec::Constant(1, -1.0));
    } else if (k == 2) {
        for (int i = 0; i < cfg.scan_1d; ++i) {
            double th = 2.0 * M_PI * i / cfg.scan_1d;
            Vec c(2);
            c << std::cos(th), std::sin(th);
            out.push_back(c);
        }
    } else if (k == 3) {
        // Fibonacci sphere
        double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < cfg.scan_2d; ++i) {
            double z = 1.0 - 2.0 * (i + 0.5) / cfg.scan_2d;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vec c(3);
            c << r * std::cos(ga * i), r * std::sin(ga * i), z;
            out.push_back(c);
        }
    } else {
        throw std::invalid_argument(
            "find_flow_lines: unstable dimension above the supported window");
    }
    return out;
}

}  // namespace detail

struct FlowLineResult {
    std::vector<FlowOrbit> orbits;
    bool transversality_flag = false;  // a seed limited onto index >= source
    bool count_stable = true;          // stable under seed/merge jitter
};

// Count the connecting orbits from z down to z_prime (index difference one)
// by scanning the unstable sphere of z for directions whose trajectories pass
// through z_prime, refining each candidate by minimizing the closest-approach
// distance, and deduplicating accepted orbits by their crossing point on the
// intermediate level set.
inline FlowLineResult find_flow_lines(const DescentSystem& sys,
                                      const RestPoint& z,
                                      const RestPoint& z_prime,
                                      const std::vector<RestPoint>& all_rest,
                                      const FlowLineConfig& cfg) {
    if (z.index != z_prime.index + 1)
        throw std::invalid_argument(
            "find_flow_lines: index difference must be one");
    int k = z.index;
    if (k < 1) throw std::invalid_argument("find_flow_lines: source index 0");

    double level = 0.5 * (z.E + z_prime.E);
    double e_floor = z_prime.E - 0.25 * std::abs(z.E - z_prime.E) - 1e-6;

    auto launch = [&](const Vec& c, double radius) {
        Vec dir = z.unstable_frame * (c / c.norm());
        return sys.retract(z.u + radius * dir);
    };
    auto miss = [&](const Vec& c, double radius) {
        auto fo = detail::flow_descend(sys, launch(c, radius), cfg,
                                       &z_prime.u, e_floor);
        return fo;
    };

    FlowLineResult res;
    auto run_pass = [&](double radius, double dedup) {
        std::vector<FlowOrbit> orbits;
        bool trans_flag = false;
        auto grid = detail::sphere_grid(k, cfg);

        std::vector<std::pair<double, Vec>> candidates;
        for (const auto& c : grid) {
            auto fo = miss(c, radius);
            if (fo.at_rest) {
                int lim = detail::bin_limit(fo.u, all_rest, cfg.match_radius);
                if (lim >= 0 && all_rest[lim].index >= z.index)
                    trans_flag = true;
            }
            candidates.push_back({fo.min_dist, c});
        }
        // local minima of the sampled miss distance (k=1: both seeds count)
        std::vector<std::pair<double, Vec>> starts;
        if (k == 1) {
            for (auto& [d, c] : candidates) starts.push_back({d, c});
        } else {
            for (size_t i = 0; i < candidates.size(); ++i) {
                double d = candidates[i].first;
                bool is_min = true;
                for (size_t j = 0; j < candidates.size(); ++j) {
                    if (i == j) continue;
                    if ((candidates[j].second - candidates[i].second).norm() <
                            0.45 &&
                        candidates[j].first < d)
                        is_min = false;
                }
                if (is_min) starts.push_back(candidates[i]);
            }
        }

        double scale_ref = std::max(1.0, z.u.norm());
        double good = 0.5 * cfg.accept_miss * scale_ref;
        for (const auto& [d0, c0] : starts) {
            // coordinate descent on the seed sphere (k=1: nothing to refine);
            // stops early once the miss is comfortably below the acceptance
            // threshold
            Vec c = c0;
            double best = d0;
            if (k >= 2 && best > good) {
                double scale = 0.2;
                for (int sweep = 0;
                     sweep < cfg.refine_sweeps && scale > 1e-10; ++sweep) {
                    bool improved = false;
                    for (int a = 0; a < k; ++a) {
                        for (double s : {scale, -scale}) {
                            Vec ct = c;
                            ct(a) += s;
                            ct /= ct.norm();
                            double d = miss(ct, radius).min_dist;
                            if (d < best) {
                                best = d;
                                c = ct;
                                improved = true;
                            }
                        }
                    }
                    if (best <= good) break;
                    if (sweep >= 4 && best > cfg.refine_giveup * scale_ref)
                        break;  // no connecting orbit near this candidate
                    if (!improved) scale *= 0.5;
                }
            }
            auto fo = miss(c, radius);
            if (fo.min_dist > cfg.accept_miss * scale_ref) continue;
            FlowOrbit orb;
            orb.from = z.id;
            orb.to = z_prime.id;
            // one-dimensional unstable spheres carry the orientation sign;
            // higher ranks are counted mod 2 (see complex assembly)
            orb.sign = (k == 1 && c(0) < 0) ? -1 : 1;
            orb.seed_dir = c;
            orb.miss = fo.min_dist;
            orb.crossing = detail::level_crossing(fo, level);
            bool dup = false;
            for (const auto& o : orbits)
                if ((o.crossing - orb.crossing).norm() < dedup) dup = true;
            if (!dup) orbits.push_back(orb);
        }
        return std::make_pair(orbits, trans_flag);
    };

    auto [orbits, flag] = run_pass(cfg.seed_radius, cfg.dedup_radius);
    res.orbits = orbits;
    res.transversality_flag = flag;
    // stability probe: jitter the seed radius and the merge radius
    auto [orbits2, flag2] = run_pass(cfg.seed_radius * 1.3,
                                     cfg.dedup_radius * 0.5);
    res.count_stable = (orbits2.size() == orbits.size());
    res.transversality_flag = flag || flag2;
    return res;
}

}  // namespace lmc
