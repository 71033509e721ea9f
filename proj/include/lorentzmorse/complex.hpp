#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lorentzmorse/flowfield.hpp"
#include "lorentzmorse/flowlines.hpp"
#include "lorentzmorse/index.hpp"
#include "lorentzmorse/snf.hpp"

namespace lmc {

enum class CoeffMode { Z, Z2 };

// Descent system on the flattened node coordinates of the discrete path
// space; wraps the bounded pseudo-gradient field.
inline DescentSystem path_system(const SplitMetric& m, DiscretePath tmpl,
                                 FlowConfig fc) {
    DescentSystem sys;
    sys.dim = static_cast<int>(tmpl.flatten().size());
    sys.F = [m, tmpl, fc](const Vec& u) {
        DiscretePath p = tmpl;
        p.unflatten(u);
        PathChart chart(p);
        auto f = pseudo_gradient_F(m, p, chart, fc);
        return detail::ambient_velocity(p, chart, f.F);
    };
    sys.E = [m, tmpl](const Vec& u) {
        DiscretePath p = tmpl;
        p.unflatten(u);
        return path_energy(m, p);
    };
    sys.retract = [tmpl](const Vec& u) {
        DiscretePath p = tmpl;
        p.unflatten(u);
        return p.flatten();
    };
    return sys;
}

// Rest point of the path system built from a solved geodesic: the record is
// refined to a discrete critical point and graded; the unstable frame spans
// the negative directions beyond the y-sector (those with dominant base
// components), per the product splitting of the relative grading.
inline RestPoint rest_point_from_record(const SplitMetric& m,
                                        const GeodesicRecord& rec, int N,
                                        int id) {
    DiscretePath p = refine_to_critical(m, path_from_record(m, rec, N));
    PathChart chart(p);
    Mat H = path_hessian(m, p, chart);
    Mat W = w_matrix(p, chart);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(H, W);
    if (ges.info() != Eigen::Success)
        throw std::runtime_error("rest_point_from_record: eigensolve failed");
    const Vec& ev = ges.eigenvalues();
    int n = m.manifold().dim();
    int nxi = n * N;
    struct NegDir {
        double y_frac;
        Vec v;
    };
    std::vector<NegDir> negs;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) >= 0.0) continue;
        Vec v = ges.eigenvectors().col(i);
        double xi2 = v.head(nxi).squaredNorm();
        double eta2 = v.tail(N).squaredNorm();
        negs.push_back({eta2 / (xi2 + eta2), v});
    }
    int i_rel = static_cast<int>(negs.size()) - N;
    if (i_rel < 0)
        throw std::runtime_error(
            "rest_point_from_record: fewer negatives than the y-sector");
    std::sort(negs.begin(), negs.end(),
              [](const NegDir& a, const NegDir& b) {
                  return a.y_frac < b.y_frac;
              });

    RestPoint r;
    r.id = id;
    r.u = p.flatten();
    r.index = i_rel;
    r.E = path_energy(m, p);
    int dim = static_cast<int>(r.u.size());
    r.unstable_frame = Mat::Zero(dim, i_rel);
    for (int c = 0; c < i_rel; ++c) {
        PathTangent t = PathTangent::split(negs[c].v, nxi, N);
        Vec amb = detail::ambient_velocity(p, chart, t);
        // Gram-Schmidt in the flattened coordinates
        for (int c2 = 0; c2 < c; ++c2)
            amb -= r.unstable_frame.col(c2).dot(amb) * r.unstable_frame.col(c2);
        r.unstable_frame.col(c) = amb / amb.norm();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Morse complex data

struct CensusEntry {
    int from = -1, to = -1;  // generator ids
    std::vector<FlowOrbit> orbits;
    bool transversality_flag = false;
    bool count_stable = true;
};

struct MorseComplexData {
    CoeffMode coeff = CoeffMode::Z2;
    std::map<int, std::vector<int>> generators;  // index -> record ids
    std::vector<int> gen_index;                  // per record id
    std::vector<double> gen_energy;
    ChainComplex chain;                          // dims + boundary matrices
    std::vector<CensusEntry> census;
    int validity_window = 0;
};

struct BoundaryIntegrityError : std::runtime_error {
    BoundaryIntegrityError(int k, int row, int col)
        : std::runtime_error("boundary square nonzero at degree " +
                             std::to_string(k) + " entry (" +
                             std::to_string(row) + "," + std::to_string(col) +
                             ")"),
          degree(k),
          row(row),
          col(col) {}
    int degree, row, col;
};

// Populate the boundary matrices from the census and verify d^2 = 0 exactly
// over the chosen coefficients.
inline void assemble_boundary(MorseComplexData& data) {
    int K = data.chain.top();
    for (int k = 1; k <= K; ++k) {
        const auto gk = data.generators.find(k);
        const auto gk1 = data.generators.find(k - 1);
        int rows = (gk1 == data.generators.end())
                       ? 0
                       : static_cast<int>(gk1->second.size());
        int cols = (gk == data.generators.end())
                       ? 0
                       : static_cast<int>(gk->second.size());
        data.chain.boundary[k] = int_matrix(rows, cols);
    }
    auto pos_in = [&](int k, int id) {
        const auto& v = data.generators.at(k);
        for (size_t i = 0; i < v.size(); ++i)
            if (v[i] == id) return static_cast<int>(i);
        throw std::logic_error("assemble_boundary: generator not listed");
    };
    for (const auto& ce : data.census) {
        int k = data.gen_index[ce.from];
        int row = pos_in(k - 1, ce.to), col = pos_in(k, ce.from);
        BigInt count = 0;
        for (const auto& o : ce.orbits) count += o.sign;
        if (data.coeff == CoeffMode::Z2)
            count = static_cast<int>(ce.orbits.size() % 2);
        data.chain.boundary[k][row][col] = count;
    }
    for (int k = 2; k <= K; ++k) {
        IntMat sq = mat_mul(data.chain.boundary[k - 1], data.chain.boundary[k]);
        for (int i = 0; i < mat_rows(sq); ++i)
            for (int j = 0; j < mat_cols(sq); ++j) {
                BigInt v = sq[i][j];
                if (data.coeff == CoeffMode::Z2) v %= 2;
                if (v != 0) throw BoundaryIntegrityError(k, i, j);
            }
    }
}

struct HomologyResult {
    CoeffMode coeff = CoeffMode::Z2;
    std::vector<HomologyGroup> groups;
    int validity_window = 0;
};

inline HomologyResult complex_homology(const MorseComplexData& data) {
    HomologyResult out;
    out.coeff = data.coeff;
    out.validity_window = data.validity_window;
    if (data.coeff == CoeffMode::Z) {
        out.groups = homology(data.chain);
    } else {
        auto b = mod2_betti(data.chain);
        out.groups.resize(b.size());
        for (size_t i = 0; i < b.size(); ++i) out.groups[i].betti = b[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Building the complex from solved geodesics

struct ComplexBuildConfig {
    int N = 32;
    CoeffMode coeff = CoeffMode::Z2;
    double cap = 10.0;
    FlowConfig flow;
    FlowLineConfig lines;
    bool compute_indices = true;  // false: trust the records' index data
};

inline MorseComplexData build_complex(const SplitMetric& m,
                                      std::vector<GeodesicRecord>& records,
                                      const GammaBounds& g,
                                      ComplexBuildConfig cfg) {
    cfg.flow.lambda = g.lambda;
    cfg.flow.c0 = g.c0;
    MorseComplexData data;
    data.coeff = cfg.coeff;
    if (records.empty()) {
        data.chain.dims = {0};
        data.validity_window = -1;  // empty window
        return data;
    }

    std::vector<RestPoint> rest;
    int max_idx = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        if (cfg.compute_indices)
            records[i].index = compute_index(m, records[i], cfg.N);
        auto r = rest_point_from_record(m, records[i], cfg.N,
                                        static_cast<int>(i));
        if (cfg.compute_indices && r.index != records[i].index.i_con)
            throw std::runtime_error(
                "build_complex: grading disagreement between routes");
        rest.push_back(std::move(r));
        max_idx = std::max(max_idx, rest.back().index);
    }
    data.gen_index.resize(records.size());
    data.gen_energy.resize(records.size());
    for (const auto& r : rest) {
        data.generators[r.index].push_back(r.id);
        data.gen_index[r.id] = r.index;
        data.gen_energy[r.id] = r.E;
    }
    data.chain.dims.assign(max_idx + 1, 0);
    for (const auto& [k, v] : data.generators)
        data.chain.dims[k] = static_cast<int>(v.size());

    // validity window: all generators through degree k+1 must sit below the
    // cap by at least one observed energy gap
    std::vector<double> es(data.gen_energy);
    std::sort(es.begin(), es.end());
    double gap = 0.0;
    for (size_t i = 1; i < es.size(); ++i)
        if (es[i] - es[i - 1] > 1e-9) {
            gap = (gap == 0.0) ? es[i] - es[i - 1]
                               : std::min(gap, es[i] - es[i - 1]);
        }
    data.validity_window = max_idx;
    for (int k = 0; k <= max_idx; ++k) {
        bool ok = true;
        for (const auto& r : rest)
            if (r.index <= k + 1 && r.E > cfg.cap - gap) ok = false;
        if (!ok) {
            data.validity_window = k - 1;
            break;
        }
    }

    // census over index-difference-one pairs
    DiscretePath tmpl(m.manifold(), cfg.N, records[0].x0, records[0].x1,
                      records[0].y0, records[0].y1);
    auto sys = path_system(m, tmpl, cfg.flow);
    for (const auto& z : rest) {
        if (z.index < 1) continue;
        for (const auto& zp : rest) {
            if (zp.index != z.index - 1) continue;
            auto fl = find_flow_lines(sys, z, zp, rest, cfg.lines);
            CensusEntry ce;
            ce.from = z.id;
            ce.to = zp.id;
            ce.orbits = fl.orbits;
            ce.transversality_flag = fl.transversality_flag;
            ce.count_stable = fl.count_stable;
            data.census.push_back(std::move(ce));
        }
    }
    assemble_boundary(data);
    return data;
}

// ---------------------------------------------------------------------------
// Reference loop-space homology tables

struct ComparisonReport {
    bool supported = true;
    bool match = true;
    bool morse_inequalities = true;
    bool window_empty = false;
    std::vector<int> expected_betti, got_betti;
    std::string note;
};

// Per-degree comparison against the classical loop-space homology of the
// base: Omega(S^1) and Omega(T^2) contribute one class in degree 0 per
// reachable component; Omega(S^2) one class in every degree of the window.
inline ComparisonReport compare_reference(const HomologyResult& H,
                                          const MorseComplexData& data,
                                          const Manifold& base) {
    ComparisonReport rep;
    if (data.validity_window < 0 || data.gen_index.empty()) {
        rep.window_empty = true;
        rep.note = "window empty";
        return rep;
    }
    int K = data.validity_window;
    rep.expected_betti.assign(K + 1, 0);
    switch (base.kind()) {
        case ManifoldKind::Circle:
        case ManifoldKind::FlatTorus2: {
            auto it = data.generators.find(0);
            rep.expected_betti[0] =
                (it == data.generators.end())
                    ? 0
                    : static_cast<int>(it->second.size());
            break;
        }
        case ManifoldKind::RoundSphere2:
            for (int k = 0; k <= K; ++k) rep.expected_betti[k] = 1;
            break;
    }
    rep.got_betti.assign(K + 1, 0);
    for (int k = 0; k <= K && k < static_cast<int>(H.groups.size()); ++k)
        rep.got_betti[k] = H.groups[k].betti;
    for (int k = 0; k <= K; ++k) {
        if (rep.got_betti[k] != rep.expected_betti[k]) rep.match = false;
        int ck = (k < static_cast<int>(data.chain.dims.size()))
                     ? data.chain.dims[k]
                     : 0;
        if (ck < rep.got_betti[k]) rep.morse_inequalities = false;
        if (k < static_cast<int>(H.groups.size()) &&
            !H.groups[k].torsion.empty())
            rep.match = false;  // loop spaces here are torsion-free
    }
    return rep;
}

// ---------------------------------------------------------------------------
// C0-perturbation invariance

inline double vicino2_radius(const GammaBounds& g) {
    return g.lambda * g.alpha_lo / (2.0 * g.alpha_lo + 2.0 * g.beta_hi +
                                    g.lambda);
}

struct InvarianceReport {
    double distance = 0.0;    // C0 distance of the metric pair
    double radius = 0.0;      // admissible bound
    bool equal = true;        // per-degree Betti/torsion equality
    int common_window = 0;
    std::vector<int> betti0, betti1;
};

inline double metric_c0_distance(const SplitMetric& m0, const SplitMetric& m1,
                                 double s0, int samples = 2001) {
    double d = 0.0;
    for (int i = 0; i < samples; ++i) {
        double y = -(s0 + 1.0) + 2.0 * (s0 + 1.0) * i / (samples - 1);
        d = std::max(d, std::abs(m0.a(y) - m1.a(y)));
        d = std::max(d, std::abs(m0.b(y) - m1.b(y)));
    }
    return d;
}

// Build both complexes and compare homology within the common window.
// Refuses (with the admissible radius in the message) when the pair is not
// C0-close enough for the continuation argument.
inline InvarianceReport perturbation_invariance(
    const SplitMetric& m0, const SplitMetric& m1, const GammaBounds& g,
    const EndpointPair& ep, const SearchSpec& search,
    ComplexBuildConfig cfg) {
    InvarianceReport rep;
    rep.distance = metric_c0_distance(m0, m1, g.s0);
    rep.radius = vicino2_radius(g);
    if (rep.distance >= rep.radius) {
        std::ostringstream os;
        os << "perturbation_invariance: C0 distance " << rep.distance
           << " exceeds the admissible radius " << rep.radius;
        throw std::invalid_argument(os.str());
    }
    auto recs0 = solve_bvp(m0, ep, g, search);
    auto recs1 = solve_bvp(m1, ep, g, search);
    auto c0x = build_complex(m0, recs0, g, cfg);
    auto c1x = build_complex(m1, recs1, g, cfg);
    auto h0 = complex_homology(c0x);
    auto h1 = complex_homology(c1x);
    rep.common_window = std::min(c0x.validity_window, c1x.validity_window);
    for (int k = 0; k <= rep.common_window; ++k) {
        int b0 = k < static_cast<int>(h0.groups.size()) ? h0.groups[k].betti
                                                        : 0;
        int b1 = k < static_cast<int>(h1.groups.size()) ? h1.groups[k].betti
                                                        : 0;
        rep.betti0.push_back(b0);
        rep.betti1.push_back(b1);
        if (b0 != b1) rep.equal = false;
        if (cfg.coeff == CoeffMode::Z) {
            auto t0 = k < static_cast<int>(h0.groups.size())
                          ? h0.groups[k].torsion
                          : std::vector<BigInt>{};
            auto t1 = k < static_cast<int>(h1.groups.size())
                          ? h1.groups[k].torsion
                          : std::vector<BigInt>{};
            if (t0 != t1) rep.equal = false;
        }
    }
    return rep;
}

}  // namespace lmc
