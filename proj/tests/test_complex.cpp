#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lorentzmorse/complex.hpp"
#include "lorentzmorse/shooting.hpp"

using namespace lmc;

namespace {

// Finite-dimensional stand-in with the product splitting of the grading:
// minima in x, a negative quadratic in y, relative index = x-Morse index.
DescentSystem quartic_system(int nx) {
    DescentSystem sys;
    sys.dim = nx + 1;
    auto grad = [nx](const Vec& u) {
        Vec g(nx + 1);
        for (int i = 0; i < nx; ++i)
            g(i) = 4.0 * u(i) * (u(i) * u(i) - 1.0);
        g(nx) = -4.0 * u(nx);
        return g;
    };
    sys.F = [grad](const Vec& u) {
        Vec g = grad(u);
        return Vec(-g / std::sqrt(1.0 + g.squaredNorm()));
    };
    sys.E = [nx](const Vec& u) {
        double e = 0.0;
        for (int i = 0; i < nx; ++i)
            e += std::pow(u(i) * u(i) - 1.0, 2);
        return e - 2.0 * u(nx) * u(nx);
    };
    sys.retract = [](const Vec& u) { return u; };
    return sys;
}

RestPoint make_rest(int id, std::vector<double> x, int index,
                    const DescentSystem& sys) {
    RestPoint r;
    r.id = id;
    r.u = Vec::Zero(static_cast<int>(x.size()) + 1);
    for (size_t i = 0; i < x.size(); ++i) r.u(i) = x[i];
    r.index = index;
    r.E = sys.E(r.u);
    r.unstable_frame = Mat::Zero(r.u.size(), index);
    int c = 0;
    for (size_t i = 0; i < x.size() && c < index; ++i)
        if (x[i] == 0.0) r.unstable_frame(i, c++) = 1.0;
    return r;
}

}  // namespace

TEST_CASE("double well heteroclinics are counted with signs") {
    auto sys = quartic_system(1);
    std::vector<RestPoint> rest = {make_rest(0, {-1.0}, 0, sys),
                                   make_rest(1, {1.0}, 0, sys),
                                   make_rest(2, {0.0}, 1, sys)};
    FlowLineConfig cfg;
    auto toA = find_flow_lines(sys, rest[2], rest[0], rest, cfg);
    auto toB = find_flow_lines(sys, rest[2], rest[1], rest, cfg);
    REQUIRE(toA.orbits.size() == 1);
    REQUIRE(toB.orbits.size() == 1);
    CHECK(toA.count_stable);
    CHECK(toB.count_stable);
    CHECK(!toA.transversality_flag);
    // opposite departure directions carry opposite signs
    CHECK(toA.orbits[0].sign * toB.orbits[0].sign == -1);
    // crossing points sit on the mid level set E = 1/2
    CHECK(sys.E(toA.orbits[0].crossing) ==
          doctest::Approx(0.5).epsilon(1e-2));
    CHECK(toA.orbits[0].miss <= 1e-5);
}

TEST_CASE("two-dimensional saddle census closes the complex") {
    auto sys = quartic_system(2);
    std::vector<RestPoint> rest;
    int id = 0;
    for (double a : {-1.0, 1.0})
        for (double b : {-1.0, 1.0})
            rest.push_back(make_rest(id++, {a, b}, 0, sys));
    for (double a : {-1.0, 1.0}) {
        rest.push_back(make_rest(id++, {0.0, a}, 1, sys));
        rest.push_back(make_rest(id++, {a, 0.0}, 1, sys));
    }
    rest.push_back(make_rest(id++, {0.0, 0.0}, 2, sys));

    FlowLineConfig cfg;
    MorseComplexData data;
    data.coeff = CoeffMode::Z2;
    for (const auto& r : rest) {
        data.generators[r.index].push_back(r.id);
        data.gen_index.push_back(r.index);
        data.gen_energy.push_back(r.E);
    }
    data.chain.dims = {4, 4, 1};
    for (const auto& z : rest) {
        if (z.index < 1) continue;
        for (const auto& zp : rest) {
            if (zp.index != z.index - 1) continue;
            auto fl = find_flow_lines(sys, z, zp, rest, cfg);
            CHECK(fl.count_stable);
            CensusEntry ce;
            ce.from = z.id;
            ce.to = zp.id;
            ce.orbits = fl.orbits;
            data.census.push_back(ce);
        }
    }
    // the top saddle connects to each index-1 point along one axis ray
    int top_orbits = 0, saddle_orbits = 0;
    for (const auto& ce : data.census) {
        if (data.gen_index[ce.from] == 2) {
            CHECK(ce.orbits.size() == 1);
            top_orbits += static_cast<int>(ce.orbits.size());
        } else {
            // a saddle connects to the two minima sharing its frozen axis
            CHECK(ce.orbits.size() <= 1);
            saddle_orbits += static_cast<int>(ce.orbits.size());
        }
    }
    CHECK(top_orbits == 4);
    CHECK(saddle_orbits == 8);
    assemble_boundary(data);  // throws on a broken square
    auto H = complex_homology(data);
    // plane-like x-factor: contractible mod-2 homology
    REQUIRE(H.groups.size() == 3);
    CHECK(H.groups[0].betti == 1);
    CHECK(H.groups[1].betti == 0);
    CHECK(H.groups[2].betti == 0);
}

TEST_CASE("signed double-well complex squares to zero over the integers") {
    auto sys = quartic_system(1);
    std::vector<RestPoint> rest = {make_rest(0, {-1.0}, 0, sys),
                                   make_rest(1, {1.0}, 0, sys),
                                   make_rest(2, {0.0}, 1, sys)};
    FlowLineConfig cfg;
    MorseComplexData data;
    data.coeff = CoeffMode::Z;
    data.generators[0] = {0, 1};
    data.generators[1] = {2};
    data.gen_index = {0, 0, 1};
    data.gen_energy = {0.0, 0.0, 1.0};
    data.chain.dims = {2, 1};
    for (int target : {0, 1}) {
        CensusEntry ce;
        ce.from = 2;
        ce.to = target;
        ce.orbits = find_flow_lines(sys, rest[2], rest[target], rest, cfg)
                        .orbits;
        data.census.push_back(ce);
    }
    assemble_boundary(data);
    // boundary (+1, -1) up to global sign: homology of the line
    auto H = complex_homology(data);
    CHECK(H.groups[0].betti == 1);
    CHECK(H.groups[1].betti == 0);
    CHECK(H.groups[0].torsion.empty());
}

TEST_CASE("flat cylinder complex: empty census, per-winding classes") {
    SplitMetric m = product_metric(Manifold(ManifoldKind::Circle));
    EndpointPair ep;
    ep.x0 = Vec::Constant(1, 0.0);
    ep.x1 = Vec::Constant(1, std::numbers::pi / 2);
    ep.y0 = 0.0;
    ep.y1 = 0.3;
    GammaBounds g;
    g.s0 = 1.0;
    g = derive_constants(g, ep.y0, ep.y1);
    SearchSpec spec;
    spec.c_max = 30.0;
    spec.halton_seeds = 0;
    auto recs = solve_bvp(m, ep, g, spec);
    REQUIRE(recs.size() == 2);

    ComplexBuildConfig cfg;
    cfg.N = 16;
    cfg.cap = spec.c_max;
    auto data = build_complex(m, recs, g, cfg);
    CHECK(data.census.empty());
    CHECK(data.generators.at(0).size() == 2);
    CHECK(data.chain.dims == std::vector<int>{2});
    auto H = complex_homology(data);
    auto rep = compare_reference(H, data, m.manifold());
    CHECK(rep.match);
    CHECK(rep.morse_inequalities);
    CHECK(H.groups[0].betti == 2);
}

TEST_CASE("sphere complex under a low cap: two generators, even census") {
    SplitMetric m = product_metric(Manifold(ManifoldKind::RoundSphere2));
    EndpointPair ep;
    ep.x0 = Vec(3);
    ep.x0 << 1, 0, 0;
    ep.x1 = Vec(3);
    ep.x1 << std::cos(1.0), std::sin(1.0), 0;
    ep.y0 = 0.0;
    ep.y1 = 0.3;
    GammaBounds g;
    g.s0 = 1.0;
    g = derive_constants(g, ep.y0, ep.y1);
    SearchSpec spec;
    spec.c_max = 25.0;
    spec.halton_seeds = 0;
    auto recs = solve_bvp(m, ep, g, spec);
    REQUIRE(recs.size() == 2);  // arcs of length d and 2 pi - d

    ComplexBuildConfig cfg;
    cfg.N = 16;
    cfg.cap = spec.c_max;
    auto data = build_complex(m, recs, g, cfg);
    REQUIRE(data.generators.at(0).size() == 1);
    REQUIRE(data.generators.at(1).size() == 1);
    REQUIRE(data.census.size() == 1);
    // both unstable rays of the long arc fall to the short arc: even count
    CHECK(data.census[0].orbits.size() == 2);
    CHECK(data.census[0].count_stable);
    auto H = complex_homology(data);
    auto rep = compare_reference(H, data, m.manifold());
    CHECK(rep.match);
    CHECK(H.groups[0].betti == 1);
    CHECK(H.groups[1].betti == 1);
}

TEST_CASE("perturbation invariance on the circle") {
    SplitMetric m0 = product_metric(Manifold(ManifoldKind::Circle));
    SplitMetric m1(Manifold(ManifoldKind::Circle), constant_profile(1.0),
                   cos_profile(1.0, 0.01), "beta-ripple");
    EndpointPair ep;
    ep.x0 = Vec::Constant(1, 0.0);
    ep.x1 = Vec::Constant(1, std::numbers::pi / 2);
    ep.y0 = 0.0;
    ep.y1 = 0.3;
    GammaBounds g;
    g.s0 = 1.0;
    estimate_ranges(m1, g);
    estimate_ab(m1, g);
    g = derive_constants(g, ep.y0, ep.y1);
    SearchSpec spec;
    spec.c_max = 5.0;
    spec.halton_seeds = 10;
    ComplexBuildConfig cfg;
    cfg.N = 16;
    cfg.cap = spec.c_max;
    auto rep = perturbation_invariance(m0, m1, g, ep, spec, cfg);
    CHECK(rep.equal);
    CHECK(rep.distance <= 0.01 + 1e-12);
    CHECK(rep.betti0 == rep.betti1);

    // a perturbation beyond the admissible radius is refused
    SplitMetric far(Manifold(ManifoldKind::Circle), constant_profile(1.0),
                    cos_profile(1.0, 0.999 * vicino2_radius(g) + 0.01),
                    "too-far");
    CHECK_THROWS_WITH_AS(
        perturbation_invariance(m0, far, g, ep, spec, cfg),
        doctest::Contains("admissible radius"), std::invalid_argument);
}
