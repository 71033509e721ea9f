#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lorentzmorse/bounds.hpp"
#include "lorentzmorse/flowfield.hpp"
#include "lorentzmorse/shooting.hpp"

using namespace lmc;

namespace {

SplitMetric cyl_metric() {
    return product_metric(Manifold(ManifoldKind::Circle));
}

GammaBounds cyl_bounds() {
    GammaBounds g;
    g.s0 = 1.0;
    g = derive_constants(g, 0.0, 0.3);
    return g;
}

GeodesicRecord first_cyl_record() {
    auto m = cyl_metric();
    EndpointPair ep;
    ep.x0 = Vec::Constant(1, 0.0);
    ep.x1 = Vec::Constant(1, std::numbers::pi / 2);
    ep.y0 = 0.0;
    ep.y1 = 0.3;
    SearchSpec spec;
    spec.c_max = 5.0;
    spec.halton_seeds = 0;
    auto recs = solve_bvp(m, ep, cyl_bounds(), spec);
    REQUIRE(!recs.empty());
    return recs[0];
}

}  // namespace

TEST_CASE("pseudo-gradient field is bounded and descends the energy") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    SplitMetric m(Manifold(ManifoldKind::Circle), gauss_profile(1.0, 0.4),
                  cos_profile(1.1, 0.2), "mixed");
    FlowConfig cfg;
    cfg.lambda = 8.0;
    cfg.c0 = -2.0;
    for (int trial = 0; trial < 40; ++trial) {
        DiscretePath p(m.manifold(), 10, Vec::Zero(1),
                       Vec::Constant(1, 1.3), 0.0, 0.3);
        p.linear_init();
        for (int j = 1; j <= 10; ++j)
            p.set_interior(j, p.node_x(j).array() + 0.6 * g(rng),
                           p.node_y(j) + 0.4 * g(rng));
        PathChart chart(p);
        auto f = pseudo_gradient_F(m, p, chart, cfg);
        CHECK(f.F_norm <= 1.0 + 1e-12);
        // dE/dt along the flow is the pairing of dE with F
        auto dE = path_denergy(m, p, chart);
        CHECK(dE.stacked().dot(f.F.stacked()) <= 1e-10);
        if (f.E_aux <= cfg.c0 - 1.0) {
            auto dA = path_denergy(m, p, chart, cfg.lambda);
            CHECK(dA.stacked().dot(f.F.stacked()) <= 1e-10);
        }
    }
}

TEST_CASE("descent rate obeys the two-gradient lower bound") {
    // |u|^2 + chi (|u|/|v|) <u,v> >= (1/2) min_theta |theta v + (1-theta) u|^2
    std::mt19937 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> uc(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        int n = 1 + trial % 12;
        Vec u = Vec::NullaryExpr(n, [&] { return g(rng); });
        Vec v = Vec::NullaryExpr(n, [&] { return g(rng); });
        if (v.norm() == 0.0) continue;
        auto r = hilvec_bound(u, v, uc(rng));
        CHECK(r.holds);
    }
    CHECK_THROWS_AS(hilvec_bound(Vec::Ones(3), Vec::Zero(3), 0.5),
                    std::invalid_argument);
}

TEST_CASE("flow converges to a rest point from a stable perturbation") {
    auto m = cyl_metric();
    auto g = cyl_bounds();
    auto rec = first_cyl_record();
    auto p = path_from_record(m, rec, 16);
    // perturb the base directions only; the y-sector of a product metric
    // stays critical along the flow
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int j = 1; j <= p.N(); ++j)
        p.set_interior(j, p.node_x(j).array() + u(rng), p.node_y(j));

    FlowConfig cfg;
    cfg.lambda = g.lambda;
    cfg.c0 = g.c0;
    auto res = flow(m, p, cfg);
    CHECK(res.converged);
    CHECK(path_energy(m, res.end) ==
          doctest::Approx(rec.energy).epsilon(1e-6));
    auto crit = path_from_record(m, rec, 16);
    CHECK((res.end.flatten() - crit.flatten()).norm() <= 1e-4);
    // the energy trace is non-increasing
    for (size_t i = 1; i < res.trace.size(); ++i)
        CHECK(res.trace[i].E <= res.trace[i - 1].E + 1e-12);
}

TEST_CASE("saturated sublevel set is positively invariant") {
    auto m = cyl_metric();
    auto g = cyl_bounds();
    auto rec = first_cyl_record();
    auto p = path_from_record(m, rec, 16);
    // drive the auxiliary energy below c0 - 1 with a y oscillation
    for (int j = 1; j <= p.N(); ++j)
        p.set_interior(j, p.node_x(j), p.node_y(j) + 0.5 * ((j % 2) ? 1 : -1));

    FlowConfig cfg;
    cfg.lambda = g.lambda;
    cfg.c0 = g.c0;
    cfg.t_max = 2.0;
    PathChart chart(p);
    auto f0 = pseudo_gradient_F(m, p, chart, cfg);
    REQUIRE(f0.E_aux < cfg.c0 - 1.0);
    REQUIRE(f0.chi == 1.0);
    auto res = flow(m, p, cfg);
    CHECK(!res.converged);  // no rest point down there
    for (size_t i = 1; i < res.trace.size(); ++i) {
        CHECK(res.trace[i].E_aux <= res.trace[i - 1].E_aux + 1e-12);
        CHECK(res.trace[i].E_aux < cfg.c0 - 1.0);
    }
}

TEST_CASE("sphere paths stay on the sphere along the flow") {
    SplitMetric m = product_metric(Manifold(ManifoldKind::RoundSphere2));
    Vec x0(3), x1(3);
    x0 << 1, 0, 0;
    x1 << std::cos(1.0), std::sin(1.0), 0;
    DiscretePath p(m.manifold(), 8, x0, x1, 0.0, 0.3);
    p.linear_init();
    std::mt19937 rng(31);
    std::normal_distribution<double> gau(0.0, 0.1);
    for (int j = 1; j <= 8; ++j) {
        Vec dx = Vec::NullaryExpr(3, [&] { return gau(rng); });
        p.set_interior(j, p.node_x(j) + dx, p.node_y(j));
    }
    FlowConfig cfg;
    cfg.lambda = 1000.0;
    cfg.c0 = -47.0;
    cfg.t_max = 50.0;
    auto res = flow(m, p, cfg);
    CHECK(res.converged);
    for (int j = 1; j <= 8; ++j)
        CHECK(std::abs(res.end.node_x(j).norm() - 1.0) <= 1e-12);
    // the rest point is the short great-circle arc
    double c = (1.0 * 1.0 - 0.09) / 2.0;
    CHECK(path_energy(m, res.end) ==
          doctest::Approx(c).epsilon(5e-3));  // discretization bias at N=8
}
