#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lorentzmorse/geodesic.hpp"

using namespace lmc;

TEST_CASE("flat cylinder straight line") {
    SplitMetric m = product_metric(Manifold(ManifoldKind::Circle));
    Vec x0(1), v0(1);
    x0 << 0.0;
    v0 << 1.0;
    auto tr = integrate_ivp(m, x0, 0.0, v0, 0.5);
    auto e = tr.end();
    CHECK(e.x(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(e.y == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(pointwise_energy(m, tr.at(0.3)) ==
          doctest::Approx(0.375).epsilon(1e-10));
    CHECK(energy_drift(m, tr) <= 1e-8);
}

TEST_CASE("great circle on the round sphere") {
    SplitMetric m = product_metric(Manifold(ManifoldKind::RoundSphere2));
    Vec x0(3), v0(3);
    x0 << 1.0, 0.0, 0.0;
    v0 << 0.0, 1.0, 0.0;
    auto tr = integrate_ivp(m, x0, 0.0, v0, 0.0);
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
        auto s = tr.at(t);
        CHECK(std::abs(s.x.norm() - 1.0) <= 1e-9);
        CHECK(s.x(0) == doctest::Approx(std::cos(t)).epsilon(1e-8));
        CHECK(s.x(1) == doctest::Approx(std::sin(t)).epsilon(1e-8));
    }
    CHECK(energy_drift(m, tr) <= 1e-8);
}

TEST_CASE("step-halving oracle for a y-dependent metric") {
    SplitMetric m(Manifold(ManifoldKind::Circle), constant_profile(1.0),
                  cos_profile(1.0, 0.3), "cos-beta");
    Vec x0(1), v0(1);
    x0 << 0.0;
    v0 << 1.0;
    auto coarse = integrate_ivp(m, x0, 0.0, v0, 0.2, 1e-10);
    auto fine = integrate_ivp(m, x0, 0.0, v0, 0.2, 1e-12);
    for (int i = 0; i <= 20; ++i) {
        double t = i / 20.0;
        CHECK(std::abs(coarse.at(t).y - fine.at(t).y) <= 1e-9);
    }
    CHECK(energy_drift(m, fine) <= 1e-9);
}

TEST_CASE("reversal symmetry") {
    SplitMetric m(Manifold(ManifoldKind::Circle), gauss_profile(1.0, 0.4),
                  cos_profile(1.2, 0.2), "gc");
    Vec x0(1), v0(1);
    x0 << 0.3;
    v0 << 0.9;
    auto fwd = integrate_ivp(m, x0, -0.2, v0, 0.4);
    auto e = fwd.end();
    Vec xr = e.x, vr = -e.xi;
    auto bwd = integrate_ivp(m, xr, e.y, vr, -e.eta);
    for (int i = 0; i <= 40; ++i) {
        double t = i / 40.0;
        auto a = fwd.at(t);
        auto b = bwd.at(1.0 - t);
        CHECK(std::abs(a.x(0) - b.x(0)) <= 1e-8);
        CHECK(std::abs(a.y - b.y) <= 1e-8);
    }
}

TEST_CASE("convexity mechanism: tangential launches respect the slab") {
    // With alpha = (1+exp(-y^2)) I the derivative d_y alpha is negative for
    // y > 0, so a tangential launch at y = 0.5 satisfies
    // b y'' = -(1/2) a'(y) |xi|^2 > 0: the geodesic is pushed outward and
    // slab sublevels stay convex.
    SplitMetric m(Manifold(ManifoldKind::Circle), gauss_profile(1.0, 1.0),
                  constant_profile(1.0), "bump");
    Vec x0(1), v0(1);
    x0 << 0.0;
    v0 << 1.0;
    auto tr = integrate_ivp(m, x0, 0.5, v0, 0.0);
    Vec rhs = geodesic_rhs(m, 0.0, tr.sol.steps.front().y0);
    double yacc = rhs(3);  // eta' component for d=1
    CHECK(yacc == doctest::Approx(-0.5 * m.da(0.5) / m.b(0.5)).epsilon(1e-12));
    CHECK(yacc > 0.0);
    CHECK(tr.at(0.2).y > 0.5);

    // The non-convex direction: a metric with d_y alpha > 0 at y0 dips back
    // toward the slab, which is exactly the failure of convexity.
    SplitMetric grow(Manifold(ManifoldKind::Circle),
                     poly_profile({1.0, 0.0, 1.0}), constant_profile(1.0),
                     "grow");
    auto tr2 = integrate_ivp(grow, x0, 0.5, v0, 0.0);
    Vec rhs2 = geodesic_rhs(grow, 0.0, tr2.sol.steps.front().y0);
    CHECK(rhs2(3) < 0.0);
    CHECK(tr2.at(0.2).y < 0.5);
}

TEST_CASE("invalid inputs") {
    SplitMetric m = product_metric(Manifold(ManifoldKind::RoundSphere2));
    Vec bad(3), v(3);
    bad << 2.0, 0.0, 0.0;
    v << 0.0, 1.0, 0.0;
    CHECK_THROWS_AS(integrate_ivp(m, bad, 0.0, v, 0.0), std::domain_error);
    Vec ok(3);
    ok << 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(integrate_ivp(m, ok, 0.0, v, 0.0, -1.0),
                    std::invalid_argument);
}
