#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "lorentzmorse/metric.hpp"

using namespace lmc;

static Manifold circle() { return Manifold(ManifoldKind::Circle); }

TEST_CASE("eval_metric product") {
    SplitMetric m = product_metric(circle());
    Vec x(1);
    x << 0.7;
    auto e = m.eval(x, 0.42);
    CHECK(e.alpha(0, 0) == 1.0);
    CHECK(e.beta == 1.0);
    CHECK(e.d_alpha_dy(0, 0) == 0.0);
    CHECK(e.d_beta_dy == 0.0);
}

TEST_CASE("eval_metric cos-perturbed beta") {
    SplitMetric m(circle(), constant_profile(1.0), cos_profile(1.0, 0.3),
                  "cos-beta");
    Vec x(1);
    x << 0.0;
    auto e = m.eval(x, 0.0);
    CHECK(e.beta == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(e.d_beta_dy == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("eval_metric gaussian-bump alpha derivative") {
    SplitMetric m(circle(), gauss_profile(1.0, 1.0), constant_profile(1.0),
                  "gauss-alpha");
    Vec x(1);
    x << 0.0;
    auto e = m.eval(x, 1.0);
    CHECK(e.d_alpha_dy(0, 0) ==
          doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("eval_metric rejects bad points") {
    Manifold sph(ManifoldKind::RoundSphere2);
    SplitMetric m = product_metric(sph);
    Vec bad(3);
    bad << 1.0, 1.0, 0.0;  // not unit norm
    CHECK_THROWS_AS(m.eval(bad, 0.0), std::domain_error);
}

TEST_CASE("analytic y-derivatives match central differences") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uy(-2.0, 2.0);
    std::vector<SplitMetric> cat;
    cat.push_back(SplitMetric(circle(), gauss_profile(1.0, 0.8),
                              cos_profile(1.5, 0.4), "g/c"));
    cat.push_back(SplitMetric(circle(), poly_profile({2.0, 0.1, 0.05}),
                              poly_profile({1.0, 0.0, 0.2}), "poly"));
    const double h = 1e-4;
    for (const auto& m : cat) {
        for (int i = 0; i < 1000; ++i) {
            double y = uy(rng);
            double fd_a = (m.a(y + h) - m.a(y - h)) / (2 * h);
            double fd_b = (m.b(y + h) - m.b(y - h)) / (2 * h);
            CHECK(std::abs(m.da(y) - fd_a) <=
                  1e-6 * std::max(1.0, std::abs(m.da(y))));
            CHECK(std::abs(m.db(y) - fd_b) <=
                  1e-6 * std::max(1.0, std::abs(m.db(y))));
        }
    }
}

TEST_CASE("check_convexity trivial and violating cases") {
    SplitMetric indep = product_metric(circle());
    auto rep = check_convexity(indep, 1.0, 3.0, 50);
    CHECK(rep.convex);

    // alpha = (1+y^2) I grows with |y|: violates for y > s0
    SplitMetric grow(circle(), poly_profile({1.0, 0.0, 1.0}),
                     constant_profile(1.0), "grow");
    auto rep2 = check_convexity(grow, 1.0, 3.0, 50);
    CHECK(!rep2.convex);
    bool found_y2 = false;
    for (auto& v : rep2.violations)
        if (std::abs(v.y - 2.0) < 0.1 && v.max_eig > 3.5) found_y2 = true;
    CHECK(found_y2);

    SplitMetric bump(circle(), gauss_profile(1.0, 1.0), constant_profile(1.0),
                     "bump");
    CHECK(check_convexity(bump, 0.1, 4.0, 200).convex);

    CHECK_THROWS_AS(check_convexity(indep, 1.0, 3.0, 0),
                    std::invalid_argument);
}

TEST_CASE("derive_constants printed formulas") {
    GammaBounds in;
    in.s0 = 1.0;
    in.beta_lo = in.beta_hi = 1.0;
    in.a = in.b = 0.5;
    auto g = derive_constants(in, -0.5, 0.5);  // |y1-y0| = 1
    CHECK(g.p1 == doctest::Approx(0.5 * std::exp(2.0)).epsilon(1e-12));
    CHECK(g.q1 == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    CHECK(g.lambda == doctest::Approx(2.0 / g.p1).epsilon(1e-12));
    CHECK(g.c0 < -0.5 * (g.beta_hi + g.lambda) * g.q1);
}

TEST_CASE("derive_constants a=0 caps lambda") {
    GammaBounds in;
    in.s0 = 1.0;
    in.a = 0.0;
    in.b = 0.7;
    auto g = derive_constants(in, 0.0, 0.5);
    CHECK(g.p1 == 0.0);
    CHECK(g.lambda == GammaBounds::kLambdaCap);
}

TEST_CASE("derive_constants rejects endpoints outside slab") {
    GammaBounds in;
    in.s0 = 1.0;
    CHECK_THROWS_AS(derive_constants(in, 0.0, 1.0 + 1e-9),
                    std::invalid_argument);
}

TEST_CASE("mu-shift monotonicity of p1 and q1") {
    // direct check of the printed inequality chain at one point
    double blo = 1.0, bhi = 2.0, mu = 3.0;
    CHECK((bhi + mu) / ((blo + mu) * (blo + mu)) <= bhi / (blo * blo));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 100; ++i) {
        double s0 = u(rng), lo = u(rng);
        double hi = lo + u(rng);
        double a = u(rng), b = u(rng), dy = u(rng);
        for (double m : {0.1, 1.0, 10.0}) {
            CHECK(p1_of(lo + m, hi + m, a, b, s0) <= p1_of(lo, hi, a, b, s0));
            CHECK(q1_of(lo + m, hi + m, a, b, s0, dy) <=
                  q1_of(lo, hi, a, b, s0, dy));
        }
    }
}

TEST_CASE("slab cutoff") {
    GammaBounds g;
    g.s0 = 1.0;
    g.alpha_lo = 1.0;
    g.beta_lo = 1.0;

    SUBCASE("identity on an already-flat metric") {
        SplitMetric m = product_metric(circle());
        auto cut = apply_slab_cutoff(m, g, {1.0, 1.0});
        for (double y : {-3.0, -0.5, 0.0, 1.2, 2.7})
            CHECK(cut.a(y) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(cut.is_product());
    }

    SUBCASE("flat outside the transition band") {
        SplitMetric m(circle(), gauss_profile(2.0, 0.5), cos_profile(3.0, 0.5),
                      "gc");
        auto cut = apply_slab_cutoff(m, g, {1.0, 1.0});
        CHECK(cut.a(2.5) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(cut.b(2.5) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(cut.a(0.5) == doctest::Approx(m.a(0.5)).epsilon(1e-14));
    }

    SUBCASE("derivative formula and convexity preserved") {
        SplitMetric m(circle(), gauss_profile(1.0, 1.0), constant_profile(1.0),
                      "bump");
        GammaBounds gb = g;
        gb.s0 = 0.5;
        gb.alpha_lo = m.a(1.5);  // below the range on the band
        auto cut = apply_slab_cutoff(m, gb, {0.5, 1.0});
        const double h = 1e-5;
        for (double y = 0.55; y < 1.45; y += 0.05) {
            double fd = (cut.a(y + h) - cut.a(y - h)) / (2 * h);
            CHECK(std::abs(cut.da(y) - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
        }
        auto rep = check_convexity(cut, 0.5, 4.0, 400);
        CHECK(rep.convex);
    }

    SUBCASE("bad psi spec") {
        SplitMetric m = product_metric(circle());
        CHECK_THROWS_AS(apply_slab_cutoff(m, g, {1.0, -1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("estimate_ab inflates the sampled suprema") {
    SplitMetric m(circle(), constant_profile(1.0), cos_profile(2.0, 0.5),
                  "cb");
    GammaBounds g;
    g.s0 = 1.0;
    estimate_ab(m, g);
    CHECK(g.a == doctest::Approx(0.0));
    // sup |b'|/b for 2+0.5cos: attained where derivative/value peaks
    CHECK(g.b > 0.0);
    double sup = 0.0;
    for (double y = -2.0; y <= 2.0; y += 1e-4)
        sup = std::max(sup, std::abs(m.db(y)) / m.b(y));
    CHECK(g.b == doctest::Approx(1.1 * sup).epsilon(1e-3));
}
