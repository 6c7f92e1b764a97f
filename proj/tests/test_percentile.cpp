#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "envcontour/model.hpp"
#include "envcontour/percentile.hpp"
#include "envcontour/rng.hpp"
#include "oracles.hpp"

using namespace envc;

namespace {

SampleSet from_values(const Vec& values) {
    SampleSet s;
    s.dim = 1;
    s.n = static_cast<std::int64_t>(values.size());
    s.points = values;
    return s;
}

JointModel standard_normal(int d) {
    MultivariateNormal mvn;
    mvn.mean.assign(d, 0.0);
    mvn.cov = Mat::identity(d);
    JointModel m{mvn, "stdnorm"};
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("order statistic rule on small projection sets") {
    Vec seq(100);
    for (int i = 0; i < 100; ++i) seq[i] = i + 1;
    const double u1 = 1.0;
    CHECK(estimate_percentile(from_values(seq), &u1, 0.05) == doctest::Approx(95.0));
    CHECK(estimate_percentile(from_values({1.0, 2.0, 3.0}), &u1, 0.4) == doctest::Approx(2.0));
    // conservative bump moves the rank upward
    CHECK(estimate_percentile(from_values(seq), &u1, 0.05, 2) == doctest::Approx(97.0));
    bool warned = false;
    estimate_percentile(from_values(seq), &u1, 0.05, 0, &warned);
    CHECK(warned);  // n*pe = 5 < 20
    CHECK_THROWS_AS(estimate_percentile(from_values({}), &u1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_percentile(from_values(seq), &u1, 0.7), std::invalid_argument);
}

TEST_CASE("monte carlo percentile approaches the gaussian quantile") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 1000000, 17);
    const double u[2] = {1.0, 0.0};
    const double c = estimate_percentile(s, u, 0.05);
    CHECK(std::fabs(c - oracle::bisect_norm_quantile(0.95)) < 0.01);
}

TEST_CASE("percentile consistency averaged over seeds") {
    const JointModel m = standard_normal(2);
    const double u[2] = {0.6, 0.8};
    double total = 0.0;
    for (int seed = 1; seed <= 10; ++seed) {
        const SampleSet s = sample(m, 1000000, seed);
        total += std::fabs(estimate_percentile(s, u, 0.05) - oracle::bisect_norm_quantile(0.95));
    }
    CHECK(total / 10.0 < 0.01);
}

TEST_CASE("estimate is non-increasing in pe") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 50000, 9);
    const double u[2] = {1.0, 0.0};
    double prev = 1e300;
    for (double pe : {0.02, 0.05, 0.1, 0.2, 0.3, 0.45}) {
        const double c = estimate_percentile(s, u, pe);
        CHECK(c <= prev + 1e-12);
        prev = c;
    }
}

TEST_CASE("gaussian closed form quantile") {
    const Vec zero{0.0, 0.0};
    const Mat eye = Mat::identity(2);
    const double ux[2] = {1.0, 0.0};
    CHECK(exact_percentile_gaussian(zero, eye, ux, 0.05) ==
          doctest::Approx(oracle::bisect_norm_quantile(0.95)).epsilon(1e-9));
    const Vec mean{1.0, 0.0};
    CHECK(exact_percentile_gaussian(mean, eye, ux, 0.5) == doctest::Approx(1.0).epsilon(1e-12));

    Mat cov(2, 2);
    cov(0, 0) = cov(1, 1) = 0.16;
    cov(0, 1) = cov(1, 0) = 0.08;
    const double c = exact_percentile_gaussian(zero, cov, ux, 0.15);
    CHECK(c == doctest::Approx(oracle::bisect_norm_quantile(0.85) * 0.4).epsilon(1e-9));
    CHECK(c == doctest::Approx(0.414573).epsilon(1e-4));

    Mat bad(2, 2);
    bad(0, 0) = 1.0; bad(0, 1) = 2.0; bad(1, 0) = 2.0; bad(1, 1) = 1.0;
    CHECK_THROWS_AS(exact_percentile_gaussian(zero, bad, ux, 0.1), std::invalid_argument);
}

TEST_CASE("recentring arithmetic") {
    CHECK(recentre(2.0, Vec{1.0, 0.0}, Vec{0.5, 0.0}) == doctest::Approx(1.5));
    CHECK(recentre(2.0, Vec{1.0, 0.0}, Vec{0.0, 0.0}) == doctest::Approx(2.0));
    CHECK(recentre(1.0, Vec{0.0, 1.0}, Vec{0.0, 1.0}) == doctest::Approx(0.0));
    // round trip through a displacement and back
    Xoshiro256 rng(5);
    for (int i = 0; i < 100; ++i) {
        const Vec u = Direction({rng.uniform01() - 0.5, rng.uniform01() - 0.5}).u;
        const Vec o{rng.uniform01(), rng.uniform01()};
        const double c = rng.uniform01() * 3.0;
        const double co = recentre(c, u, o);
        const Vec back{-o[0], -o[1]};
        CHECK(recentre(co, u, back) == doctest::Approx(c).epsilon(1e-15));
    }
}

TEST_CASE("reflection shift identity") {
    const Vec u{1.0, 0.0};
    const Vec o{0.0, 0.0};
    const Vec s{4.0, 0.0};
    CHECK(shift_reflection(s, u, o, o) == s);
    const Vec moved = shift_reflection(s, u, o, Vec{1.0, 0.0});
    CHECK(moved[0] == doctest::Approx(3.0));
    CHECK(moved[1] == doctest::Approx(0.0));
    const Vec perp = shift_reflection(s, u, o, Vec{0.0, 1.0});
    CHECK(perp[0] == doctest::Approx(4.0));
    CHECK(perp[1] == doctest::Approx(1.0));
}

TEST_CASE("reflection shift agrees with direct recomputation") {
    Xoshiro256 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const int d = (i % 2) ? 2 : 3;
        Vec raw(d), o(d), o_star(d);
        for (int k = 0; k < d; ++k) {
            raw[k] = rng.uniform01() - 0.5;
            o[k] = 2.0 * rng.uniform01() - 1.0;
            o_star[k] = 2.0 * rng.uniform01() - 1.0;
        }
        const Vec u = Direction(raw).u;
        const double c = 1.0 + 4.0 * rng.uniform01();
        // reflection for origin o, then shifted to o_star
        Vec s(d), expected(d);
        const double co = recentre(c, u, o);
        const double cs = recentre(c, u, o_star);
        for (int k = 0; k < d; ++k) {
            s[k] = o[k] + 2.0 * co * u[k];
            expected[k] = o_star[k] + 2.0 * cs * u[k];
        }
        const Vec got = shift_reflection(s, u, o, o_star);
        for (int k = 0; k < d; ++k) CHECK(got[k] == doctest::Approx(expected[k]).epsilon(1e-12));
    }
}

TEST_CASE("table estimation: serial and parallel agree exactly") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 40000, 13);
    const auto dirs = grid_directions_2d(64);
    const PercentileTable a = estimate_table(s, dirs, 0.1);
    const PercentileTable b = estimate_table_serial(s, dirs, 0.1);
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);
    a.check();
    CHECK(a.n_samples == 40000);
    CHECK_FALSE(a.low_tail_warning);
}

TEST_CASE("bootstrap spread is a sane scale estimate") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 20000, 19);
    const auto dirs = grid_directions_2d(8);
    const Vec sd = bootstrap_spread(s, dirs, 0.1, 20, 99);
    REQUIRE(sd.size() == dirs.size());
    for (double v : sd) {
        CHECK(v > 0.0);
        CHECK(v < 0.2);
    }
}

TEST_CASE("table csv and metadata writers") {
    PercentileTable t;
    t.pe = 0.1;
    t.dim = 2;
    t.directions = grid_directions_2d(4);
    t.values = {1.0, 2.0, 3.0, 4.0};
    t.n_samples = 100;
    t.seed = 7;
    t.rule = "test";
    write_table_csv(t, "/tmp/envc_table.csv");
    write_table_meta_json(t, "/tmp/envc_table_meta.json");
    std::FILE* f = std::fopen("/tmp/envc_table.csv", "r");
    REQUIRE(f != nullptr);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
    CHECK(std::strncmp(line, "u_1,u_2,C_value", 15) == 0);
    std::fclose(f);
}
