#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "envcontour/contour.hpp"
#include "envcontour/errors.hpp"
#include "envcontour/model.hpp"
#include "oracles.hpp"

using namespace envc;

namespace {

constexpr double kPi = std::numbers::pi;

JointModel standard_normal(int d) {
    MultivariateNormal mvn;
    mvn.mean.assign(d, 0.0);
    mvn.cov = Mat::identity(d);
    JointModel m{mvn, "stdnorm"};
    m.validate();
    return m;
}

PercentileTable make_table(const std::vector<Vec>& dirs, const Vec& values, double pe = 0.1) {
    PercentileTable t;
    t.pe = pe;
    t.dim = static_cast<int>(dirs[0].size());
    t.directions = dirs;
    t.values = values;
    t.rule = "manual";
    return t;
}

ContourResult result_from_table(const PercentileTable& table, const Vec& o) {
    ContourResult r;
    r.table = table;
    r.origin = o;
    r.cell = voronoi_cell(o, reflection_set(table, o));
    r.connectivity = delaunay_connectivity(o, reflection_set(table, o));
    r.status = r.connectivity.all_connected() ? ContourResult::Status::proper_candidate
                                              : ContourResult::Status::invalid;
    return r;
}

}  // namespace

TEST_CASE("geometric median of symmetric samples is near the center") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 100000, 3);
    const Vec o = select_origin(s);
    CHECK(norm(o) < 0.01);
}

TEST_CASE("geometric median of an equilateral triangle is its centroid") {
    SampleSet s;
    s.dim = 2;
    s.n = 3;
    s.points = {0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0};
    const Vec o = select_origin(s);
    CHECK(o[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(o[1] == doctest::Approx(std::sqrt(3.0) / 6.0).epsilon(1e-6));
}

TEST_CASE("geometric median of a repeated point is that point") {
    SampleSet s;
    s.dim = 2;
    s.n = 50;
    for (int i = 0; i < 50; ++i) {
        s.points.push_back(2.5);
        s.points.push_back(-1.5);
    }
    const Vec o = select_origin(s);
    CHECK(o[0] == doctest::Approx(2.5));
    CHECK(o[1] == doctest::Approx(-1.5));
}

TEST_CASE("gaussian ball contour radii approach the quantile") {
    const JointModel m = standard_normal(2);
    const ContourResult res = voronoi_contour(m, 0.05, grid_directions_2d(90), 200000, 12);
    CHECK(res.status == ContourResult::Status::proper_candidate);
    const double target = oracle::bisect_norm_quantile(0.95);
    for (const Vec& v : res.cell.vertices) {
        CHECK(norm(v) > target * 0.97);
        CHECK(norm(v) < target * 1.03);
    }
}

TEST_CASE("invalid pe is rejected") {
    const JointModel m = standard_normal(2);
    CHECK_THROWS_AS(voronoi_contour(m, 0.7, grid_directions_2d(8), 1000, 1),
                    std::invalid_argument);
}

TEST_CASE("explicit origin strategy and lp fallback") {
    const JointModel m = standard_normal(2);
    ContourOptions opts;
    opts.origin_strategy = "explicit";
    opts.origin_explicit = {0.2, -0.1};
    const ContourResult res = voronoi_contour(m, 0.1, grid_directions_2d(36), 50000, 4, opts);
    CHECK(res.origin[0] == doctest::Approx(0.2));
    CHECK(res.origin_strategy == "explicit");

    // an exterior explicit origin falls back to the LP center
    opts.origin_explicit = {10.0, 0.0};
    const ContourResult fixed = voronoi_contour(m, 0.1, grid_directions_2d(36), 50000, 4, opts);
    CHECK(fixed.origin_strategy == "explicit->lp");
    CHECK(norm(fixed.origin) < 1.0);
    CHECK(fixed.status == ContourResult::Status::proper_candidate);
}

TEST_CASE("corrected contour: proper case is unchanged up to projection duplicates") {
    Mat cov = Mat::identity(2);
    const PercentileTable table =
        gaussian_oracle_table({0.0, 0.0}, cov, grid_directions_2d(36), 0.1);
    const ContourResult res = result_from_table(table, {0.0, 0.0});
    REQUIRE(res.status == ContourResult::Status::proper_candidate);
    const Polytope corr = corrected_contour(res);
    CHECK(oracle::hausdorff_points(corr.vertices, res.cell.vertices) < 1e-9);
}

TEST_CASE("corrected contour: single violated direction adds one projected vertex") {
    // octagon constraints, the +x plane pushed outward to 1.5 (unreachable)
    const auto dirs = grid_directions_2d(8);
    Vec values(8, 1.0);
    values[0] = 1.5;
    const PercentileTable table = make_table(dirs, values);
    const ContourResult res = result_from_table(table, {0.0, 0.0});
    CHECK(res.status == ContourResult::Status::invalid);
    REQUIRE(res.connectivity.offending.size() == 1);
    CHECK(res.connectivity.offending[0] == 0);

    const ValidityReport before = validate_contour(res.cell, table, 1e-9);
    CHECK(before.classification == ValidityReport::Classification::invalid);
    CHECK(before.max_gap == doctest::Approx(1.5 - std::sqrt(2.0)).epsilon(1e-9));

    const Polytope corr = corrected_contour(res);
    const ValidityReport after = validate_contour(corr, table, 1e-9);
    CHECK(after.max_gap <= 1e-9);
    // the projected vertex (1.5, 0) appears and the cell is contained
    bool found = false;
    for (const Vec& v : corr.vertices)
        if (std::fabs(v[0] - 1.5) < 1e-9 && std::fabs(v[1]) < 1e-9) found = true;
    CHECK(found);
    for (const Vec& v : res.cell.vertices) CHECK(corr.contains(v, 1e-9));
}

TEST_CASE("validate_contour classifications") {
    const auto dirs = grid_directions_2d(4);
    const PercentileTable square = make_table(dirs, Vec(4, 1.0));
    const Polytope cell = voronoi_cell({0.0, 0.0}, reflection_set(square, {0.0, 0.0}));
    const ValidityReport proper = validate_contour(cell, square, 1e-9);
    CHECK(proper.classification == ValidityReport::Classification::proper);
    CHECK(proper.max_gap == doctest::Approx(0.0).epsilon(1e-12));

    Vec raised(4, 1.0);
    raised[0] = 1.5;
    const ValidityReport invalid = validate_contour(cell, make_table(dirs, raised), 1e-9);
    CHECK(invalid.classification == ValidityReport::Classification::invalid);
    CHECK(invalid.max_gap == doctest::Approx(0.5));

    // a larger box against the same table: gaps negative, still valid
    const PercentileTable big = make_table(dirs, Vec(4, 2.0));
    const Polytope bigcell = voronoi_cell({0.0, 0.0}, reflection_set(big, {0.0, 0.0}));
    const ValidityReport valid = validate_contour(bigcell, square, 1e-9);
    CHECK(valid.classification == ValidityReport::Classification::valid_improper);
    CHECK(valid.min_gap == doctest::Approx(-1.0));
}

TEST_CASE("mixture contour is invalid and the correction repairs it") {
    const JointModel m = mixture_fig7();
    ContourOptions opts;
    opts.refine_rounds = 1;
    const ContourResult res =
        voronoi_contour(m, 0.15, grid_directions_2d(180), 200000, 6, opts);
    CHECK(res.status == ContourResult::Status::invalid);
    CHECK_FALSE(res.connectivity.all_connected());

    const Polytope corr = corrected_contour(res);
    const ValidityReport rep = validate_contour(corr, res.table, 1e-9);
    CHECK(rep.max_gap <= 1e-9);
    CHECK(rep.classification != ValidityReport::Classification::invalid);
}

TEST_CASE("exceedance probability of a gaussian half-space") {
    const JointModel m = standard_normal(2);
    HalfSpace h{{1.0, 0.0}, oracle::bisect_norm_quantile(0.95)};
    const Exceedance e = exceedance_probability(h, m, 1000000, 8);
    CHECK(std::fabs(e.p_hat - 0.05) < 0.001);
    CHECK(e.se == doctest::Approx(std::sqrt(0.05 * 0.95 / 1e6)).epsilon(0.05));

    const Exceedance es = exceedance_probability_serial(h, m, 100000, 8);
    CHECK(std::fabs(es.p_hat - 0.05) < 0.004);

    HalfSpace everything{{1.0, 0.0}, -10.0};
    CHECK(exceedance_probability(everything, m, 10000, 9).p_hat == doctest::Approx(1.0));

    HalfSpace junk{{1.0, 0.0}, -std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(exceedance_probability(junk, m, 10000, 1), std::invalid_argument);
    CHECK_THROWS_AS(exceedance_probability(h, m, 100, 1), std::invalid_argument);
}

TEST_CASE("exceedance of the mixture y-quantile half-space") {
    const JointModel m = mixture_fig7();
    // brute-force 0.85 quantile of the y marginal from an independent large sample
    const SampleSet big = sample(m, 10000000, 777);
    Vec ys(big.n);
    for (std::int64_t i = 0; i < big.n; ++i) ys[i] = big.row(i)[1];
    const std::int64_t rank = static_cast<std::int64_t>(std::ceil(big.n * 0.85));
    std::nth_element(ys.begin(), ys.begin() + (rank - 1), ys.end());
    const double c = ys[rank - 1];

    HalfSpace h{{0.0, 1.0}, c};
    const Exceedance e = exceedance_probability(h, m, 1000000, 12);
    CHECK(std::fabs(e.p_hat - 0.15) < 0.002);
}

TEST_CASE("shared-sample exceedance audit matches the single half-space path") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 200000, 31);
    std::vector<HalfSpace> hs{{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 2.0}};
    const auto audited = exceedance_on_samples(hs, s);
    std::int64_t c0 = 0, c1 = 0;
    for (std::int64_t i = 0; i < s.n; ++i) {
        if (s.row(i)[0] > 1.0) ++c0;
        if (s.row(i)[1] > 2.0) ++c1;
    }
    CHECK(audited[0].p_hat == doctest::Approx(static_cast<double>(c0) / s.n));
    CHECK(audited[1].p_hat == doctest::Approx(static_cast<double>(c1) / s.n));
}

TEST_CASE("direct 2d baseline on constant and oracle tables") {
    const PercentileTable square = make_table(grid_directions_2d(4), Vec(4, 1.0));
    const DirectContour2D dc = direct_contour_2d(square);
    REQUIRE(dc.points.size() == 4);
    for (const Vec& p : dc.points)
        CHECK(norm(p) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_FALSE(dc.has_loops());

    const PercentileTable oracle_table =
        gaussian_oracle_table({0.0, 0.0}, Mat::identity(2), grid_directions_2d(360), 0.05);
    const DirectContour2D smooth = direct_contour_2d(oracle_table);
    const double expected = exact_percentile_gaussian({0.0, 0.0}, Mat::identity(2),
                                                      oracle_table.directions[0].data(), 0.05) /
                            std::cos(kPi / 360.0);
    for (const Vec& p : smooth.points)
        CHECK(std::fabs(norm(p) - expected) < 1e-6);
    CHECK_FALSE(smooth.has_loops());
}

TEST_CASE("direct 2d loop detector fires on the noisy mixture") {
    const JointModel m = mixture_fig7();
    const SampleSet s = sample(m, 10000, 44);
    const PercentileTable table = estimate_table(s, grid_directions_2d(360), 0.15);
    const DirectContour2D dc = direct_contour_2d(table);
    CHECK(dc.has_loops());
}

TEST_CASE("direct 2d rejects parallel consecutive directions") {
    std::vector<Vec> dirs{{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    const PercentileTable t = make_table(dirs, {1.0, 1.1, 1.0});
    CHECK_THROWS_AS(direct_contour_2d(t), std::invalid_argument);
}

TEST_CASE("cells nest as pe grows on a shared sample") {
    const JointModel m = standard_normal(2);
    const SampleSet s = sample(m, 100000, 14);
    const auto dirs = grid_directions_2d(90);
    const PercentileTable t_lo = estimate_table(s, dirs, 0.05);
    const PercentileTable t_hi = estimate_table(s, dirs, 0.2);
    const Vec o{0.0, 0.0};
    const Polytope cell_hi = voronoi_cell(o, reflection_set(t_hi, o));
    for (const Vec& v : cell_hi.vertices)
        for (size_t j = 0; j < t_lo.size(); ++j)
            CHECK(dot(t_lo.directions[j], v) <= t_lo.values[j] + 1e-9);
}

TEST_CASE("origin choice does not change the contour") {
    const JointModel m = standard_normal(2);
    ContourOptions a, b;
    a.origin_strategy = "explicit";
    a.origin_explicit = {0.0, 0.0};
    b.origin_strategy = "explicit";
    b.origin_explicit = {0.3, 0.2};
    const auto dirs = grid_directions_2d(180);
    const ContourResult ra = voronoi_contour(m, 0.05, dirs, 200000, 15, a);
    const ContourResult rb = voronoi_contour(m, 0.05, dirs, 200000, 15, b);
    CHECK(oracle::hausdorff_points(ra.cell.vertices, rb.cell.vertices) < 0.02);
}

TEST_CASE("refinement never increases the disconnected count") {
    const JointModel m = standard_normal(2);
    const auto dirs = grid_directions_2d(90);
    for (std::uint64_t seed : {51, 52, 53}) {
        ContourOptions none, three;
        none.refine_rounds = 0;
        three.refine_rounds = 3;
        const ContourResult base = voronoi_contour(m, 0.05, dirs, 20000, seed, none);
        const ContourResult refined = voronoi_contour(m, 0.05, dirs, 20000, seed, three);
        CHECK(refined.connectivity.offending.size() <= base.connectivity.offending.size());
    }
}

TEST_CASE("facet exceedance audit of a proper gaussian contour") {
    const JointModel m = standard_normal(2);
    const double pe = 0.1;
    const ContourResult res = voronoi_contour(m, pe, grid_directions_2d(90), 200000, 16);
    REQUIRE(res.status == ContourResult::Status::proper_candidate);
    std::vector<HalfSpace> hs;
    for (const PolytopeFacet& f : res.cell.facets) hs.push_back({f.normal, f.offset});
    const SampleSet fresh = sample(m, 200000, 99);
    for (const Exceedance& e : exceedance_on_samples(hs, fresh))
        CHECK(e.p_hat <= pe + 3.0 * e.se);
}
