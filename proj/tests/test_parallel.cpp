// The OpenMP kernels must produce bit-identical results for any worker count.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cstring>

#include "envcontour/analytic.hpp"
#include "envcontour/contour.hpp"
#include "envcontour/geometry.hpp"
#include "envcontour/model.hpp"
#include "envcontour/parallel.hpp"
#include "envcontour/percentile.hpp"

using namespace envc;

namespace {

struct ThreadCap {
    explicit ThreadCap(const char* v) { setenv("ENVCONTOUR_THREADS", v, 1); }
    ~ThreadCap() { unsetenv("ENVCONTOUR_THREADS"); }
};

bool same_bits(const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("worker cap responds to the environment") {
    {
        ThreadCap cap("1");
        CHECK(worker_count() == 1);
    }
    CHECK(worker_count() >= 1);
}

TEST_CASE("sampling is identical for every worker count") {
    const JointModel m = mixture_fig7();
    Vec base;
    {
        ThreadCap cap("1");
        base = sample(m, 50000, 77).points;
    }
    for (const char* w : {"2", "4"}) {
        ThreadCap cap(w);
        CHECK(same_bits(base, sample(m, 50000, 77).points));
    }
    CHECK(same_bits(base, sample_serial(m, 50000, 77).points));
}

TEST_CASE("table estimation is identical for every worker count") {
    const JointModel m = mixture_fig7();
    const SampleSet s = sample(m, 50000, 78);
    const auto dirs = grid_directions_2d(90);
    Vec base;
    {
        ThreadCap cap("1");
        base = estimate_table(s, dirs, 0.15).values;
    }
    for (const char* w : {"2", "4"}) {
        ThreadCap cap(w);
        CHECK(same_bits(base, estimate_table(s, dirs, 0.15).values));
    }
    CHECK(same_bits(base, estimate_table_serial(s, dirs, 0.15).values));
}

TEST_CASE("exceedance counting is identical for every worker count") {
    const JointModel m = mixture_fig7();
    const HalfSpace h{{0.0, 1.0}, 0.9};
    double base;
    {
        ThreadCap cap("1");
        base = exceedance_probability(h, m, 100000, 79).p_hat;
    }
    for (const char* w : {"2", "4"}) {
        ThreadCap cap(w);
        CHECK(exceedance_probability(h, m, 100000, 79).p_hat == base);
    }
    CHECK(exceedance_probability_serial(h, m, 100000, 79).p_hat == base);
}

TEST_CASE("existence scan reduction is deterministic") {
    const JointModel m = mixture_fig7();
    const SampleSet s = sample(m, 100000, 80);
    const PercentileTable table = estimate_table(s, grid_directions_2d(360), 0.15);
    const Spline2DField field(table);
    const auto atlas = SphericalChart::atlas(2);

    ExistenceScan base;
    {
        ThreadCap cap("1");
        base = existence_scan(atlas, field, 180);
    }
    for (const char* w : {"2", "4"}) {
        ThreadCap cap(w);
        const ExistenceScan scan = existence_scan(atlas, field, 180);
        CHECK(scan.min_kappa == base.min_kappa);
        CHECK(scan.argmin_th == base.argmin_th);
        CHECK(scan.argmin_th_prime == base.argmin_th_prime);
    }
    const ExistenceScan serial = existence_scan_serial(atlas, field, 180);
    CHECK(serial.min_kappa == base.min_kappa);
    CHECK(serial.argmin_th == base.argmin_th);
}

TEST_CASE("whole pipeline is identical across worker counts") {
    const JointModel m = mixture_fig7();
    ContourOptions opts;
    opts.refine_rounds = 1;
    const auto dirs = grid_directions_2d(90);

    Vec base_values;
    std::vector<Vec> base_vertices;
    {
        ThreadCap cap("1");
        const ContourResult r = voronoi_contour(m, 0.15, dirs, 50000, 81, opts);
        base_values = r.table.values;
        base_vertices = r.cell.vertices;
    }
    {
        ThreadCap cap("4");
        const ContourResult r = voronoi_contour(m, 0.15, dirs, 50000, 81, opts);
        CHECK(same_bits(base_values, r.table.values));
        REQUIRE(r.cell.vertices.size() == base_vertices.size());
        for (size_t i = 0; i < base_vertices.size(); ++i)
            CHECK(same_bits(base_vertices[i], r.cell.vertices[i]));
    }
}
