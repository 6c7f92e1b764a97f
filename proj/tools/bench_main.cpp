// Times the OpenMP kernels against their serial reference implementations.
#include <chrono>
#include <cstdio>
#include <functional>

#include "envcontour/analytic.hpp"
#include "envcontour/contour.hpp"
#include "envcontour/geometry.hpp"
#include "envcontour/model.hpp"
#include "envcontour/parallel.hpp"
#include "envcontour/percentile.hpp"

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    std::int64_t n = 2000000;
    int m = 720;
    if (argc > 1) n = std::atoll(argv[1]);
    if (argc > 2) m = std::atoi(argv[2]);
    std::printf("workers: %d   n = %lld   M = %d\n", envc::worker_count(),
                static_cast<long long>(n), m);

    const envc::JointModel model = envc::mixture_fig7();
    const auto dirs = envc::grid_directions_2d(m);

    envc::SampleSet samples;
    report("sample",
           time_ms([&] { samples = envc::sample_serial(model, n, 42); }),
           time_ms([&] { samples = envc::sample(model, n, 42); }));

    envc::PercentileTable table;
    report("estimate_table",
           time_ms([&] { table = envc::estimate_table_serial(samples, dirs, 0.15); }),
           time_ms([&] { table = envc::estimate_table(samples, dirs, 0.15); }));

    envc::HalfSpace hs{envc::Vec{0.0, 1.0}, 0.9};
    report("exceedance_probability",
           time_ms([&] { envc::exceedance_probability_serial(hs, model, n, 43); }),
           time_ms([&] { envc::exceedance_probability(hs, model, n, 43); }));

    const envc::Spline2DField field(table);
    const auto atlas = envc::SphericalChart::atlas(2);
    report("existence_scan",
           time_ms([&] { envc::existence_scan_serial(atlas, field, 720); }),
           time_ms([&] { envc::existence_scan(atlas, field, 720); }));
    return 0;
}
