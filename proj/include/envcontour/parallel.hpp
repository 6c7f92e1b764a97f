#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace envc {

// Worker count: min(omp_get_max_threads, ENVCONTOUR_THREADS) when the env var is set.
inline int worker_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* cap = std::getenv("ENVCONTOUR_THREADS")) {
        const int c = std::atoi(cap);
        if (c >= 1) n = std::min(n, c);
    }
    return n;
}

inline constexpr int kSlotCount = 512;

// Deterministic parallel accumulation: fn(i, acc) adds element i's contribution
// into acc[0..nscalar). Elements are assigned to 512 contiguous blocks, blocks
// are summed in parallel, and the block sums are reduced in a fixed serial
// order, so the result is bit-identical for any thread count.
template <typename Fn>
void slot_accumulate(std::int64_t n, int nscalar, Fn&& fn, double* out) {
    std::vector<double> slots(static_cast<size_t>(kSlotCount) * nscalar, 0.0);
    const std::int64_t per = (n + kSlotCount - 1) / kSlotCount;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
    for (int si = 0; si < kSlotCount; ++si) {
        double* acc = slots.data() + static_cast<size_t>(si) * nscalar;
        const std::int64_t lo = si * per;
        const std::int64_t hi = std::min(lo + per, n);
        for (std::int64_t i = lo; i < hi; ++i) fn(i, acc);
    }
    for (int j = 0; j < nscalar; ++j) out[j] = 0.0;
    for (int si = 0; si < kSlotCount; ++si)
        for (int j = 0; j < nscalar; ++j) out[j] += slots[static_cast<size_t>(si) * nscalar + j];
}

}  // namespace envc
