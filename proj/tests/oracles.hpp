// Independent test oracles: deliberately implemented along different routes
// than the library code they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "envcontour/geometry.hpp"
#include "envcontour/linalg.hpp"
#include "envcontour/rng.hpp"

namespace oracle {

using envc::Mat;
using envc::Vec;

// Standard normal quantile by bisection on erfc; independent of AS 241.
// Upper-tail arguments are reflected into the lower tail, where
// 0.5 erfc(-x/sqrt(2)) keeps full relative precision.
inline double bisect_norm_quantile(double p) {
    if (p > 0.5) return -bisect_norm_quantile(1.0 - p);
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
        (cdf < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Exhaustive half-space intersection vertex enumeration for
// { x : u_j . x <= c_j }: solve every dim-subset, keep feasible solutions.
inline std::vector<Vec> brute_force_vertices(const std::vector<Vec>& dirs, const Vec& c,
                                             double tol = 1e-9) {
    const int m = static_cast<int>(dirs.size());
    const int d = static_cast<int>(dirs[0].size());
    std::vector<Vec> verts;
    std::vector<int> idx(d);
    std::function<void(int, int)> rec = [&](int start, int k) {
        if (k == d) {
            Mat a(d, d);
            Vec b(d);
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) a(i, j) = dirs[idx[i]][j];
                b[i] = c[idx[i]];
            }
            Vec x;
            if (!envc::solve(a, b, x)) return;
            double scale = 1.0;
            for (double v : x) scale = std::max(scale, std::fabs(v));
            for (int j = 0; j < m; ++j)
                if (envc::dot(dirs[j], x) > c[j] + tol * scale) return;
            for (const Vec& v : verts)
                if (envc::dist(v, x) < tol * scale * 10.0) return;
            verts.push_back(x);
            return;
        }
        for (int i = start; i <= m - (d - k); ++i) {
            idx[k] = i;
            rec(i + 1, k + 1);
        }
    };
    rec(0, 0);
    return verts;
}

inline std::vector<Vec> sorted_lex(std::vector<Vec> pts) {
    std::sort(pts.begin(), pts.end());
    return pts;
}

// max over a of min over b distances, symmetrized for two point sets
inline double hausdorff_points(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    auto one_way = [](const std::vector<Vec>& from, const std::vector<Vec>& to) {
        double worst = 0.0;
        for (const Vec& p : from) {
            double best = 1e300;
            for (const Vec& q : to) best = std::min(best, envc::dist(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_way(a, b), one_way(b, a));
}

inline double point_segment_dist(const Vec& p, const Vec& a, const Vec& b) {
    const Vec ab = envc::sub(b, a);
    const double len2 = envc::dot(ab, ab);
    double t = len2 > 0.0 ? envc::dot(envc::sub(p, a), ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    Vec proj = a;
    for (size_t k = 0; k < a.size(); ++k) proj[k] += t * ab[k];
    return envc::dist(p, proj);
}

// Hausdorff distance between a point cloud and a closed polygon boundary.
inline double hausdorff_points_polygon(const std::vector<Vec>& pts,
                                       const std::vector<Vec>& ring) {
    const int m = static_cast<int>(ring.size());
    double worst = 0.0;
    for (const Vec& p : pts) {
        double best = 1e300;
        for (int k = 0; k < m; ++k)
            best = std::min(best, point_segment_dist(p, ring[k], ring[(k + 1) % m]));
        worst = std::max(worst, best);
    }
    // polygon vertices against the cloud (dense cloud stands in for its curve)
    for (const Vec& v : ring) {
        double best = 1e300;
        for (const Vec& p : pts) best = std::min(best, envc::dist(v, p));
        worst = std::max(worst, best);
    }
    return worst;
}

// two-sample Kolmogorov-Smirnov statistic
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double ks = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        ks = std::max(ks, std::fabs(fa - fb));
    }
    return ks;
}

// random orthogonal matrix (Gram-Schmidt of a Gaussian matrix)
inline Mat random_rotation(int d, std::uint64_t seed) {
    envc::Xoshiro256 rng(seed);
    auto gauss = [&] {
        double u1 = rng.uniform01(), u2 = rng.uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    };
    Mat q(d, d);
    for (int col = 0; col < d; ++col) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = gauss();
        for (int prev = 0; prev < col; ++prev) {
            double c = 0.0;
            for (int i = 0; i < d; ++i) c += v[i] * q(i, prev);
            for (int i = 0; i < d; ++i) v[i] -= c * q(i, prev);
        }
        const double len = envc::norm(v);
        for (int i = 0; i < d; ++i) q(i, col) = v[i] / len;
    }
    return q;
}

}  // namespace oracle
