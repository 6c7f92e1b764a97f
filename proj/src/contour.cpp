#include "envcontour/contour.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "envcontour/errors.hpp"
#include "envcontour/parallel.hpp"
#include "envcontour/rng.hpp"

namespace envc {

Vec select_origin(const SampleSet& samples, bool* fell_back) {
    const int d = samples.dim;
    if (samples.n < d + 1) throw std::invalid_argument("select_origin: need at least dim+1 samples");
    if (fell_back) *fell_back = false;

    // coordinate-wise median as the starting point (and the fallback)
    Vec start(d);
    {
        Vec col(samples.n);
        for (int k = 0; k < d; ++k) {
            for (std::int64_t i = 0; i < samples.n; ++i) col[i] = samples.row(i)[k];
            auto mid = col.begin() + samples.n / 2;
            std::nth_element(col.begin(), mid, col.end());
            start[k] = *mid;
        }
    }

    double scale = 1.0;
    for (std::int64_t i = 0; i < std::min<std::int64_t>(samples.n, 1000); ++i)
        scale = std::max(scale, norm(samples.row(i), d));

    Vec o = start;
    const double eps = 1e-12 * scale;
    for (int iter = 0; iter < 500; ++iter) {
        Vec acc(d + 1, 0.0);  // weighted coordinate sums + weight sum
        slot_accumulate(samples.n, d + 1, [&](std::int64_t i, double* a) {
            const double* x = samples.row(i);
            double dd = 0.0;
            for (int k = 0; k < d; ++k) {
                const double t = x[k] - o[k];
                dd += t * t;
            }
            dd = std::sqrt(dd);
            if (dd <= eps) return;  // coincident sample contributes no pull
            const double w = 1.0 / dd;
            for (int k = 0; k < d; ++k) a[k] += w * x[k];
            a[d] += w;
        }, acc.data());
        if (!(acc[d] > 0.0)) return o;  // every sample coincides with o
        Vec next(d);
        for (int k = 0; k < d; ++k) next[k] = acc[k] / acc[d];
        const double step = dist(next, o);
        o = next;
        if (step <= 1e-8 * scale) return o;
    }
    std::fprintf(stderr, "warning: geometric median did not converge; using coordinate-wise median\n");
    if (fell_back) *fell_back = true;
    return start;
}

namespace {

std::uint64_t refine_seed(std::uint64_t seed, int round) {
    std::uint64_t st = seed ^ (0xC0FFEEULL + 77ULL * static_cast<std::uint64_t>(round));
    return splitmix64(st);
}

}  // namespace

ContourResult voronoi_contour(const JointModel& model, double pe,
                              const std::vector<Vec>& directions, std::int64_t n,
                              std::uint64_t seed, const ContourOptions& opts) {
    if (!(pe > 0.0 && pe < 0.5))
        throw std::invalid_argument("voronoi_contour: pe must lie in (0, 0.5)");

    ContourResult res;
    const SampleSet samples = sample(model, n, seed);
    res.table = estimate_table(samples, directions, pe, opts.estimate);

    // origin: requested strategy first, Chebyshev LP if interiority fails
    Vec o;
    res.origin_strategy = opts.origin_strategy;
    if (opts.origin_strategy == "lp") {
        double slack = 0.0;
        o = chebyshev_origin(res.table, &slack);
        if (!(slack > 0.0))
            throw std::runtime_error("voronoi_contour: distribution degenerate, no interior origin");
    } else if (opts.origin_strategy == "explicit") {
        o = opts.origin_explicit;
        if (static_cast<int>(o.size()) != samples.dim)
            throw std::invalid_argument("voronoi_contour: explicit origin has wrong dimension");
    } else {
        o = select_origin(samples);
    }
    auto min_recentred = [&](const Vec& origin) {
        double lo = 1e300;
        for (size_t j = 0; j < res.table.size(); ++j)
            lo = std::min(lo, recentre(res.table.values[j], res.table.directions[j], origin));
        return lo;
    };
    if (!(min_recentred(o) > 0.0)) {
        double slack = 0.0;
        Vec fixed = chebyshev_origin(res.table, &slack);
        if (!(slack > 0.0))
            throw std::runtime_error("voronoi_contour: distribution degenerate, no interior origin");
        o = fixed;
        res.origin_strategy += "->lp";
    }
    res.origin = o;

    ReflectionSet refl = reflection_set(res.table, o);
    DualCell dc = dual_voronoi_cell(o, refl);

    // step-5 refinement: re-estimate disconnected directions and their dual
    // neighbors at 4x the sample count per round. New draws are pooled with the
    // existing ones so refined estimates stay correlated with their unrefined
    // neighbors through the shared base sample. A round that does not strictly
    // reduce the disconnected count is reverted and ends the loop: re-estimating
    // a subset perturbs the noise cancellation between adjacent near-redundant
    // constraints, so on dense direction grids refinement cannot converge, and
    // a genuine concavity never reconnects regardless of sample count.
    std::set<int> refined;
    SampleSet pool = samples;
    std::int64_t n_round = n;
    for (int round = 0; round < opts.refine_rounds && !dc.conn.all_connected(); ++round) {
        n_round *= opts.refine_factor;
        std::set<int> targets;
        for (int j : dc.conn.offending)
            for (int k : refinement_neighbors(dc, j)) targets.insert(k);
        const SampleSet fresh = sample(model, n_round - pool.n, refine_seed(seed, round));
        pool.points.insert(pool.points.end(), fresh.points.begin(), fresh.points.end());
        pool.n = n_round;
        std::vector<Vec> target_dirs;
        for (int j : targets) target_dirs.push_back(res.table.directions[j]);
        EstimateOptions sub_opts;
        sub_opts.conservative_k = opts.estimate.conservative_k;
        const PercentileTable sub = estimate_table(pool, target_dirs, pe, sub_opts);

        const Vec saved_values = res.table.values;
        const Vec saved_origin = o;
        {
            size_t k = 0;
            for (int j : targets) res.table.values[j] = sub.values[k++];
        }
        if (!(min_recentred(o) > 0.0)) {
            double slack = 0.0;
            o = chebyshev_origin(res.table, &slack);
            if (!(slack > 0.0))
                throw std::runtime_error("voronoi_contour: distribution degenerate after refinement");
        }
        ReflectionSet refl_new = reflection_set(res.table, o);
        DualCell dc_new = dual_voronoi_cell(o, refl_new);
        res.refinement_rounds = round + 1;
        if (dc_new.conn.offending.size() >= dc.conn.offending.size()) {
            res.table.values = saved_values;
            o = saved_origin;
            break;
        }
        if (o != saved_origin) res.origin_strategy += "->lp";
        res.origin = o;
        refl = std::move(refl_new);
        dc = std::move(dc_new);
        for (int j : targets) refined.insert(j);
    }
    res.refined_directions.assign(refined.begin(), refined.end());

    res.cell = dc.cell;
    res.connectivity = dc.conn;
    if (!dc.conn.all_connected())
        res.status = ContourResult::Status::invalid;
    else if (dc.conn.any_degenerate)
        res.status = ContourResult::Status::degenerate;
    else
        res.status = ContourResult::Status::proper_candidate;
    return res;
}

Polytope corrected_contour(const ContourResult& result) {
    const Polytope& cell = result.cell;
    const PercentileTable& t = result.table;
    if (cell.vertices.empty()) throw std::invalid_argument("corrected_contour: empty cell");

    double scale = 1.0;
    for (const Vec& v : cell.vertices) scale = std::max(scale, norm(v));

    std::vector<Vec> z = cell.vertices;
    for (size_t j = 0; j < t.size(); ++j) {
        const Vec& u = t.directions[j];
        // support vertex in direction u, then its projection onto the plane u.x = C_j
        size_t best = 0;
        double bestdot = -1e300;
        for (size_t v = 0; v < cell.vertices.size(); ++v) {
            const double s = dot(u, cell.vertices[v]);
            if (s > bestdot) {
                bestdot = s;
                best = v;
            }
        }
        Vec proj = cell.vertices[best];
        const double push = t.values[j] - bestdot;
        for (size_t k = 0; k < u.size(); ++k) proj[k] += push * u[k];
        bool dup = false;
        for (const Vec& existing : z)
            if (dist(existing, proj) <= 1e-12 * scale) {
                dup = true;
                break;
            }
        if (!dup) z.push_back(std::move(proj));
    }
    return convex_hull(z);
}

ValidityReport validate_contour(const Polytope& poly, const PercentileTable& table, double tol) {
    if (poly.vertices.empty()) throw std::invalid_argument("validate_contour: empty polytope");
    ValidityReport r;
    r.tol = tol;
    r.gaps.resize(table.size());
    r.max_gap = -1e300;
    r.min_gap = 1e300;
    for (size_t j = 0; j < table.size(); ++j) {
        const double g = table.values[j] - poly.support(table.directions[j]);
        r.gaps[j] = g;
        r.max_gap = std::max(r.max_gap, g);
        r.min_gap = std::min(r.min_gap, g);
    }
    if (r.max_gap > tol)
        r.classification = ValidityReport::Classification::invalid;
    else if (r.min_gap < -tol)
        r.classification = ValidityReport::Classification::valid_improper;
    else
        r.classification = ValidityReport::Classification::proper;
    return r;
}

namespace {

Exceedance exceedance_impl(const HalfSpace& h, const JointModel& model, std::int64_t n,
                           std::uint64_t seed, bool parallel) {
    if (n < 10000) throw std::invalid_argument("exceedance_probability: need n >= 1e4");
    if (!std::isfinite(h.c)) throw std::invalid_argument("exceedance_probability: offset must be finite");
    const SampleSet s = parallel ? sample(model, n, seed) : sample_serial(model, n, seed);
    const int d = s.dim;
    std::int64_t count = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : count) num_threads(worker_count()) if (parallel)
#endif
    for (std::int64_t i = 0; i < n; ++i)
        if (dot(s.row(i), h.u.data(), d) > h.c) ++count;
    Exceedance e;
    e.p_hat = static_cast<double>(count) / static_cast<double>(n);
    e.se = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n));
    return e;
}

}  // namespace

Exceedance exceedance_probability(const HalfSpace& h, const JointModel& model,
                                  std::int64_t n, std::uint64_t seed) {
    return exceedance_impl(h, model, n, seed, true);
}

Exceedance exceedance_probability_serial(const HalfSpace& h, const JointModel& model,
                                         std::int64_t n, std::uint64_t seed) {
    return exceedance_impl(h, model, n, seed, false);
}

std::vector<Exceedance> exceedance_on_samples(const std::vector<HalfSpace>& hs,
                                              const SampleSet& samples) {
    const int m = static_cast<int>(hs.size());
    std::vector<std::int64_t> counts(m, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
#endif
    for (int j = 0; j < m; ++j) {
        std::int64_t c = 0;
        for (std::int64_t i = 0; i < samples.n; ++i)
            if (dot(samples.row(i), hs[j].u.data(), samples.dim) > hs[j].c) ++c;
        counts[j] = c;
    }
    std::vector<Exceedance> out(m);
    for (int j = 0; j < m; ++j) {
        out[j].p_hat = static_cast<double>(counts[j]) / static_cast<double>(samples.n);
        out[j].se = std::sqrt(out[j].p_hat * (1.0 - out[j].p_hat) / static_cast<double>(samples.n));
    }
    return out;
}

namespace {

int orient(const Vec& a, const Vec& b, const Vec& c) {
    const double v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    const double mag = std::fabs(b[0] - a[0]) + std::fabs(b[1] - a[1]) +
                       std::fabs(c[0] - a[0]) + std::fabs(c[1] - a[1]);
    if (std::fabs(v) <= 1e-14 * mag * mag) return 0;
    return v > 0 ? 1 : -1;
}

bool segments_cross(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

DirectContour2D direct_contour_2d(const PercentileTable& table) {
    table.check();
    if (table.dim != 2) throw std::invalid_argument("direct_contour_2d: table is not 2D");
    const int m = static_cast<int>(table.size());
    if (m < 3) throw std::invalid_argument("direct_contour_2d: need at least 3 directions");

    DirectContour2D out;
    out.points.resize(m);
    for (int k = 0; k < m; ++k) {
        const Vec& u0 = table.directions[k];
        const Vec& u1 = table.directions[(k + 1) % m];
        const double den = u0[0] * u1[1] - u0[1] * u1[0];
        if (std::fabs(den) < 1e-12)
            throw std::invalid_argument("direct_contour_2d: consecutive directions are parallel");
        const double c0 = table.values[k], c1 = table.values[(k + 1) % m];
        out.points[k] = {(c0 * u1[1] - c1 * u0[1]) / den, (c1 * u0[0] - c0 * u1[0]) / den};
    }

    // sweep over segments sorted by min-x; prune by x-interval overlap
    struct Seg {
        double x0, x1;
        int id;
    };
    std::vector<Seg> segs(m);
    for (int k = 0; k < m; ++k) {
        const Vec& a = out.points[k];
        const Vec& b = out.points[(k + 1) % m];
        segs[k] = {std::min(a[0], b[0]), std::max(a[0], b[0]), k};
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.x0 < b.x0; });
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (segs[j].x0 > segs[i].x1) break;
            const int p = std::min(segs[i].id, segs[j].id);
            const int q = std::max(segs[i].id, segs[j].id);
            if (q == p + 1 || (p == 0 && q == m - 1)) continue;  // adjacent segments share a point
            if (segments_cross(out.points[p], out.points[(p + 1) % m], out.points[q],
                               out.points[(q + 1) % m]))
                out.loop_pairs.emplace_back(p, q);
        }
    }
    std::sort(out.loop_pairs.begin(), out.loop_pairs.end());
    return out;
}

const char* to_string(ContourResult::Status s) {
    switch (s) {
        case ContourResult::Status::proper_candidate: return "proper-candidate";
        case ContourResult::Status::invalid: return "invalid";
        case ContourResult::Status::degenerate: return "degenerate";
    }
    return "?";
}

const char* to_string(ValidityReport::Classification c) {
    switch (c) {
        case ValidityReport::Classification::proper: return "proper";
        case ValidityReport::Classification::valid_improper: return "valid-improper";
        case ValidityReport::Classification::invalid: return "invalid";
    }
    return "?";
}

}  // namespace envc
