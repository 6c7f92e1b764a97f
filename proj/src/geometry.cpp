#include "envcontour/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "envcontour/errors.hpp"
#include "envcontour/linprog.hpp"
#include "envcontour/rng.hpp"
#include "envcontour/stats.hpp"

namespace envc {

namespace {
constexpr double kPi = std::numbers::pi;
}

double Polytope::support(const Vec& u) const {
    double best = -1e300;
    for (const Vec& v : vertices) best = std::max(best, dot(u, v));
    return best;
}

bool Polytope::contains(const Vec& x, double tol) const {
    for (const PolytopeFacet& f : facets)
        if (dot(f.normal, x) > f.offset + tol) return false;
    return true;
}

double Polytope::diameter() const {
    double best = 0.0;
    for (size_t i = 0; i < vertices.size(); ++i)
        for (size_t j = i + 1; j < vertices.size(); ++j)
            best = std::max(best, dist(vertices[i], vertices[j]));
    return best;
}

std::vector<Vec> grid_directions_2d(int m) {
    if (m < 3) throw std::invalid_argument("grid_directions_2d: need M >= 3 to bound a 2D cell");
    std::vector<Vec> dirs;
    dirs.reserve(m);
    for (int j = 0; j < m; ++j) {
        const double a = 2.0 * kPi * j / m;
        dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
}

std::vector<Vec> sample_directions_uniform(int m, int dim, std::uint64_t seed) {
    if (dim < 2) throw std::invalid_argument("sample_directions_uniform: dim must be >= 2");
    if (m < dim + 1) throw std::invalid_argument("sample_directions_uniform: need M >= dim+1");
    std::vector<Vec> dirs;
    dirs.reserve(m);
    for (int j = 0; j < m; ++j) {
        Xoshiro256 rng = row_rng(seed, static_cast<std::uint64_t>(j));
        Vec v(dim);
        double len = 0.0;
        do {
            for (int k = 0; k < dim; ++k) v[k] = norm_quantile(rng.uniform01());
            len = norm(v);
        } while (!(len > 1e-8));
        for (double& x : v) x /= len;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

std::vector<Vec> directions_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("directions: cannot open " + path);
    std::vector<Vec> dirs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // header
        Vec v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.empty()) continue;
        dirs.push_back(Direction(std::move(v)).u);
    }
    if (dirs.empty()) throw std::invalid_argument("directions: no rows in " + path);
    return dirs;
}

double positive_span_margin(const std::vector<Vec>& directions) {
    const int m = static_cast<int>(directions.size());
    const int d = static_cast<int>(directions[0].size());
    // max t  s.t.  sum_j (nu_j + t) u_j = 0,  sum_j (nu_j + t) = 1,  nu >= 0
    // variables: nu_1..nu_m, t+ , t-
    Mat a(d + 1, m + 2);
    Vec b(d + 1, 0.0), c(m + 2, 0.0);
    Vec usum(d, 0.0);
    for (const Vec& u : directions)
        for (int k = 0; k < d; ++k) usum[k] += u[k];
    for (int k = 0; k < d; ++k) {
        for (int j = 0; j < m; ++j) a(k, j) = directions[j][k];
        a(k, m) = usum[k];
        a(k, m + 1) = -usum[k];
    }
    for (int j = 0; j < m; ++j) a(d, j) = 1.0;
    a(d, m) = m;
    a(d, m + 1) = -m;
    b[d] = 1.0;
    c[m] = -1.0;
    c[m + 1] = 1.0;
    const LpResult lp = simplex_solve(a, b, c);
    if (lp.status != LpResult::Status::optimal) return -1.0;
    return -lp.value;
}

ReflectionSet reflection_set(const PercentileTable& table, const Vec& o) {
    table.check();
    ReflectionSet s;
    s.origin = o;
    s.directions = table.directions;
    s.c_o.resize(table.size());
    s.points.resize(table.size());
    for (size_t j = 0; j < table.size(); ++j) {
        const double co = recentre(table.values[j], table.directions[j], o);
        if (!(co > 0.0)) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "origin not interior: C^o(u_%zu) = %.6g <= 0", j, co);
            throw origin_not_interior_error(buf, static_cast<int>(j));
        }
        s.c_o[j] = co;
        Vec p(o.size());
        for (size_t k = 0; k < o.size(); ++k) p[k] = o[k] + 2.0 * co * table.directions[j][k];
        s.points[j] = std::move(p);
    }
    return s;
}

Vec chebyshev_origin(const PercentileTable& table, double* slack) {
    table.check();
    const int m = static_cast<int>(table.size());
    const int d = table.dim;
    // dual of  max t  s.t.  u_j . o + t <= C_j :
    // min sum y_j C_j  s.t.  sum y_j u_j = 0, sum y_j = 1, y >= 0
    Mat a(d + 1, m);
    Vec b(d + 1, 0.0);
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < d; ++k) a(k, j) = table.directions[j][k];
        a(d, j) = 1.0;
    }
    b[d] = 1.0;
    const LpResult lp = simplex_solve(a, b, table.values);
    if (lp.status != LpResult::Status::optimal)
        throw unbounded_cell_error("chebyshev_origin: directions do not positively span");
    Vec o(lp.dual.begin(), lp.dual.begin() + d);
    if (slack) *slack = lp.value;
    return o;
}

DualCell dual_voronoi_cell(const Vec& o, const ReflectionSet& s) {
    const int d = static_cast<int>(o.size());
    const int m = static_cast<int>(s.points.size());

    const double margin = positive_span_margin(s.directions);
    if (!(margin > 1e-12))
        throw unbounded_cell_error(
            "voronoi_cell: directions do not positively span (margin " + std::to_string(margin) + ")");

    std::vector<Vec> dual_pts(m);
    for (int j = 0; j < m; ++j) {
        dual_pts[j].resize(d);
        for (int k = 0; k < d; ++k) dual_pts[j][k] = s.directions[j][k] / s.c_o[j];
    }

    DualCell dc;
    dc.dual = convex_hull_nd(dual_pts);
    dc.dual_points = dual_pts;

    // primal vertex of each dual facet: o + n / h
    const int nf = static_cast<int>(dc.dual.facets.size());
    std::vector<Vec> raw(nf);
    double vscale = 0.0;
    for (int f = 0; f < nf; ++f) {
        const HullFacet& hf = dc.dual.facets[f];
        if (!(hf.offset > 1e-12 / dc.dual.scale))
            throw unbounded_cell_error("voronoi_cell: dual hull does not enclose the origin");
        raw[f].resize(d);
        for (int k = 0; k < d; ++k) raw[f][k] = hf.normal[k] / hf.offset;
        vscale = std::max(vscale, norm(raw[f]));
    }

    // merge vertices shared by more than d constraints
    Polytope& cell = dc.cell;
    cell.dim = d;
    cell.degenerate = dc.dual.degenerate;
    std::vector<int> facet_vertex(nf, -1);
    const double merge_tol = 1e-9 * (1.0 + vscale);
    for (int f = 0; f < nf; ++f) {
        int hit = -1;
        for (size_t v = 0; v < cell.vertices.size(); ++v) {
            double dd = 0.0;
            for (int k = 0; k < d; ++k) {
                const double t = cell.vertices[v][k] - (o[k] + raw[f][k]);
                dd += t * t;
            }
            if (std::sqrt(dd) <= merge_tol) {
                hit = static_cast<int>(v);
                break;
            }
        }
        if (hit < 0) {
            hit = static_cast<int>(cell.vertices.size());
            cell.vertices.push_back(add(o, raw[f]));
        }
        facet_vertex[f] = hit;
    }

    dc.vertex_constraints.assign(cell.vertices.size(), {});
    for (int f = 0; f < nf; ++f) {
        auto& vc = dc.vertex_constraints[facet_vertex[f]];
        for (int j : dc.dual.facets[f].vertices)
            if (std::find(vc.begin(), vc.end(), j) == vc.end()) vc.push_back(j);
    }
    for (auto& vc : dc.vertex_constraints) std::sort(vc.begin(), vc.end());

    // one primal facet per non-redundant constraint
    std::vector<std::vector<int>> facet_verts(m);
    for (int f = 0; f < nf; ++f)
        for (int j : dc.dual.facets[f].vertices) {
            auto& fv = facet_verts[j];
            if (std::find(fv.begin(), fv.end(), facet_vertex[f]) == fv.end())
                fv.push_back(facet_vertex[f]);
        }
    for (int j = 0; j < m; ++j) {
        if (!dc.dual.is_vertex[j] || static_cast<int>(facet_verts[j].size()) < d) continue;
        PolytopeFacet pf;
        pf.vertices = facet_verts[j];
        pf.normal = s.directions[j];
        pf.offset = dot(s.directions[j], o) + s.c_o[j];
        if (d == 2) {
            // order the two endpoints deterministically
            std::sort(pf.vertices.begin(), pf.vertices.end());
        } else if (d == 3) {
            // order around the facet normal
            Vec centroid(3, 0.0);
            for (int v : pf.vertices)
                for (int k = 0; k < 3; ++k) centroid[k] += cell.vertices[v][k] / pf.vertices.size();
            Vec ax = pf.normal;
            Vec e1(3), e2(3);
            const int least = std::fabs(ax[0]) < std::fabs(ax[1])
                                  ? (std::fabs(ax[0]) < std::fabs(ax[2]) ? 0 : 2)
                                  : (std::fabs(ax[1]) < std::fabs(ax[2]) ? 1 : 2);
            Vec tmp(3, 0.0);
            tmp[least] = 1.0;
            e1 = {ax[1] * tmp[2] - ax[2] * tmp[1], ax[2] * tmp[0] - ax[0] * tmp[2],
                  ax[0] * tmp[1] - ax[1] * tmp[0]};
            const double l1 = norm(e1);
            for (double& x : e1) x /= l1;
            e2 = {ax[1] * e1[2] - ax[2] * e1[1], ax[2] * e1[0] - ax[0] * e1[2],
                  ax[0] * e1[1] - ax[1] * e1[0]};
            std::sort(pf.vertices.begin(), pf.vertices.end(), [&](int p, int q) {
                const Vec dp = sub(cell.vertices[p], centroid);
                const Vec dq = sub(cell.vertices[q], centroid);
                return std::atan2(dot(dp, e2), dot(dp, e1)) < std::atan2(dot(dq, e2), dot(dq, e1));
            });
        } else {
            std::sort(pf.vertices.begin(), pf.vertices.end());
        }
        cell.facets.push_back(std::move(pf));
    }

    // connectivity: constraint j supports the cell iff a_j is a dual hull vertex
    dc.conn.connected.assign(m, 0);
    dc.conn.degenerate_position.assign(m, 0);
    for (int j = 0; j < m; ++j) {
        dc.conn.connected[j] = dc.dual.is_vertex[j];
        if (!dc.dual.is_vertex[j]) {
            double depth = 1e300;
            for (int f = 0; f < nf; ++f)
                depth = std::min(depth, -dc.dual.above(f, dual_pts[j].data()));
            if (depth <= 1e-8 * dc.dual.scale) dc.conn.degenerate_position[j] = 1;
            dc.conn.offending.push_back(j);
        }
    }
    dc.conn.any_degenerate = dc.dual.degenerate;
    for (char f : dc.conn.degenerate_position) dc.conn.any_degenerate |= (f != 0);
    return dc;
}

Polytope voronoi_cell(const Vec& o, const ReflectionSet& s) {
    return dual_voronoi_cell(o, s).cell;
}

ConnectivityReport delaunay_connectivity(const Vec& o, const ReflectionSet& s) {
    return dual_voronoi_cell(o, s).conn;
}

std::vector<int> refinement_neighbors(const DualCell& dc, int j) {
    // The ray from the dual origin through a_j exits the dual hull through one
    // facet; that facet's vertices are the constraints dominating direction j.
    const Vec& aj = dc.dual_points[j];
    const int d = dc.dual.dim;
    double best_t = 1e300;
    int best_f = -1;
    for (size_t f = 0; f < dc.dual.facets.size(); ++f) {
        const HullFacet& hf = dc.dual.facets[f];
        const double denom = dot(hf.normal.data(), aj.data(), d);
        if (denom > 1e-14 * dc.dual.scale) {
            const double t = hf.offset / denom;
            if (t < best_t) {
                best_t = t;
                best_f = static_cast<int>(f);
            }
        }
    }
    std::vector<int> out{j};
    if (best_f >= 0)
        for (int v : dc.dual.facets[best_f].vertices)
            if (v != j) out.push_back(v);
    return out;
}

Polytope convex_hull(const std::vector<Vec>& points) {
    HullResult h = convex_hull_nd(points);
    Polytope p;
    p.dim = h.dim;
    p.degenerate = h.degenerate;
    std::vector<int> remap(points.size(), -1);
    for (size_t i = 0; i < points.size(); ++i)
        if (h.is_vertex[i]) {
            remap[i] = static_cast<int>(p.vertices.size());
            p.vertices.push_back(points[i]);
        }
    for (const HullFacet& f : h.facets) {
        PolytopeFacet pf;
        for (int v : f.vertices) pf.vertices.push_back(remap[v]);
        pf.normal = f.normal;
        pf.offset = f.offset;
        p.facets.push_back(std::move(pf));
    }
    return p;
}

std::vector<int> polygon_order_2d(const Polytope& poly) {
    if (poly.dim != 2) throw std::invalid_argument("polygon_order_2d: polytope is not 2D");
    Vec c(2, 0.0);
    for (const Vec& v : poly.vertices) {
        c[0] += v[0] / poly.vertices.size();
        c[1] += v[1] / poly.vertices.size();
    }
    std::vector<int> order(poly.vertices.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int p, int q) {
        const double ap = std::atan2(poly.vertices[p][1] - c[1], poly.vertices[p][0] - c[0]);
        const double aq = std::atan2(poly.vertices[q][1] - c[1], poly.vertices[q][0] - c[0]);
        return ap < aq;
    });
    return order;
}

}  // namespace envc
