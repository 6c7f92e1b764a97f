#include "envcontour/hull.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "envcontour/errors.hpp"

namespace envc {

namespace {

struct WorkFacet {
    std::vector<int> vertices;
    std::vector<int> neighbors;
    Vec normal;
    double offset = 0.0;
    bool alive = true;
    double dist = 0.0;  // scratch: signed distance of the current point
};

// Normal of the hyperplane through d points via the generalized cross product:
// n_k = (-1)^k det(E without column k), E the (d-1) x d edge matrix.
Vec facet_normal(const std::vector<Vec>& pts, const std::vector<int>& vs) {
    const int d = static_cast<int>(pts[vs[0]].size());
    Mat e(d - 1, d);
    for (int i = 1; i < d; ++i)
        for (int j = 0; j < d; ++j) e(i - 1, j) = pts[vs[i]][j] - pts[vs[0]][j];
    Vec n(d, 0.0);
    if (d == 2) {
        n[0] = e(0, 1);
        n[1] = -e(0, 0);
    } else if (d == 3) {
        n[0] = e(0, 1) * e(1, 2) - e(0, 2) * e(1, 1);
        n[1] = e(0, 2) * e(1, 0) - e(0, 0) * e(1, 2);
        n[2] = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
    } else {
        Mat minor(d - 1, d - 1);
        double sign = 1.0;
        for (int k = 0; k < d; ++k) {
            for (int i = 0; i < d - 1; ++i) {
                int cc = 0;
                for (int j = 0; j < d; ++j) {
                    if (j == k) continue;
                    minor(i, cc++) = e(i, j);
                }
            }
            n[k] = sign * det(minor);
            sign = -sign;
        }
    }
    return n;
}

struct Builder {
    const std::vector<Vec>& pts;
    int d;
    double tol;
    std::vector<WorkFacet> facets;
    Vec interior;
    bool degenerate = false;

    Builder(const std::vector<Vec>& p, int dim, double tolerance)
        : pts(p), d(dim), tol(tolerance) {}

    void make_facet(WorkFacet& f) {
        f.normal = facet_normal(pts, f.vertices);
        const double len = norm(f.normal);
        if (!(len > 1e-250)) {
            degenerate = true;
            f.normal.assign(d, 0.0);
            f.normal[0] = 1.0;
        } else {
            for (double& x : f.normal) x /= len;
        }
        double h = 0.0;
        for (int v : f.vertices) h += dot(f.normal.data(), pts[v].data(), d);
        f.offset = h / d;
        const double side = dot(f.normal.data(), interior.data(), d) - f.offset;
        if (side > 0.0) {
            for (double& x : f.normal) x = -x;
            f.offset = -f.offset;
        }
    }

    // BFS over facet adjacency starting from the most distant facet.
    std::vector<int> visible_from(int seed) {
        std::vector<int> vis;
        std::vector<int> stack{seed};
        std::vector<char> seen(facets.size(), 0);
        seen[seed] = 1;
        while (!stack.empty()) {
            const int f = stack.back();
            stack.pop_back();
            vis.push_back(f);
            for (int g : facets[f].neighbors) {
                if (g < 0 || seen[g] || !facets[g].alive) continue;
                seen[g] = 1;
                if (facets[g].dist > tol) stack.push_back(g);
            }
        }
        return vis;
    }

    void insert(int pi) {
        const double* p = pts[pi].data();
        int seed = -1;
        double best = -1e300;
        for (size_t f = 0; f < facets.size(); ++f) {
            if (!facets[f].alive) continue;
            facets[f].dist = dot(facets[f].normal.data(), p, d) - facets[f].offset;
            if (facets[f].dist > best) {
                best = facets[f].dist;
                seed = static_cast<int>(f);
            }
        }
        if (best <= tol) {
            if (best > -tol) degenerate = true;  // grazing contact, kept off the hull
            return;
        }

        std::vector<int> vis = visible_from(seed);
        std::vector<char> is_vis(facets.size(), 0);
        for (int f : vis) is_vis[f] = 1;
        // facets barely above the plane but disconnected from the seed region
        // are treated as not visible; record the tolerance-level event
        for (size_t f = 0; f < facets.size(); ++f)
            if (facets[f].alive && !is_vis[f] && facets[f].dist > tol) degenerate = true;

        // horizon ridges: (ordered ridge vertices, outside facet, its ridge slot)
        struct Horizon {
            std::vector<int> ridge;
            int outside;
            int outside_slot;
        };
        std::vector<Horizon> horizon;
        for (int f : vis) {
            const WorkFacet& wf = facets[f];
            for (int i = 0; i < d; ++i) {
                const int g = wf.neighbors[i];
                if (g >= 0 && is_vis[g]) continue;
                Horizon h;
                for (int k = 0; k < d; ++k)
                    if (k != i) h.ridge.push_back(wf.vertices[k]);
                h.outside = g;
                h.outside_slot = -1;
                if (g >= 0) {
                    for (int s = 0; s < d; ++s)
                        if (facets[g].neighbors[s] == f) h.outside_slot = s;
                }
                horizon.push_back(h);
            }
        }
        if (horizon.empty()) throw std::runtime_error("hull: empty horizon");

        // build the new cone of facets
        std::vector<int> fresh;
        std::map<std::vector<int>, std::pair<int, int>> open_ridge;  // sorted ridge -> (facet, slot)
        for (const Horizon& h : horizon) {
            WorkFacet nf;
            nf.vertices = h.ridge;
            nf.vertices.push_back(pi);
            nf.neighbors.assign(d, -1);
            make_facet(nf);
            const int nfi = static_cast<int>(facets.size());
            // ridge omitting pi links back to the outside facet
            nf.neighbors[d - 1] = h.outside;
            facets.push_back(std::move(nf));
            fresh.push_back(nfi);
            if (h.outside >= 0 && h.outside_slot >= 0)
                facets[h.outside].neighbors[h.outside_slot] = nfi;
            // ridges containing pi pair up between new facets
            for (int i = 0; i < d - 1; ++i) {
                std::vector<int> key;
                for (int k = 0; k < d; ++k)
                    if (k != i) key.push_back(facets[nfi].vertices[k]);
                std::sort(key.begin(), key.end());
                auto it = open_ridge.find(key);
                if (it == open_ridge.end()) {
                    open_ridge.emplace(std::move(key), std::make_pair(nfi, i));
                } else {
                    facets[nfi].neighbors[i] = it->second.first;
                    facets[it->second.first].neighbors[it->second.second] = nfi;
                    open_ridge.erase(it);
                }
            }
        }
        if (!open_ridge.empty()) throw std::runtime_error("hull: open ridge in horizon cone");
        for (int f : vis) facets[f].alive = false;
    }
};

}  // namespace

HullResult convex_hull_nd(const std::vector<Vec>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n == 0) throw std::invalid_argument("convex_hull: no points");
    const int d = static_cast<int>(pts[0].size());
    if (d < 2) throw std::invalid_argument("convex_hull: dimension must be >= 2");
    if (n < d + 1) throw rank_error("convex_hull: need at least dim+1 points");

    double scale = 0.0;
    for (const Vec& p : pts)
        for (double x : p) scale = std::max(scale, std::fabs(x));
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-10 * scale;

    // initial simplex: lexicographic minimum, then greedy farthest from the
    // affine hull of the points chosen so far (Gram-Schmidt residual)
    int first = 0;
    for (int i = 1; i < n; ++i)
        if (pts[i] < pts[first]) first = i;
    std::vector<int> chosen{first};
    std::vector<Vec> basis;
    while (static_cast<int>(chosen.size()) < d + 1) {
        int pick = -1;
        double best = 1e-8 * scale;  // below this the input is rank deficient
        Vec best_res;
        for (int i = 0; i < n; ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
            Vec r = sub(pts[i], pts[first]);
            for (const Vec& b : basis) {
                const double c = dot(r, b);
                for (int k = 0; k < d; ++k) r[k] -= c * b[k];
            }
            const double len = norm(r);
            if (len > best) {
                best = len;
                pick = i;
                best_res = r;
            }
        }
        if (pick < 0) throw rank_error("convex_hull: points are affinely dependent");
        chosen.push_back(pick);
        for (double& x : best_res) x /= best;
        basis.push_back(best_res);
    }

    Builder b(pts, d, tol);
    b.interior.assign(d, 0.0);
    for (int v : chosen)
        for (int k = 0; k < d; ++k) b.interior[k] += pts[v][k] / (d + 1);

    // d+1 facets of the starting simplex; facet i omits chosen[i]
    for (int i = 0; i <= d; ++i) {
        WorkFacet f;
        for (int k = 0; k <= d; ++k)
            if (k != i) f.vertices.push_back(chosen[k]);
        f.neighbors.assign(d, -1);
        b.make_facet(f);
        b.facets.push_back(std::move(f));
    }
    // the neighbor across the ridge omitting vertex v is the facet whose
    // omitted simplex vertex is v
    for (int i = 0; i <= d; ++i)
        for (int s = 0; s < d; ++s) {
            const int v = b.facets[i].vertices[s];
            for (int j = 0; j <= d; ++j)
                if (chosen[j] == v) b.facets[i].neighbors[s] = j;
        }

    std::vector<char> in_simplex(n, 0);
    for (int v : chosen) in_simplex[v] = 1;
    for (int i = 0; i < n; ++i)
        if (!in_simplex[i]) b.insert(i);

    HullResult out;
    out.dim = d;
    out.interior = b.interior;
    out.scale = scale;
    out.degenerate = b.degenerate;
    out.is_vertex.assign(n, 0);
    for (const WorkFacet& f : b.facets) {
        if (!f.alive) continue;
        for (int v : f.vertices) out.is_vertex[v] = 1;
    }
    std::vector<int> remap(b.facets.size(), -1);
    for (size_t f = 0; f < b.facets.size(); ++f) {
        if (!b.facets[f].alive) continue;
        remap[f] = static_cast<int>(out.facets.size());
        HullFacet hf;
        hf.vertices = b.facets[f].vertices;
        hf.neighbors = b.facets[f].neighbors;
        hf.normal = b.facets[f].normal;
        hf.offset = b.facets[f].offset;
        out.facets.push_back(std::move(hf));
    }
    for (HullFacet& f : out.facets)
        for (int& g : f.neighbors) g = (g >= 0 ? remap[g] : -1);
    return out;
}

}  // namespace envc
