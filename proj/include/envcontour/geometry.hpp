#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "envcontour/hull.hpp"
#include "envcontour/linalg.hpp"
#include "envcontour/percentile.hpp"

namespace envc {

struct HalfSpace {
    Vec u;           // unit normal
    double c = 0.0;  // {x : u.x <= c}
};

// Reflections s_j = o + 2 C^o(u_j) u_j of the origin across each tangent plane.
struct ReflectionSet {
    Vec origin;
    std::vector<Vec> directions;
    std::vector<Vec> points;
    Vec c_o;  // recentred percentiles C^o(u_j), all positive
};

struct PolytopeFacet {
    std::vector<int> vertices;  // indices into Polytope::vertices, ordered for output
    Vec normal;                 // outward
    double offset = 0.0;
};

struct Polytope {
    int dim = 0;
    std::vector<Vec> vertices;
    std::vector<PolytopeFacet> facets;
    bool degenerate = false;

    double support(const Vec& u) const;           // max_v u.v
    bool contains(const Vec& x, double tol) const;  // all facet constraints hold
    double diameter() const;                        // max pairwise vertex distance
};

struct ConnectivityReport {
    std::vector<char> connected;            // s_j shares a Delaunay simplex with o
    std::vector<char> degenerate_position;  // tangential contact within tolerance
    std::vector<int> offending;             // indices with connected == false
    bool any_degenerate = false;

    bool all_connected() const { return offending.empty(); }
};

// Evenly spaced unit vectors at angles 2 pi j / M. Requires M >= 3.
std::vector<Vec> grid_directions_2d(int m);

// Uniform directions on the (dim-1)-sphere: normalized iid Gaussian vectors.
std::vector<Vec> sample_directions_uniform(int m, int dim, std::uint64_t seed);

std::vector<Vec> directions_from_csv(const std::string& path);

// Positive-spanning margin of a direction set: the best min-weight convex
// combination representing the origin (solved as a small LP). The set
// positively spans R^dim exactly when the margin is positive.
double positive_span_margin(const std::vector<Vec>& directions);

// Throws origin_not_interior_error (naming the direction) when some C^o <= 0.
ReflectionSet reflection_set(const PercentileTable& table, const Vec& o);

// Chebyshev-style interior point: maximizes min_j (C_j - u_j . o) by LP.
// Returns the point; *slack receives the attained margin.
Vec chebyshev_origin(const PercentileTable& table, double* slack = nullptr);

// Internal rich result shared by voronoi_cell and delaunay_connectivity.
struct DualCell {
    Polytope cell;
    ConnectivityReport conn;
    HullResult dual;               // hull of a_j = u_j / C^o_j (origin frame)
    std::vector<Vec> dual_points;  // the a_j
    std::vector<std::vector<int>> vertex_constraints;  // constraints tight at each cell vertex
};

DualCell dual_voronoi_cell(const Vec& o, const ReflectionSet& s);

// Voronoi cell of o with respect to the reflection set, computed by polar
// duality as the half-space intersection of u_j.(x - o) <= C^o_j.
// Throws unbounded_cell_error when the directions do not positively span.
Polytope voronoi_cell(const Vec& o, const ReflectionSet& s);

ConnectivityReport delaunay_connectivity(const Vec& o, const ReflectionSet& s);

// Constraint indices adjacent to a disconnected direction j: the vertices of
// the dual facet crossed by the ray from the origin through a_j. These are the
// directions whose estimates dominate direction j.
std::vector<int> refinement_neighbors(const DualCell& dc, int j);

// Convex hull of a full-dimensional point set as a Polytope.
Polytope convex_hull(const std::vector<Vec>& points);

// Vertex order of a convex 2D polytope, counterclockwise around the centroid.
std::vector<int> polygon_order_2d(const Polytope& poly);

}  // namespace envc
