#pragma once

#include <vector>

#include "envcontour/linalg.hpp"

namespace envc {

struct HullFacet {
    std::vector<int> vertices;   // point indices, one simplex per facet
    std::vector<int> neighbors;  // neighbors[i] = facet across the ridge omitting vertices[i]
    Vec normal;                  // unit outward normal
    double offset = 0.0;         // normal . x = offset on the facet plane
};

struct HullResult {
    int dim = 0;
    std::vector<HullFacet> facets;
    std::vector<char> is_vertex;  // per input point
    Vec interior;                 // reference interior point (initial simplex centroid)
    double scale = 1.0;           // coordinate magnitude used for tolerances
    bool degenerate = false;      // some insertion decision fell within tolerance

    // signed distance of x above facet f (positive outside)
    double above(int f, const double* x) const {
        return dot(facets[f].normal.data(), x, dim) - facets[f].offset;
    }
};

// Incremental convex hull in general dimension (d >= 2). Points are inserted in
// index order with a fixed tolerance rule, so the output is deterministic.
// Throws rank_error when the input is not full-dimensional.
HullResult convex_hull_nd(const std::vector<Vec>& pts);

}  // namespace envc
