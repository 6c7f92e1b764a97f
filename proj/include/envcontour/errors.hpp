#pragma once

#include <stdexcept>
#include <string>

namespace envc {

// Conditional-distribution parameters became non-positive at some h.
struct degenerate_conditional_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A recentred percentile C^o(u) <= 0: the chosen origin is not strictly interior.
struct origin_not_interior_error : std::runtime_error {
    origin_not_interior_error(const std::string& msg, int direction)
        : std::runtime_error(msg), direction_index(direction) {}
    int direction_index;
};

// Direction set does not positively span, so the half-space intersection is unbounded.
struct unbounded_cell_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Affinely dependent input where full dimension is required.
struct rank_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Chart evaluated at a pole where the metric is singular.
struct chart_singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace envc
