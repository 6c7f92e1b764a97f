#pragma once

#include "envcontour/linalg.hpp"

namespace envc {

struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::infeasible;
    Vec x;       // primal solution, length = columns of A
    Vec dual;    // simplex multipliers, length = rows of A
    double value = 0.0;
};

// Minimize c.x subject to A x = b, x >= 0. Dense two-phase simplex with
// Bland's rule. Intended for small systems (few equality rows).
LpResult simplex_solve(const Mat& a, const Vec& b, const Vec& c);

}  // namespace envc
