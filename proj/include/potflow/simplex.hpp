#pragma once

#include <cstddef>
#include <vector>

namespace potflow {

// min sum(x) subject to A x = rhs, x >= 0, where column j of A is columns[j].
// All rhs entries must be >= 0.
struct LpProblem {
    std::vector<std::vector<double>> columns;
    std::vector<double> rhs;
};

struct LpSolution {
    double objective = 0.0;
    std::vector<double> weights;  // one per column
    double duality_gap = 0.0;     // |objective - y'rhs| after refinement
    std::vector<double> dual;     // y
    int iterations = 0;
};

// Dense two-phase simplex with Bland's rule (finite termination even under
// degeneracy, which is common here: many configurations deliver identical
// flows). The final basic solution is re-solved against the original column
// data and certified by the duality gap. Throws Error(Infeasible) when the
// rhs is not reachable and Error(NumericFailure) if certification fails.
LpSolution solve_min_time_lp(const LpProblem& problem);

} // namespace potflow
