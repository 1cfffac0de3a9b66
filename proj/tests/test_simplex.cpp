#include "potflow/errors.hpp"
#include "potflow/rng.hpp"
#include "potflow/simplex.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace potflow;

namespace {

double residual_inf_norm(const LpProblem& lp, const LpSolution& sol) {
    double worst = 0.0;
    for (size_t i = 0; i < lp.rhs.size(); ++i) {
        double lhs = 0.0;
        for (size_t j = 0; j < lp.columns.size(); ++j)
            lhs += lp.columns[j][i] * sol.weights[j];
        worst = std::max(worst, std::abs(lhs - lp.rhs[i]));
    }
    return worst;
}

} // namespace

TEST_CASE("identity columns just copy the rhs") {
    LpProblem lp;
    lp.columns = {{1.0, 0.0}, {0.0, 1.0}};
    lp.rhs = {3.0, 5.0};
    const LpSolution sol = solve_min_time_lp(lp);
    CHECK(sol.objective == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(sol.weights[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(sol.weights[1] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(sol.duality_gap <= 1e-10 * 8.0);
}

TEST_CASE("a combined column is preferred when it is cheaper") {
    LpProblem lp;
    lp.columns = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    lp.rhs = {3.0, 5.0};
    const LpSolution sol = solve_min_time_lp(lp);
    // serve both rows at once while possible: 3 on the joint column, 2 on e2
    CHECK(sol.objective == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(sol.weights[2] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(sol.weights[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sol.weights[0] == 0.0);
    CHECK(residual_inf_norm(lp, sol) <= 1e-12);
}

TEST_CASE("proportional columns leave no choice") {
    LpProblem lp;
    lp.columns = {{1.0, 1.0}, {2.0, 2.0}};
    lp.rhs = {2.0, 2.0};
    const LpSolution sol = solve_min_time_lp(lp);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-14)); // fast column wins
    CHECK(residual_inf_norm(lp, sol) <= 1e-12);
}

TEST_CASE("zero rhs costs nothing") {
    LpProblem lp;
    lp.columns = {{1.0, 0.0}, {0.0, 1.0}};
    lp.rhs = {0.0, 0.0};
    const LpSolution sol = solve_min_time_lp(lp);
    CHECK(sol.objective <= 1e-14);
}

TEST_CASE("mixed zero and positive rhs rows") {
    LpProblem lp;
    lp.columns = {{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}};
    lp.rhs = {0.0, 4.0};
    const LpSolution sol = solve_min_time_lp(lp);
    CHECK(sol.objective == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(residual_inf_norm(lp, sol) <= 1e-12);
}

TEST_CASE("unreachable rhs is reported as infeasible") {
    LpProblem lp;
    lp.columns = {{1.0, 0.0}};
    lp.rhs = {1.0, 1.0};
    try {
        solve_min_time_lp(lp);
        FAIL("expected infeasibility");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Infeasible);
    }
}

TEST_CASE("no columns at all is infeasible unless the rhs is zero") {
    LpProblem lp;
    lp.rhs = {1.0};
    CHECK_THROWS_AS(solve_min_time_lp(lp), Error);
    lp.rhs = {0.0};
    CHECK(solve_min_time_lp(lp).objective == 0.0);
}

TEST_CASE("negative rhs entries are rejected") {
    LpProblem lp;
    lp.columns = {{1.0}};
    lp.rhs = {-1.0};
    try {
        solve_min_time_lp(lp);
        FAIL("expected an argument error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("duplicated columns do not stall the pivoting") {
    LpProblem lp;
    lp.columns = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 0.0}};
    lp.rhs = {2.0, 1.0};
    const LpSolution sol = solve_min_time_lp(lp);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(residual_inf_norm(lp, sol) <= 1e-12);
}

TEST_CASE("random feasible problems are solved and certified") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 1 + static_cast<int>(rng.integer(0, 5));
        const int cols = rows + static_cast<int>(rng.integer(0, 7));
        LpProblem lp;
        lp.columns.assign(cols, std::vector<double>(rows));
        for (auto& col : lp.columns)
            for (double& a : col) a = rng.uniform(0.0, 4.0);

        // build the rhs from a known mix so the problem is feasible
        std::vector<double> mix(cols);
        double mix_cost = 0.0;
        for (double& w : mix) {
            w = rng.uniform() < 0.4 ? 0.0 : rng.uniform(0.0, 2.0);
            mix_cost += w;
        }
        lp.rhs.assign(rows, 0.0);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) lp.rhs[i] += lp.columns[j][i] * mix[j];

        const LpSolution sol = solve_min_time_lp(lp);
        CHECK(sol.objective <= mix_cost + 1e-9);
        CHECK(residual_inf_norm(lp, sol) <= 1e-9);
        CHECK(sol.duality_gap <= 1e-10 * std::max(1.0, sol.objective));
        for (const double w : sol.weights) CHECK(w >= 0.0);
        CHECK(sol.iterations >= 0);
        REQUIRE(sol.dual.size() == static_cast<size_t>(rows));
        // dual feasibility: every column prices out at no less than its cost
        for (const auto& col : lp.columns) {
            double priced = 0.0;
            for (int i = 0; i < rows; ++i) priced += sol.dual[i] * col[i];
            CHECK(priced <= 1.0 + 1e-8);
        }
    }
}
