#include "potflow/discrete.hpp"

#include "potflow/errors.hpp"
#include "potflow/simplex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace potflow {

namespace {

void check_demands(const Network& net, const std::map<std::string, double>& demands) {
    if (demands.size() != net.demands.size())
        throw Error(ErrorCode::InvalidArgument,
                    "demand map must cover every demand node exactly once");
    for (const auto& [id, d] : demands) {
        if (!net.demands.count(id))
            throw Error(ErrorCode::InvalidArgument,
                        "\"" + id + "\" is not a demand node");
        if (!(d >= 0.0) || !std::isfinite(d))
            throw Error(ErrorCode::InvalidArgument,
                        "demand at \"" + id + "\" must be finite and >= 0");
    }
}

} // namespace

std::vector<ConfigColumn> enumerate_configurations(const Network& net) {
    const auto sinks = net.demand_ids();
    const int t = static_cast<int>(sinks.size());
    if (t > 20)
        throw Error(ErrorCode::TooManySinks,
                    "exhaustive enumeration is limited to 20 demand nodes");
    std::vector<ConfigColumn> out;
    if (t == 0) return out;
    out.reserve((1u << t) - 1);

    const Solver solver(net);
    for (std::uint32_t mask = 1; mask < (1u << t); ++mask) {
        ConfigColumn col;
        col.mask = mask;
        for (int i = 0; i < t; ++i)
            if (mask & (1u << i)) col.open.push_back(sinks[i]);
        const FlowState st = solver.solve(ValveConfiguration::open_set(net, col.open));
        const auto flows = st.sink_flows(net);
        col.sink_flows.reserve(t);
        for (const auto& id : sinks) col.sink_flows.push_back(flows.at(id));
        out.push_back(std::move(col));
    }
    return out;
}

Schedule schedule_S(const Network& net, const std::map<std::string, double>& demands) {
    require_valid(net);
    check_demands(net, demands);

    Schedule sched;
    std::map<std::string, double> remaining = demands;
    for (const auto& [id, d] : demands) sched.delivered[id] = 0.0;

    std::vector<std::string> open;
    for (const auto& [id, d] : remaining)
        if (d > 0.0) open.push_back(id);

    const Solver solver(net);
    const size_t max_steps = open.size() + 1;
    while (!open.empty()) {
        if (sched.steps.size() > max_steps)
            throw Error(ErrorCode::NumericFailure,
                        "greedy schedule failed to make progress");
        const FlowState st = solver.solve(ValveConfiguration::open_set(net, open));
        const auto flows = st.sink_flows(net);

        double dt = std::numeric_limits<double>::infinity();
        for (const auto& id : open)
            if (flows.at(id) > 0.0) dt = std::min(dt, remaining.at(id) / flows.at(id));
        if (!std::isfinite(dt))
            throw Error(ErrorCode::Infeasible,
                        "no open sink receives flow; demands cannot complete");

        ScheduleStep step;
        step.open = open;
        step.duration = dt;
        for (const auto& [id, d] : demands) {
            auto it = flows.find(id);
            step.leaf_flows[id] = it != flows.end() ? it->second : 0.0;
        }
        sched.steps.push_back(step);
        sched.total_time += dt;

        std::vector<std::string> still_open;
        for (const auto& id : open) {
            const double f = flows.at(id);
            sched.delivered[id] += dt * f;
            // a sink completes when this interval covers its remaining volume
            if (f > 0.0 && remaining.at(id) <= dt * f * (1.0 + 1e-12)) {
                remaining.at(id) = 0.0;
            } else {
                remaining.at(id) -= dt * f;
                still_open.push_back(id);
            }
        }
        if (still_open.size() == open.size())
            throw Error(ErrorCode::NumericFailure,
                        "greedy schedule failed to close any sink");
        open = std::move(still_open);
    }
    return sched;
}

DiscreteOptimum optimal_discrete(const Network& net,
                                 const std::map<std::string, double>& demands) {
    return optimal_discrete(net, demands, enumerate_configurations(net));
}

DiscreteOptimum optimal_discrete(const Network& net,
                                 const std::map<std::string, double>& demands,
                                 const std::vector<ConfigColumn>& columns) {
    require_valid(net);
    check_demands(net, demands);
    const auto sinks = net.demand_ids();

    LpProblem lp;
    for (const auto& id : sinks) lp.rhs.push_back(demands.at(id));
    lp.columns.reserve(columns.size());
    for (const auto& col : columns) lp.columns.push_back(col.sink_flows);

    const LpSolution sol = solve_min_time_lp(lp);

    DiscreteOptimum opt;
    opt.total_time = sol.objective;
    opt.duality_gap = sol.duality_gap;

    std::vector<size_t> order;
    for (size_t j = 0; j < sol.weights.size(); ++j)
        if (sol.weights[j] > 0.0) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const int pa = std::popcount(columns[a].mask);
        const int pb = std::popcount(columns[b].mask);
        if (pa != pb) return pa > pb; // widest open-sets first
        return columns[a].mask < columns[b].mask;
    });

    for (const auto& [id, d] : demands) opt.schedule.delivered[id] = 0.0;
    for (const size_t j : order) {
        ScheduleStep step;
        step.open = columns[j].open;
        step.duration = sol.weights[j];
        for (size_t i = 0; i < sinks.size(); ++i) {
            step.leaf_flows[sinks[i]] = columns[j].sink_flows[i];
            opt.schedule.delivered[sinks[i]] += step.duration * columns[j].sink_flows[i];
        }
        opt.schedule.steps.push_back(std::move(step));
        opt.schedule.total_time += sol.weights[j];
    }
    return opt;
}

} // namespace potflow
