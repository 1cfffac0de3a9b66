#include "potflow/continuous.hpp"

#include "potflow/discrete.hpp"
#include "potflow/errors.hpp"
#include "potflow/rng.hpp"
#include "potflow/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <map>

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

ContinuousPlan proportional_configuration(const Network& net,
                                          const std::map<std::string, double>& demands) {
    require_valid(net);
    check_demands(net, demands);

    bool any_positive = false;
    for (const auto& [id, d] : demands) any_positive |= d > 0.0;
    if (!any_positive)
        throw Error(ErrorCode::InvalidArgument, "at least one demand must be positive");

    const double span = net.source_head - net.sink_head;
    if (!(span > 0.0))
        throw Error(ErrorCode::NoDrivingHead,
                    "source head must exceed sink head to deliver demand");

    std::map<std::string, std::vector<const Edge*>> children;
    for (const auto& e : net.edges) children[e.from].push_back(&e);

    // Subtree demand carried by the edge into each node.
    std::map<std::string, double> subtree;
    {
        std::vector<std::pair<std::string, bool>> stack = {{net.source_id, false}};
        while (!stack.empty()) {
            auto [v, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                double total = 0.0;
                auto dit = demands.find(v);
                if (dit != demands.end()) total = dit->second;
                auto cit = children.find(v);
                if (cit != children.end())
                    for (const Edge* e : cit->second) total += subtree.at(e->to);
                subtree[v] = total;
                continue;
            }
            stack.push_back({v, true});
            auto cit = children.find(v);
            if (cit != children.end())
                for (const Edge* e : cit->second) stack.push_back({e->to, false});
        }
    }

    // Path resistance-work per sink under demand-proportional flows: if each
    // sink i draws c * demand_i then the head spent reaching sink i equals
    // c^n * W_i, where W_i sums k * (subtree demand)^n along the path.
    const double n = net.exponent;
    std::map<std::string, double> work;
    {
        std::vector<std::pair<std::string, double>> stack = {{net.source_id, 0.0}};
        while (!stack.empty()) {
            auto [v, acc] = stack.back();
            stack.pop_back();
            if (demands.count(v)) {
                work[v] = acc;
                continue;
            }
            auto cit = children.find(v);
            if (cit == children.end()) continue;
            for (const Edge* e : cit->second)
                stack.push_back({e->to, acc + e->k * std::pow(subtree.at(e->to), n)});
        }
    }

    double w_max = -1.0;
    std::string binding;
    for (const auto& [id, w] : work) {
        if (!(demands.at(id) > 0.0)) continue;
        if (w > w_max) {
            w_max = w;
            binding = id; // map order: ties keep the smallest id
        }
    }
    if (!(w_max > 0.0))
        throw Error(ErrorCode::Unbounded,
                    "a positive-demand sink is reachable without resistance; the "
                    "proportional emptying time is zero");

    const double cn = span / w_max;         // c^n
    const double c = std::pow(cn, 1.0 / n); // flow per unit demand

    ContinuousPlan plan;
    plan.scale = c;
    plan.total_time = 1.0 / c;
    plan.binding_leaf = binding;
    for (const auto& [id, d] : demands) {
        if (d > 0.0) {
            // Residual head not burned by the path becomes valve resistance.
            const double kv = (span - cn * work.at(id)) / std::pow(c * d, n);
            plan.config.valves[id] = {true, std::max(0.0, kv)};
            plan.leaf_flows[id] = c * d;
        } else {
            plan.config.valves[id] = {false, 0.0};
            plan.leaf_flows[id] = 0.0;
        }
    }
    return plan;
}

MixturePlan mixture_upper_bound(const Network& net,
                                const std::map<std::string, double>& demands,
                                int samples, std::uint64_t seed) {
    return mixture_upper_bound(net, demands, samples, seed,
                               enumerate_configurations(net));
}

MixturePlan mixture_upper_bound(const Network& net,
                                const std::map<std::string, double>& demands,
                                int samples, std::uint64_t seed,
                                const std::vector<ConfigColumn>& columns) {
    const ContinuousPlan plan = proportional_configuration(net, demands);
    const auto sinks = net.demand_ids();

    std::vector<ValveConfiguration> pool_configs;
    LpProblem lp;
    lp.rhs.reserve(sinks.size());
    for (const auto& id : sinks) lp.rhs.push_back(demands.at(id));

    for (const auto& col : columns) {
        pool_configs.push_back(ValveConfiguration::open_set(net, col.open));
        lp.columns.push_back(col.sink_flows);
    }

    auto push_plan = [&](const ContinuousPlan& p) {
        pool_configs.push_back(p.config);
        std::vector<double> flows;
        flows.reserve(sinks.size());
        for (const auto& id : sinks) flows.push_back(p.leaf_flows.at(id));
        lp.columns.push_back(std::move(flows));
    };
    push_plan(plan);

    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        std::map<std::string, double> direction;
        for (const auto& id : sinks) direction[id] = rng.exponential() + 1e-9;
        push_plan(proportional_configuration(net, direction));
    }

    const LpSolution sol = solve_min_time_lp(lp);

    MixturePlan mix;
    mix.total_time = sol.objective;
    mix.duality_gap = sol.duality_gap;
    for (size_t j = 0; j < sol.weights.size(); ++j) {
        if (sol.weights[j] <= 0.0) continue;
        MixtureComponent comp;
        comp.config = pool_configs[j];
        comp.duration = sol.weights[j];
        for (size_t i = 0; i < sinks.size(); ++i)
            comp.leaf_flows[sinks[i]] = lp.columns[j][i];
        mix.components.push_back(std::move(comp));
    }
    return mix;
}

} // namespace potflow
