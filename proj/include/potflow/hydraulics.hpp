#pragma once

#include "potflow/network.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace potflow {

// Steady flow under one valve configuration. `edge_flows` is parallel to
// Network::edges; heads cover every node.
struct FlowState {
    ValveConfiguration config;
    std::vector<double> edge_flows;
    std::map<std::string, double> node_heads;

    // Flow delivered into each demand node (zero when closed), sorted by id.
    std::map<std::string, double> sink_flows(const Network& net) const;
    double root_outflow(const Network& net) const;
};

// Reusable solver for one network; precomputes the tree index so that many
// configurations can be solved without re-parsing the topology.
class Solver {
public:
    explicit Solver(const Network& net); // validates the network

    FlowState solve(const ValveConfiguration& config) const;

    // Total inflow the subtree rooted at `node` would draw if it were held at
    // `head`. Nonincreasing in head restrictions downstream and nondecreasing
    // in `head`. Throws Error(Unbounded) when `node` is pinned to sink level
    // by an open zero-resistance path and head > sink_head.
    double subtree_characteristic(const ValveConfiguration& config,
                                  const std::string& node, double head) const;

    const Network& network() const;

    struct Impl; // internal

private:
    std::shared_ptr<const Impl> impl_;
};

FlowState solve_state(const Network& net, const ValveConfiguration& config);
double subtree_characteristic(const Network& net, const ValveConfiguration& config,
                              const std::string& node, double head);

// Residual diagnostics for a solved state: worst node imbalance and worst
// edge-law mismatch, both absolute. Callers decide tolerances.
struct StateResiduals {
    double node_balance = 0.0;
    double edge_law = 0.0;
};
StateResiduals state_residuals(const Network& net, const FlowState& state);

namespace audit {

// When enabled, every FlowState produced by any Solver is replayed through
// state_residuals and counted. Used by self-check suites to show that all
// states touched during a run satisfied the conservation laws.
void enable();
void disable();
bool enabled();
struct Tally {
    long long states = 0;
    double worst_node_balance = 0.0;
    double worst_edge_law = 0.0;
    long long failures = 0; // states exceeding the audit tolerances
};
Tally tally();
void reset();

} // namespace audit

} // namespace potflow
