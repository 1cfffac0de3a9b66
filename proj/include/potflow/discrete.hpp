#pragma once

#include "potflow/hydraulics.hpp"
#include "potflow/network.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace potflow {

// One steady interval of a piecewise-constant ON/OFF plan.
struct ScheduleStep {
    std::vector<std::string> open; // sorted demand node ids
    double duration = 0.0;
    std::map<std::string, double> leaf_flows; // all sinks, zero when closed
};

struct Schedule {
    std::vector<ScheduleStep> steps;
    double total_time = 0.0;
    std::map<std::string, double> delivered; // integral of flow per sink
};

// Steady sink flows for one discrete open-set.
struct ConfigColumn {
    std::uint32_t mask = 0;               // bit i = sorted sink i open
    std::vector<std::string> open;        // sorted ids
    std::vector<double> sink_flows;       // ordered like Network::demand_ids()
};

// All 2^|T| - 1 nonempty open-sets. Throws Error(TooManySinks) past 20 sinks.
std::vector<ConfigColumn> enumerate_configurations(const Network& net);

// Greedy plan: open every positive-demand valve fully, run until some sink
// completes its volume, close it, repeat. Event-driven; each step is steady.
Schedule schedule_S(const Network& net, const std::map<std::string, double>& demands);

struct DiscreteOptimum {
    double total_time = 0.0;
    Schedule schedule;        // positive-duration steps, largest open-sets first
    double duality_gap = 0.0; // LP certificate
};

// Exact minimum total time over ON/OFF plans, via an LP over all open-sets
// (order of steps is irrelevant: each configuration's flows are constant).
DiscreteOptimum optimal_discrete(const Network& net,
                                 const std::map<std::string, double>& demands);

// Same, reusing already-enumerated columns (they only depend on the network).
DiscreteOptimum optimal_discrete(const Network& net,
                                 const std::map<std::string, double>& demands,
                                 const std::vector<ConfigColumn>& columns);

} // namespace potflow
