#pragma once

#include "potflow/discrete.hpp"
#include "potflow/hydraulics.hpp"
#include "potflow/network.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace potflow {

// Constant-valve plan that drains all demands simultaneously: each open sink i
// receives flow c * demand_i for the whole run, so everything finishes at
// t = 1/c. The binding leaf is the one whose valve is fully open (kv = 0).
struct ContinuousPlan {
    ValveConfiguration config;
    std::map<std::string, double> leaf_flows;
    double scale = 0.0; // c
    double total_time = 0.0;
    std::string binding_leaf;
};

ContinuousPlan proportional_configuration(const Network& net,
                                          const std::map<std::string, double>& demands);

struct MixtureComponent {
    ValveConfiguration config;
    double duration = 0.0;
    std::map<std::string, double> leaf_flows;
};

// Upper bound on the minimum emptying time by time-sharing over a pool of
// constant configurations: every discrete open-set, the proportional plan,
// and `samples` additional proportional plans aimed at random demand
// directions. Always <= min(discrete optimum, proportional time) because both
// certificates sit in the pool.
struct MixturePlan {
    double total_time = 0.0;
    std::vector<MixtureComponent> components; // nonzero durations only
    double duality_gap = 0.0;
};

MixturePlan mixture_upper_bound(const Network& net,
                                const std::map<std::string, double>& demands,
                                int samples, std::uint64_t seed);

// Same, reusing already-enumerated discrete columns.
MixturePlan mixture_upper_bound(const Network& net,
                                const std::map<std::string, double>& demands,
                                int samples, std::uint64_t seed,
                                const std::vector<ConfigColumn>& columns);

} // namespace potflow
