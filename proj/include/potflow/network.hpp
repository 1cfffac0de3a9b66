#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace potflow {

struct Edge {
    std::string from;
    std::string to;
    double k = 0.0; // resistance coefficient, >= 0
};

// A rooted tree of pipes. Flow enters at `source_id` (held at `source_head`),
// leaves through the demand nodes (all held at `sink_head`), and each edge
// dissipates head according to dh = k * q^exponent.
struct Network {
    double exponent = 2.0; // >= 1
    std::string source_id;
    double source_head = 0.0;
    double sink_head = 0.0;
    std::vector<Edge> edges;
    std::map<std::string, double> demands; // demand node id -> volume, >= 0

    std::vector<std::string> node_ids() const;   // sorted, derived from edges + source
    std::vector<std::string> demand_ids() const; // sorted keys of `demands`
};

struct Violation {
    std::string code;
    std::string where; // offending node/edge id, may be empty
    std::string message;
};

// Valve setting per demand node: closed, or open with extra resistance kv >= 0
// added in series with the terminal edge. Every demand node must have an entry.
struct ValveConfiguration {
    struct Valve {
        bool open = false;
        double kv = 0.0;
    };

    std::map<std::string, Valve> valves;

    static ValveConfiguration all_open(const Network& net);
    static ValveConfiguration all_closed(const Network& net);
    // Discrete configuration: listed ids open with kv = 0, the rest closed.
    static ValveConfiguration open_set(const Network& net,
                                       const std::vector<std::string>& open_ids);

    bool is_open(const std::string& id) const;
    std::vector<std::string> open_ids() const; // sorted
};

struct DepthReport {
    int m = 0;         // max count of positive-resistance edges on any source->sink path
    int raw_depth = 0; // same count without ignoring zero-resistance edges
    std::map<std::string, int> per_sink; // positive-resistance edge count per demand node
};

Network parse_network(const std::string& json_text);
std::string serialize_network(const Network& net);

// Structural and numeric checks; empty result means the network is valid.
std::vector<Violation> validate_network(const Network& net);
void require_valid(const Network& net); // throws Error(Validation) listing codes

DepthReport effective_depth(const Network& net);

// Merge demand nodes that hang off one junction through zero-resistance edges
// into a single demand node (summing volumes). Such sinks always share one
// head and are hydraulically indistinguishable.
Network lump_coincident_sinks(const Network& net);

} // namespace potflow
