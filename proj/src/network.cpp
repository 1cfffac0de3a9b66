#include "potflow/network.hpp"

#include "potflow/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace potflow {

namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw Error(ErrorCode::Parse,
                        "unknown key \"" + it.key() + "\" in " + where);
    }
}

double number_field(const ordered_json& obj, const std::string& key,
                    const std::string& where) {
    if (!obj.contains(key))
        throw Error(ErrorCode::Parse, "missing \"" + key + "\" in " + where);
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw Error(ErrorCode::Parse, "\"" + key + "\" in " + where + " must be a number");
    return v.get<double>();
}

std::string string_field(const ordered_json& obj, const std::string& key,
                         const std::string& where) {
    if (!obj.contains(key))
        throw Error(ErrorCode::Parse, "missing \"" + key + "\" in " + where);
    const auto& v = obj.at(key);
    if (!v.is_string() || v.get<std::string>().empty())
        throw Error(ErrorCode::Parse,
                    "\"" + key + "\" in " + where + " must be a non-empty string");
    return v.get<std::string>();
}

} // namespace

std::vector<std::string> Network::node_ids() const {
    std::set<std::string> ids;
    ids.insert(source_id);
    for (const auto& e : edges) {
        ids.insert(e.from);
        ids.insert(e.to);
    }
    return {ids.begin(), ids.end()};
}

std::vector<std::string> Network::demand_ids() const {
    std::vector<std::string> ids;
    ids.reserve(demands.size());
    for (const auto& [id, d] : demands) ids.push_back(id);
    return ids;
}

ValveConfiguration ValveConfiguration::all_open(const Network& net) {
    ValveConfiguration c;
    for (const auto& [id, d] : net.demands) c.valves[id] = {true, 0.0};
    return c;
}

ValveConfiguration ValveConfiguration::all_closed(const Network& net) {
    ValveConfiguration c;
    for (const auto& [id, d] : net.demands) c.valves[id] = {false, 0.0};
    return c;
}

ValveConfiguration ValveConfiguration::open_set(const Network& net,
                                                const std::vector<std::string>& open_ids) {
    ValveConfiguration c = all_closed(net);
    for (const auto& id : open_ids) {
        auto it = c.valves.find(id);
        if (it == c.valves.end())
            throw Error(ErrorCode::InvalidArgument, "\"" + id + "\" is not a demand node");
        it->second = {true, 0.0};
    }
    return c;
}

bool ValveConfiguration::is_open(const std::string& id) const {
    auto it = valves.find(id);
    return it != valves.end() && it->second.open;
}

std::vector<std::string> ValveConfiguration::open_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, v] : valves)
        if (v.open) ids.push_back(id);
    return ids;
}

Network parse_network(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::Parse, std::string("invalid JSON: ") + ex.what());
    }
    if (!doc.is_object())
        throw Error(ErrorCode::Parse, "document root must be an object");
    reject_unknown_keys(doc, {"exponent", "source", "sink_head", "edges", "demands"},
                        "document root");

    Network net;
    net.exponent = number_field(doc, "exponent", "document root");
    net.sink_head = number_field(doc, "sink_head", "document root");

    if (!doc.contains("source") || !doc.at("source").is_object())
        throw Error(ErrorCode::Parse, "\"source\" must be an object");
    const auto& src = doc.at("source");
    reject_unknown_keys(src, {"id", "head"}, "source");
    net.source_id = string_field(src, "id", "source");
    net.source_head = number_field(src, "head", "source");

    if (!doc.contains("edges") || !doc.at("edges").is_array())
        throw Error(ErrorCode::Parse, "\"edges\" must be an array");
    for (const auto& item : doc.at("edges")) {
        if (!item.is_object())
            throw Error(ErrorCode::Parse, "each edge must be an object");
        reject_unknown_keys(item, {"from", "to", "k"}, "edge");
        Edge e;
        e.from = string_field(item, "from", "edge");
        e.to = string_field(item, "to", "edge");
        e.k = number_field(item, "k", "edge");
        net.edges.push_back(std::move(e));
    }

    if (!doc.contains("demands") || !doc.at("demands").is_object())
        throw Error(ErrorCode::Parse, "\"demands\" must be an object");
    for (auto it = doc.at("demands").begin(); it != doc.at("demands").end(); ++it) {
        if (!it.value().is_number())
            throw Error(ErrorCode::Parse, "demand for \"" + it.key() + "\" must be a number");
        net.demands[it.key()] = it.value().get<double>();
    }

    require_valid(net);
    return net;
}

std::string serialize_network(const Network& net) {
    ordered_json doc;
    doc["exponent"] = net.exponent;
    doc["source"] = {{"id", net.source_id}, {"head", net.source_head}};
    doc["sink_head"] = net.sink_head;
    doc["edges"] = ordered_json::array();
    for (const auto& e : net.edges)
        doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"k", e.k}});
    doc["demands"] = ordered_json::object();
    for (const auto& [id, d] : net.demands) doc["demands"][id] = d;
    return doc.dump(2) + "\n";
}

std::vector<Violation> validate_network(const Network& net) {
    std::vector<Violation> out;
    auto add = [&out](const std::string& code, const std::string& where,
                      const std::string& message) {
        out.push_back({code, where, message});
    };

    if (!(net.exponent >= 1.0) || !std::isfinite(net.exponent))
        add("exponent_below_one", "",
            "flow exponent must be finite and >= 1");
    if (!std::isfinite(net.source_head) || !std::isfinite(net.sink_head))
        add("non_finite_head", "", "source and sink heads must be finite");
    if (net.source_id.empty()) add("missing_source", "", "source id is empty");

    for (const auto& e : net.edges) {
        if (!(e.k >= 0.0) || !std::isfinite(e.k))
            add("negative_resistance", e.from + "->" + e.to,
                "edge resistance must be finite and >= 0");
        if (e.to == net.source_id)
            add("edge_into_source", e.from + "->" + e.to,
                "no edge may terminate at the source");
    }

    std::set<std::pair<std::string, std::string>> seen;
    std::map<std::string, int> indegree;
    for (const auto& e : net.edges) {
        if (!seen.insert({e.from, e.to}).second)
            add("duplicate_edge", e.from + "->" + e.to, "edge listed twice");
        indegree[e.to]++;
    }
    for (const auto& [id, deg] : indegree)
        if (deg > 1)
            add("multiple_parents", id, "node has more than one incoming edge");

    bool positive_demand = false;
    for (const auto& [id, d] : net.demands) {
        if (!(d >= 0.0) || !std::isfinite(d))
            add("negative_demand", id, "demand must be finite and >= 0");
        if (d > 0.0) positive_demand = true;
    }
    if (positive_demand && !(net.source_head > net.sink_head))
        add("no_driving_head", "",
            "source head must exceed sink head when any demand is positive");

    // Structural checks need a coherent edge list; bail out if they can't run.
    if (!out.empty() &&
        std::any_of(out.begin(), out.end(), [](const Violation& v) {
            return v.code == "duplicate_edge" || v.code == "multiple_parents" ||
                   v.code == "edge_into_source" || v.code == "missing_source";
        }))
        return out;

    auto nodes = net.node_ids();
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& e : net.edges) children[e.from].push_back(e.to);

    // Reachability from the source; with unique parents and no edges into the
    // source, unreached nodes mean disconnected components or cycles.
    std::set<std::string> reached;
    std::vector<std::string> stack = {net.source_id};
    while (!stack.empty()) {
        std::string v = stack.back();
        stack.pop_back();
        if (!reached.insert(v).second) continue;
        auto it = children.find(v);
        if (it != children.end())
            for (const auto& w : it->second) stack.push_back(w);
    }
    if (reached.size() != nodes.size()) {
        for (const auto& id : nodes)
            if (!reached.count(id))
                add("not_a_tree", id, "node unreachable from the source");
        return out;
    }

    std::set<std::string> leaves;
    for (const auto& id : nodes)
        if (!children.count(id)) leaves.insert(id);

    for (const auto& [id, d] : net.demands) {
        if (!reached.count(id)) {
            add("unknown_demand_node", id, "demand references a node not in the tree");
        } else if (id == net.source_id) {
            add("demand_on_source", id, "the source cannot carry demand");
        } else if (!leaves.count(id)) {
            add("demand_on_internal_node", id, "demand nodes must be leaves");
        }
    }
    for (const auto& id : leaves)
        if (id != net.source_id && !net.demands.count(id))
            add("leaf_without_demand", id,
                "every non-source leaf must be a demand node");

    return out;
}

void require_valid(const Network& net) {
    auto violations = validate_network(net);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& v : violations) {
        msg << " [" << v.code;
        if (!v.where.empty()) msg << " @ " << v.where;
        msg << "] " << v.message << ";";
    }
    throw Error(ErrorCode::Validation, msg.str());
}

DepthReport effective_depth(const Network& net) {
    require_valid(net);
    DepthReport report;

    std::map<std::string, std::vector<const Edge*>> children;
    for (const auto& e : net.edges) children[e.from].push_back(&e);

    // Depth-first walk counting positive-resistance edges (m) and all edges
    // (raw depth) down to each demand node.
    std::vector<std::tuple<std::string, int, int>> stack = {{net.source_id, 0, 0}};
    while (!stack.empty()) {
        auto [v, pos, raw] = stack.back();
        stack.pop_back();
        if (net.demands.count(v)) {
            report.per_sink[v] = pos;
            report.m = std::max(report.m, pos);
            report.raw_depth = std::max(report.raw_depth, raw);
            continue;
        }
        auto it = children.find(v);
        if (it == children.end()) continue;
        for (const Edge* e : it->second)
            stack.push_back({e->to, pos + (e->k > 0.0 ? 1 : 0), raw + 1});
    }
    return report;
}

Network lump_coincident_sinks(const Network& net) {
    require_valid(net);

    // Group open-ended zero-resistance terminal edges by their junction; the
    // first (lexicographically smallest) sink in each group absorbs the rest.
    std::map<std::string, std::vector<const Edge*>> zero_terminal; // junction -> edges
    for (const auto& e : net.edges)
        if (e.k == 0.0 && net.demands.count(e.to))
            zero_terminal[e.from].push_back(&e);

    std::map<std::string, std::string> replace; // dropped sink -> surviving sink
    for (auto& [junction, edges] : zero_terminal) {
        if (edges.size() < 2) continue;
        std::sort(edges.begin(), edges.end(),
                  [](const Edge* a, const Edge* b) { return a->to < b->to; });
        for (size_t i = 1; i < edges.size(); ++i)
            replace[edges[i]->to] = edges[0]->to;
    }
    if (replace.empty()) return net;

    Network out = net;
    out.edges.clear();
    out.demands.clear();
    for (const auto& e : net.edges)
        if (!replace.count(e.to)) out.edges.push_back(e);
    for (const auto& [id, d] : net.demands) {
        auto it = replace.find(id);
        out.demands[it == replace.end() ? id : it->second] += d;
    }
    return out;
}

} // namespace potflow
