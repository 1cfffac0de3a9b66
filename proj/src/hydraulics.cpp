#include "potflow/hydraulics.hpp"

#include "potflow/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

namespace potflow {

namespace {

double q_of(double drop, double inv_n) {
    return drop > 0.0 ? std::pow(drop, inv_n) : 0.0;
}

// Root of a nonincreasing g on [lo, hi] with g(lo) >= 0 >= g(hi).
// Anderson-Bjorck false position interleaved with bisection, so each pair of
// iterations at least halves the bracket; terminates at machine precision
// relative to the root.
template <class F>
double find_root_decreasing(F&& g, double lo, double hi) {
    double a = lo, b = hi;
    double ga = g(a);
    if (!(ga > 0.0)) return a;
    double gb = g(b);
    if (!(gb < 0.0)) return b;
    int kept = 0; // +1: a moved last, -1: b moved last
    for (int iter = 0; iter < 200; ++iter) {
        if (!(b - a > std::numeric_limits<double>::epsilon() * a + 1e-300)) break;
        double x;
        bool secant = (iter % 2 == 0);
        if (secant) {
            x = (a * gb - b * ga) / (gb - ga);
            if (!(x > a && x < b)) x = a + 0.5 * (b - a);
        } else {
            x = a + 0.5 * (b - a);
        }
        double gx = g(x);
        if (gx > 0.0) {
            if (secant && kept == 1) {
                double scale = 1.0 - gx / ga;
                gb *= scale > 0.0 ? scale : 0.5;
            }
            a = x;
            ga = gx;
            kept = 1;
        } else if (gx < 0.0) {
            if (secant && kept == -1) {
                double scale = 1.0 - gx / gb;
                ga *= scale > 0.0 ? scale : 0.5;
            }
            b = x;
            gb = gx;
            kept = -1;
        } else {
            return x;
        }
    }
    return a + 0.5 * (b - a);
}

struct Tree {
    std::vector<std::string> ids; // sorted; node index == rank of id
    std::map<std::string, int> index;
    int source = -1;
    std::vector<int> parent;
    std::vector<double> k_in;  // resistance of the edge into each node
    std::vector<int> edge_in;  // index into Network::edges, -1 at the source
    std::vector<std::vector<int>> children;
    std::vector<int> order; // parents before children
    std::vector<char> is_sink;
};

Tree build_tree(const Network& net) {
    Tree t;
    t.ids = net.node_ids();
    for (int i = 0; i < static_cast<int>(t.ids.size()); ++i) t.index[t.ids[i]] = i;
    const int n = static_cast<int>(t.ids.size());
    t.source = t.index.at(net.source_id);
    t.parent.assign(n, -1);
    t.k_in.assign(n, 0.0);
    t.edge_in.assign(n, -1);
    t.children.assign(n, {});
    t.is_sink.assign(n, 0);
    for (int e = 0; e < static_cast<int>(net.edges.size()); ++e) {
        const int u = t.index.at(net.edges[e].from);
        const int v = t.index.at(net.edges[e].to);
        t.parent[v] = u;
        t.k_in[v] = net.edges[e].k;
        t.edge_in[v] = e;
        t.children[u].push_back(v);
    }
    for (auto& c : t.children) std::sort(c.begin(), c.end());
    for (const auto& [id, d] : net.demands) t.is_sink[t.index.at(id)] = 1;
    t.order.reserve(n);
    std::vector<int> stack = {t.source};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        t.order.push_back(v);
        for (const int w : t.children[v]) stack.push_back(w);
    }
    return t;
}

// How a node behaves under the current valve configuration.
//   Pruned:   subtree contains no open sink; carries no flow.
//   Pinned:   an open zero-resistance path reaches sink level here, so the
//             node's head is forced to sink_head and it swallows all inflow.
//   Normal:   head is free; inflow balances the subtree draw.
enum class NodeMode : char { Pruned, Pinned, Normal, SinkOpen };

struct View {
    std::vector<NodeMode> mode;
    std::vector<std::vector<int>> active; // non-pruned children, id order
    std::vector<double> kv;               // valve resistance per open sink node
};

} // namespace

struct Solver::Impl {
    Network net;
    Tree tree;
    double n = 2.0;
    double inv_n = 0.5;
    double h0 = 0.0;

    View make_view(const ValveConfiguration& config) const;
    double eval_edge(const View& vw, int w, double head) const;
    double eval_node(const View& vw, int v, double head) const;
};

namespace {

void check_config(const Network& net, const ValveConfiguration& config) {
    if (config.valves.size() != net.demands.size())
        throw Error(ErrorCode::InvalidArgument,
                    "configuration must cover every demand node exactly once");
    for (const auto& [id, d] : net.demands) {
        auto it = config.valves.find(id);
        if (it == config.valves.end())
            throw Error(ErrorCode::InvalidArgument,
                        "configuration is missing demand node \"" + id + "\"");
        if (it->second.open &&
            (!(it->second.kv >= 0.0) || !std::isfinite(it->second.kv)))
            throw Error(ErrorCode::InvalidArgument,
                        "valve resistance at \"" + id + "\" must be finite and >= 0");
    }
}

bool is_pin_edge(const Tree& t, const View& vw, int w) {
    if (vw.mode[w] == NodeMode::SinkOpen) return t.k_in[w] + vw.kv[w] == 0.0;
    if (vw.mode[w] == NodeMode::Pinned) return t.k_in[w] == 0.0;
    return false;
}

} // namespace

View Solver::Impl::make_view(const ValveConfiguration& config) const {
    check_config(net, config);
    const int n_nodes = static_cast<int>(tree.ids.size());
    View vw;
    vw.mode.assign(n_nodes, NodeMode::Pruned);
    vw.active.assign(n_nodes, {});
    vw.kv.assign(n_nodes, 0.0);

    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        const int v = *it;
        if (tree.is_sink[v]) {
            const auto& valve = config.valves.at(tree.ids[v]);
            if (valve.open) {
                vw.mode[v] = NodeMode::SinkOpen;
                vw.kv[v] = valve.kv;
            }
            continue;
        }
        auto& act = vw.active[v];
        for (const int w : tree.children[v])
            if (vw.mode[w] != NodeMode::Pruned) act.push_back(w);
        if (act.empty()) {
            vw.mode[v] = NodeMode::Pruned;
            continue;
        }
        vw.mode[v] = NodeMode::Normal;
        for (const int w : act)
            if (is_pin_edge(tree, vw, w)) {
                vw.mode[v] = NodeMode::Pinned;
                break;
            }
    }
    return vw;
}

// Flow entering node w through its parent edge, given the parent head. Series
// chains are collapsed by accumulating resistance, so iteration is needed only
// where two or more active branches meet.
double Solver::Impl::eval_edge(const View& vw, int w, double head) const {
    const double k = tree.k_in[w];
    switch (vw.mode[w]) {
    case NodeMode::Pruned:
        return 0.0;
    case NodeMode::SinkOpen:
        return q_of((head - h0) / (k + vw.kv[w]), inv_n);
    case NodeMode::Pinned:
        return q_of((head - h0) / k, inv_n);
    case NodeMode::Normal:
        break;
    }
    if (k == 0.0) return eval_node(vw, w, head);

    double k_acc = k;
    int c = w;
    for (;;) {
        const auto& act = vw.active[c];
        if (act.size() == 1) {
            const int w2 = act[0];
            const double k2 = tree.k_in[w2];
            switch (vw.mode[w2]) {
            case NodeMode::SinkOpen:
                return q_of((head - h0) / (k_acc + k2 + vw.kv[w2]), inv_n);
            case NodeMode::Pinned:
                return q_of((head - h0) / (k_acc + k2), inv_n);
            default:
                k_acc += k2;
                c = w2;
                continue;
            }
        }
        const double drop = head - h0;
        if (!(drop > 0.0)) return 0.0;
        const double qmax = std::pow(drop / k_acc, inv_n);
        const int node = c;
        auto g = [&](double q) {
            return eval_node(vw, node, head - k_acc * std::pow(q, n)) - q;
        };
        return find_root_decreasing(g, 0.0, qmax);
    }
}

double Solver::Impl::eval_node(const View& vw, int v, double head) const {
    double total = 0.0;
    for (const int w : vw.active[v]) total += eval_edge(vw, w, head);
    return total;
}

namespace {

// Writes flows and heads top-down once the root head is known, reusing the
// same closed forms / root brackets as evaluation so residuals stay at
// round-off level.
struct Assigner {
    const Solver::Impl& s;
    const View& vw;
    FlowState& st;

    void set_head(int v, double head) { st.node_heads[s.tree.ids[v]] = head; }

    void edge(int w, double q, double parent_head) {
        st.edge_flows[s.tree.edge_in[w]] = q;
        switch (vw.mode[w]) {
        case NodeMode::Pruned:
            pruned(w, parent_head);
            return;
        case NodeMode::SinkOpen:
            set_head(w, s.h0);
            return;
        case NodeMode::Pinned:
            set_head(w, s.h0);
            pinned_children(w, q);
            return;
        case NodeMode::Normal: {
            const double head = parent_head - s.tree.k_in[w] * std::pow(q, s.n);
            set_head(w, head);
            normal_children(w, head);
            return;
        }
        }
    }

    void pruned(int v, double upstream_head) {
        const double head = s.tree.is_sink[v] ? s.h0 : upstream_head;
        set_head(v, head);
        for (const int w : s.tree.children[v]) {
            st.edge_flows[s.tree.edge_in[w]] = 0.0;
            pruned(w, head);
        }
    }

    // A pinned junction sits at sink level; the entire inflow leaves through
    // the first zero-resistance branch (smallest node id), and with no head to
    // spare every other branch carries nothing.
    void pinned_children(int v, double inflow) {
        int absorber = -1;
        for (const int w : vw.active[v])
            if (is_pin_edge(s.tree, vw, w)) {
                absorber = w;
                break;
            }
        for (const int w : s.tree.children[v])
            edge(w, w == absorber ? inflow : 0.0, s.h0);
    }

    void normal_children(int v, double head) {
        for (const int w : s.tree.children[v]) {
            const double q =
                vw.mode[w] == NodeMode::Pruned ? 0.0 : s.eval_edge(vw, w, head);
            edge(w, q, head);
        }
    }
};

std::atomic<bool> audit_on{false};
std::mutex audit_mu;
audit::Tally audit_tally_data;

void audit_record(const Network& net, const FlowState& st) {
    const StateResiduals r = state_residuals(net, st);
    std::lock_guard<std::mutex> lock(audit_mu);
    audit_tally_data.states++;
    audit_tally_data.worst_node_balance =
        std::max(audit_tally_data.worst_node_balance, r.node_balance);
    audit_tally_data.worst_edge_law =
        std::max(audit_tally_data.worst_edge_law, r.edge_law);
    if (r.node_balance > 1e-9 || r.edge_law > 1e-9) audit_tally_data.failures++;
}

} // namespace

Solver::Solver(const Network& net) {
    require_valid(net);
    auto impl = std::make_shared<Impl>();
    impl->net = net;
    impl->tree = build_tree(net);
    impl->n = net.exponent;
    impl->inv_n = 1.0 / net.exponent;
    impl->h0 = net.sink_head;
    impl_ = std::move(impl);
}

const Network& Solver::network() const { return impl_->net; }

FlowState Solver::solve(const ValveConfiguration& config) const {
    const Impl& s = *impl_;
    if (s.net.source_head < s.h0)
        throw Error(ErrorCode::NoDrivingHead, "source head is below sink head");
    const View vw = s.make_view(config);

    FlowState st;
    st.config = config;
    st.edge_flows.assign(s.net.edges.size(), 0.0);

    Assigner as{s, vw, st};
    const int root = s.tree.source;
    switch (vw.mode[root]) {
    case NodeMode::Pruned:
        as.pruned(root, s.net.source_head);
        break;
    case NodeMode::Pinned:
        if (s.net.source_head > s.h0)
            throw Error(ErrorCode::Unbounded,
                        "open zero-resistance path from the source to sink level");
        as.set_head(root, s.h0);
        as.pinned_children(root, 0.0);
        break;
    default:
        as.set_head(root, s.net.source_head);
        as.normal_children(root, s.net.source_head);
        break;
    }

    if (audit_on.load(std::memory_order_relaxed)) audit_record(s.net, st);
    return st;
}

double Solver::subtree_characteristic(const ValveConfiguration& config,
                                      const std::string& node, double head) const {
    const Impl& s = *impl_;
    auto it = s.tree.index.find(node);
    if (it == s.tree.index.end())
        throw Error(ErrorCode::InvalidArgument, "unknown node \"" + node + "\"");
    if (head < s.h0)
        throw Error(ErrorCode::InvalidArgument, "head is below sink level");
    const View vw = s.make_view(config);
    const int v = it->second;
    switch (vw.mode[v]) {
    case NodeMode::Normal:
        return s.eval_node(vw, v, head);
    case NodeMode::Pinned:
        if (head > s.h0)
            throw Error(ErrorCode::Unbounded,
                        "node is pinned to sink level by an open zero-resistance "
                        "path; its draw at higher head is unbounded");
        return 0.0;
    default: // pruned subtree or a bare demand node
        return 0.0;
    }
}

FlowState solve_state(const Network& net, const ValveConfiguration& config) {
    return Solver(net).solve(config);
}

double subtree_characteristic(const Network& net, const ValveConfiguration& config,
                              const std::string& node, double head) {
    return Solver(net).subtree_characteristic(config, node, head);
}

std::map<std::string, double> FlowState::sink_flows(const Network& net) const {
    std::map<std::string, double> out;
    for (const auto& [id, d] : net.demands) out[id] = 0.0;
    for (size_t e = 0; e < net.edges.size(); ++e) {
        auto it = out.find(net.edges[e].to);
        if (it != out.end()) it->second = edge_flows[e];
    }
    return out;
}

double FlowState::root_outflow(const Network& net) const {
    double total = 0.0;
    for (size_t e = 0; e < net.edges.size(); ++e)
        if (net.edges[e].from == net.source_id) total += edge_flows[e];
    return total;
}

StateResiduals state_residuals(const Network& net, const FlowState& st) {
    StateResiduals r;

    std::map<std::string, double> imbalance; // inflow - outflow
    for (size_t e = 0; e < net.edges.size(); ++e) {
        imbalance[net.edges[e].to] += st.edge_flows[e];
        imbalance[net.edges[e].from] -= st.edge_flows[e];
    }
    const double root_out = st.root_outflow(net);
    const double flow_scale = std::max(1.0, root_out);
    for (const auto& [id, v] : imbalance) {
        if (id == net.source_id || net.demands.count(id)) continue;
        r.node_balance = std::max(r.node_balance, std::abs(v) / flow_scale);
    }

    const double span = net.source_head - net.sink_head;
    for (size_t e = 0; e < net.edges.size(); ++e) {
        const Edge& edge = net.edges[e];
        const double q = st.edge_flows[e];
        const bool terminal = net.demands.count(edge.to) != 0;
        if (terminal && !st.config.is_open(edge.to)) {
            // closed valve: the only law is zero flow
            r.edge_law = std::max(r.edge_law, std::abs(q) / flow_scale);
            continue;
        }
        double keff = edge.k;
        if (terminal) keff += st.config.valves.at(edge.to).kv;
        const double dh = st.node_heads.at(edge.from) - st.node_heads.at(edge.to);
        const double drop = keff * std::pow(q, net.exponent);
        const double scale = std::max({span, std::abs(dh), drop, 1e-300});
        r.edge_law = std::max(r.edge_law, std::abs(dh - drop) / scale);
    }
    return r;
}

namespace audit {

void enable() {
    std::lock_guard<std::mutex> lock(audit_mu);
    audit_on.store(true);
}

void disable() { audit_on.store(false); }

bool enabled() { return audit_on.load(); }

Tally tally() {
    std::lock_guard<std::mutex> lock(audit_mu);
    return audit_tally_data;
}

void reset() {
    std::lock_guard<std::mutex> lock(audit_mu);
    audit_tally_data = Tally{};
}

} // namespace audit

} // namespace potflow
