#include "potflow/analysis.hpp"

#include "potflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace potflow {

double bound_R(int m, double exponent) {
    if (m < 1)
        throw Error(ErrorCode::Domain, "depth m must be at least 1");
    if (!(exponent >= 1.0) || !std::isfinite(exponent))
        throw Error(ErrorCode::Domain, "flow exponent must be finite and >= 1");
    return std::pow(static_cast<double>(m), 1.0 - 1.0 / exponent);
}

namespace {

std::string pad2(const char* prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%02d", prefix, i);
    return buf;
}

} // namespace

double classC_closed_form(const std::vector<double>& k, const std::vector<double>& q,
                          double exponent) {
    const size_t m = k.size();
    if (m == 0 || q.size() != m)
        throw Error(ErrorCode::Domain, "k and q must be non-empty and equally sized");
    if (!(exponent >= 1.0))
        throw Error(ErrorCode::Domain, "flow exponent must be >= 1");
    for (const double ki : k)
        if (!(ki > 0.0) || !std::isfinite(ki))
            throw Error(ErrorCode::Domain, "mainline resistances must be positive");
    for (size_t i = 0; i < m; ++i) {
        if (!(q[i] > 0.0) || !std::isfinite(q[i]))
            throw Error(ErrorCode::Domain, "stage flows must be positive");
        if (i + 1 < m && q[i] < q[i + 1])
            throw Error(ErrorCode::Domain, "stage flows must be nonincreasing");
    }

    // Stage i serves sink i alone at rate (dh / K_i)^(1/n) where K_i is the
    // mainline resistance up to junction i; its duration is (q_i - q_{i+1})
    // divided by that rate.
    const double inv_n = 1.0 / exponent;
    double dh = 0.0;
    for (size_t i = 0; i < m; ++i) dh += k[i] * std::pow(q[i], exponent);
    double total = 0.0;
    double k_prefix = 0.0;
    for (size_t i = 0; i < m; ++i) {
        k_prefix += k[i];
        const double q_next = i + 1 < m ? q[i + 1] : 0.0;
        total += (q[i] - q_next) * std::pow(k_prefix / dh, inv_n);
    }
    return total;
}

ClassCInstance worst_case_instance(int m, double exponent, double rho) {
    if (m < 1)
        throw Error(ErrorCode::Domain, "depth m must be at least 1");
    if (!(exponent >= 1.0) || !std::isfinite(exponent))
        throw Error(ErrorCode::Domain, "flow exponent must be finite and >= 1");
    if (!(rho >= 1.0) || !std::isfinite(rho))
        throw Error(ErrorCode::Domain, "resistance ratio rho must be >= 1");
    if (m > 60)
        throw Error(ErrorCode::Domain, "depth m is limited to 60");

    // k_i = rho^(i-1) and q_i = rho^-((i-1)/n) equalize the head spent per
    // mainline segment, which is what drives the ratio toward its ceiling as
    // rho grows.
    ClassCInstance inst;
    inst.k.resize(m);
    inst.q.resize(m);
    for (int i = 0; i < m; ++i) {
        inst.k[i] = std::pow(rho, i);
        inst.q[i] = std::pow(rho, -static_cast<double>(i) / exponent);
    }

    Network& net = inst.network;
    net.exponent = exponent;
    net.source_id = "source";
    net.sink_head = 0.0;
    net.source_head = static_cast<double>(m); // sum of k_i q_i^n, exactly m here
    std::string prev = net.source_id;
    for (int i = 0; i < m; ++i) {
        const std::string tap = pad2("v", i + 1);
        const std::string sink = pad2("t", i + 1);
        net.edges.push_back({prev, tap, inst.k[i]});
        net.edges.push_back({tap, sink, 0.0});
        const double q_next = i + 1 < m ? inst.q[i + 1] : 0.0;
        const double demand = inst.q[i] - q_next;
        net.demands[sink] = demand;
        inst.demands[sink] = demand;
        prev = tap;
    }
    require_valid(net);

    inst.closed_form_t_d = classC_closed_form(inst.k, inst.q, exponent);
    inst.t_cv = 1.0;
    return inst;
}

AnalysisReport compute_ratio(const Network& net,
                             const std::map<std::string, double>& demands,
                             int mixture_samples, std::uint64_t seed) {
    AnalysisReport rep;

    const ContinuousPlan plan = proportional_configuration(net, demands);
    rep.t_cv = plan.total_time;

    const Schedule greedy = schedule_S(net, demands);
    rep.t_S = greedy.total_time;

    const auto columns = enumerate_configurations(net);
    const DiscreteOptimum opt = optimal_discrete(net, demands, columns);
    rep.t_d_opt = opt.total_time;

    const MixturePlan mix = mixture_upper_bound(net, demands, mixture_samples, seed, columns);
    rep.t_mix = mix.total_time;

    const DepthReport depth = effective_depth(net);
    rep.m = depth.m;
    rep.bound = bound_R(std::max(1, depth.m), net.exponent);
    int active_sinks = 0;
    for (const auto& [id, d] : demands) active_sinks += d > 0.0 ? 1 : 0;
    rep.trivial_bound = active_sinks;

    rep.R = rep.t_d_opt / rep.t_cv;
    rep.poa = rep.t_S / rep.t_cv;

    const double eps_ratio = 1e-6;
    if (rep.R < 1.0 - eps_ratio) rep.anomalies.push_back("ratio_below_one");
    if (rep.R > rep.bound + eps_ratio) rep.anomalies.push_back("ratio_above_bound");
    if (rep.R > rep.trivial_bound + eps_ratio)
        rep.anomalies.push_back("ratio_above_trivial");
    const double t_min = std::min(rep.t_cv, rep.t_d_opt);
    if (rep.t_mix > t_min + 1e-9 * std::max(1.0, t_min))
        rep.anomalies.push_back("mixture_above_min");
    if (rep.t_S < rep.t_d_opt - 1e-9 * std::max(1.0, rep.t_d_opt))
        rep.anomalies.push_back("greedy_below_optimum");
    if (rep.poa < 1.0 - eps_ratio) rep.anomalies.push_back("poa_below_one");
    if (rep.poa > rep.bound + eps_ratio) rep.anomalies.push_back("poa_above_bound");
    return rep;
}

double compute_poa(const Network& net, const std::map<std::string, double>& demands) {
    const ContinuousPlan plan = proportional_configuration(net, demands);
    const Schedule greedy = schedule_S(net, demands);
    return greedy.total_time / plan.total_time;
}

BraessDemo braess_demo(int m, double exponent, double rho) {
    BraessDemo demo;
    demo.inline_variant = worst_case_instance(m, exponent, rho);
    const Network& a = demo.inline_variant.network;
    demo.t_S_inline = schedule_S(a, demo.inline_variant.demands).total_time;

    // Move each sink's proportional valve resistance into its offtake pipe.
    // The result is (weakly) more resistive everywhere, yet the greedy plan
    // finishes sooner on it: all sinks now drain in proportion and complete
    // together.
    const ContinuousPlan plan = proportional_configuration(a, demo.inline_variant.demands);
    demo.relocated_variant = a;
    for (auto& e : demo.relocated_variant.edges) {
        auto it = plan.config.valves.find(e.to);
        if (it != plan.config.valves.end() && it->second.open) e.k += it->second.kv;
    }
    demo.t_S_relocated =
        schedule_S(demo.relocated_variant, demo.inline_variant.demands).total_time;

    demo.t_cv = plan.total_time;
    demo.ratio = demo.t_S_inline / demo.t_S_relocated;
    return demo;
}

std::vector<CheckResult> check_valve_closure_monotonicity(
    const Network& net, const ValveConfiguration& from, const std::string& valve_id,
    double kv_increase) {
    if (!from.is_open(valve_id))
        throw Error(ErrorCode::InvalidArgument,
                    "valve \"" + valve_id + "\" must start open");
    if (!(kv_increase > 0.0))
        throw Error(ErrorCode::InvalidArgument, "kv increase must be positive");

    const Solver solver(net);
    const FlowState before = solver.solve(from);

    ValveConfiguration to = from;
    if (std::isinf(kv_increase))
        to.valves.at(valve_id) = {false, 0.0};
    else
        to.valves.at(valve_id).kv += kv_increase;
    const FlowState after = solver.solve(to);

    const auto flows_a = before.sink_flows(net);
    const auto flows_b = after.sink_flows(net);
    const double scale = std::max(1.0, before.root_outflow(net));

    std::vector<CheckResult> out;

    {
        CheckResult r{"throttled_flow_nonincreasing", true, 0.0, valve_id};
        r.margin = (flows_a.at(valve_id) - flows_b.at(valve_id)) / scale;
        r.pass = r.margin >= -1e-9;
        out.push_back(r);
    }
    {
        CheckResult r{"other_flows_nondecreasing", true,
                      std::numeric_limits<double>::infinity(), ""};
        for (const auto& [id, fa] : flows_a) {
            if (id == valve_id) continue;
            const double slack = (flows_b.at(id) - fa) / scale;
            if (slack < r.margin) {
                r.margin = slack;
                r.witness = id;
            }
        }
        if (!std::isfinite(r.margin)) r.margin = 0.0; // single-sink network
        r.pass = r.margin >= -1e-9;
        out.push_back(r);
    }
    {
        CheckResult r{"heads_nondecreasing", true,
                      std::numeric_limits<double>::infinity(), ""};
        for (const auto& [id, ha] : before.node_heads) {
            const double span = std::max(1.0, net.source_head - net.sink_head);
            const double slack = (after.node_heads.at(id) - ha) / span;
            if (slack < r.margin) {
                r.margin = slack;
                r.witness = id;
            }
        }
        r.pass = r.margin >= -1e-9;
        out.push_back(r);
    }
    {
        // The throttled sink loses at least as much as everyone else gains,
        // i.e. total outflow does not increase.
        CheckResult r{"loss_dominates_gains", true, 0.0, valve_id};
        r.margin = (before.root_outflow(net) - after.root_outflow(net)) / scale;
        r.pass = r.margin >= -1e-9;
        out.push_back(r);
    }
    return out;
}

CheckResult check_concavity(const Network& net, const ValveConfiguration& base,
                            const std::string& valve_id) {
    if (!base.is_open(valve_id))
        throw Error(ErrorCode::InvalidArgument,
                    "valve \"" + valve_id + "\" must start open");
    const Solver solver(net);

    const FlowState full = solver.solve(base);
    const double f_full = full.sink_flows(net).at(valve_id);

    CheckResult r{"root_flow_concave_in_sink_flow", true, 0.0, valve_id};
    if (!(f_full > 0.0)) return r; // starved sink; nothing to vary

    auto root_at = [&](const ValveConfiguration& cfg) {
        return solver.solve(cfg).root_outflow(net);
    };

    // Find the valve resistance that halves this sink's flow (flow is
    // continuous and strictly decreasing in kv until it hits zero).
    const double target = 0.5 * f_full;
    const double kv0 = base.valves.at(valve_id).kv;
    auto flow_minus_target = [&](double kv) {
        ValveConfiguration cfg = base;
        cfg.valves.at(valve_id).kv = kv;
        return solver.solve(cfg).sink_flows(net).at(valve_id) - target;
    };
    double hi = std::max(1.0, kv0 + 1.0);
    const double span = net.source_head - net.sink_head;
    hi = std::max(hi, 2.0 * span / std::pow(target, net.exponent));
    for (int i = 0; i < 60 && flow_minus_target(hi) > 0.0; ++i) hi *= 4.0;

    double kv_half = kv0;
    {
        // bisect on kv
        double lo = kv0;
        double glo = flow_minus_target(lo);
        double ghi = flow_minus_target(hi);
        if (!(glo > 0.0)) {
            kv_half = lo;
        } else if (!(ghi < 0.0)) {
            kv_half = hi;
        } else {
            for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
                const double mid = lo + 0.5 * (hi - lo);
                const double gm = flow_minus_target(mid);
                if (gm > 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                    ghi = gm;
                }
            }
            kv_half = lo + 0.5 * (hi - lo);
        }
    }

    ValveConfiguration half = base;
    half.valves.at(valve_id).kv = kv_half;
    ValveConfiguration closed = base;
    closed.valves.at(valve_id) = {false, 0.0};

    const double q_full = full.root_outflow(net);
    const double q_half = root_at(half);
    const double q_zero = root_at(closed);

    const double first_half = q_half - q_zero;  // root-flow cost of 0 -> f/2
    const double second_half = q_full - q_half; // root-flow cost of f/2 -> f
    const double scale = std::max(1.0, q_full);
    r.margin = (first_half - second_half) / scale;
    r.pass = r.margin >= -1e-9;
    return r;
}

std::vector<CheckResult> check_power_inequalities(const std::vector<double>& x,
                                                  double exponent) {
    if (x.empty())
        throw Error(ErrorCode::Domain, "need at least one term");
    if (!(exponent >= 1.0) || !std::isfinite(exponent))
        throw Error(ErrorCode::Domain, "flow exponent must be finite and >= 1");
    for (const double xi : x)
        if (!(xi > 0.0) || !std::isfinite(xi))
            throw Error(ErrorCode::Domain, "terms must be positive and finite");

    const double inv_n = 1.0 / exponent;
    const int m = static_cast<int>(x.size());
    double sum = 0.0, sum_roots = 0.0;
    for (const double xi : x) {
        sum += xi;
        sum_roots += std::pow(xi, inv_n);
    }
    const double root_of_sum = std::pow(sum, inv_n);

    std::vector<CheckResult> out;
    {
        // sum of n-th roots <= m^(1-1/n) * (n-th root of the sum)
        CheckResult r{"root_sum_upper", true, 0.0, ""};
        const double rhs = std::pow(static_cast<double>(m), 1.0 - inv_n) * root_of_sum;
        r.margin = (rhs - sum_roots) / rhs;
        r.pass = r.margin >= -1e-12;
        out.push_back(r);
    }
    {
        // n-th root of the sum <= sum of n-th roots (subadditivity)
        CheckResult r{"root_sum_lower", true, 0.0, ""};
        r.margin = (sum_roots - root_of_sum) / sum_roots;
        r.pass = r.margin >= -1e-12;
        out.push_back(r);
    }
    return out;
}

} // namespace potflow
