#include "potflow/analysis.hpp"

#include "potflow/errors.hpp"
#include "potflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace potflow {

namespace {

struct Grower {
    Rng& rng;
    const RandomInstanceOptions& opt;
    Network& net;
    int next_internal = 0;
    int next_sink = 0;

    std::string fresh(const char* prefix, int& counter) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%s%03d", prefix, counter++);
        return buf;
    }

    double pipe_k(bool from_source, bool terminal) {
        // every sink path must cross at least one resistive edge, which the
        // source-level edges guarantee
        if (!from_source) {
            const double p = terminal ? 0.10 : opt.zero_k_fraction;
            if (rng.uniform() < p) return 0.0;
        }
        return rng.log_uniform(0.05, 20.0);
    }

    void add_sink(const std::string& parent, bool from_source) {
        const std::string id = fresh("t", next_sink);
        net.edges.push_back({parent, id, pipe_k(from_source, true)});
        net.demands[id] = rng.uniform(0.1, 10.0);
    }

    // Hang `budget` sinks below `node` using at most `levels` further edges.
    void attach(const std::string& node, int budget, int levels, bool from_source) {
        if (levels <= 1) {
            for (int i = 0; i < budget; ++i) add_sink(node, from_source);
            return;
        }
        if (budget == 1) {
            if (rng.uniform() < 0.55) {
                add_sink(node, from_source);
                return;
            }
            const std::string mid = fresh("n", next_internal);
            net.edges.push_back({node, mid, pipe_k(from_source, false)});
            attach(mid, 1, levels - 1, false);
            return;
        }
        if (rng.uniform() < 0.20) { // extend a shared trunk
            const std::string mid = fresh("n", next_internal);
            net.edges.push_back({node, mid, pipe_k(from_source, false)});
            attach(mid, budget, levels - 1, false);
            return;
        }
        const std::uint64_t fan =
            std::max<std::uint64_t>(2, std::min<std::uint64_t>(opt.max_branching, budget));
        const int branches = static_cast<int>(rng.integer(2, fan));
        int remaining = budget;
        for (int b = 0; b < branches; ++b) {
            const int left_over = branches - 1 - b;
            const int part =
                b + 1 == branches
                    ? remaining
                    : static_cast<int>(rng.integer(1, remaining - left_over));
            remaining -= part;
            if (part == 1) {
                attach(node, 1, levels, from_source);
            } else {
                const std::string mid = fresh("n", next_internal);
                net.edges.push_back({node, mid, pipe_k(from_source, false)});
                attach(mid, part, levels - 1, false);
            }
        }
    }
};

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const auto& f : flags) {
        if (!out.empty()) out += ";";
        out += f;
    }
    return out;
}

} // namespace

RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& options) {
    Rng rng(seed);

    RandomInstance inst;
    Network& net = inst.network;
    net.source_id = "source";
    net.exponent = options.n_min == options.n_max
                       ? options.n_min
                       : rng.uniform(options.n_min, options.n_max);
    net.sink_head = rng.uniform(0.0, 2.0);
    net.source_head = net.sink_head + rng.log_uniform(0.5, 20.0);

    const int max_sinks = std::max(2, options.max_sinks);
    const int sinks = static_cast<int>(rng.integer(2, max_sinks));
    const int levels = options.star_only
                           ? 1
                           : static_cast<int>(rng.integer(
                                 1, std::max(1, options.max_depth)));

    Grower grower{rng, options, net};
    grower.attach(net.source_id, sinks, levels, true);
    require_valid(net);

    // Normalize volumes so the proportional plan takes unit time; emptying
    // times then compare directly across instances.
    const ContinuousPlan plan = proportional_configuration(net, net.demands);
    for (auto& [id, d] : net.demands) d /= plan.total_time;

    inst.demands = net.demands;
    return inst;
}

SweepSummary run_bound_sweep(const SweepConfig& config) {
    SweepSummary summary;
    for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(trial);
        const RandomInstance inst = random_instance(seed, config.instance);
        const AnalysisReport rep =
            compute_ratio(inst.network, inst.demands, config.mixture_samples, seed);

        SweepRow row;
        row.seed = seed;
        row.m = rep.m;
        row.n = inst.network.exponent;
        row.t_cv = rep.t_cv;
        row.t_S = rep.t_S;
        row.t_d_opt = rep.t_d_opt;
        row.t_mix = rep.t_mix;
        row.R = rep.R;
        row.bound = rep.bound;
        row.poa = rep.poa;
        row.anomaly_flags = join_flags(rep.anomalies);
        summary.rows.push_back(row);

        if (!rep.anomalies.empty()) {
            summary.violations++;
            std::ostringstream msg;
            msg << "seed " << seed << ": " << row.anomaly_flags;
            summary.failures.push_back(msg.str());
        }
    }
    return summary;
}

SweepSummary run_property_sweep(const SweepConfig& config) {
    SweepSummary summary;
    for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(trial);
        const RandomInstance inst = random_instance(seed, config.instance);
        const auto sinks = inst.network.demand_ids();
        Rng rng(seed ^ 0x5eedf00dULL);

        const auto& victim = sinks[rng.integer(0, sinks.size() - 1)];
        const ValveConfiguration base = ValveConfiguration::all_open(inst.network);

        std::vector<CheckResult> checks;
        for (const double bump :
             {rng.log_uniform(0.1, 10.0), std::numeric_limits<double>::infinity()}) {
            auto res = check_valve_closure_monotonicity(inst.network, base, victim, bump);
            checks.insert(checks.end(), res.begin(), res.end());
        }
        const auto& probe = sinks[rng.integer(0, sinks.size() - 1)];
        checks.push_back(check_concavity(inst.network, base, probe));

        for (const auto& c : checks) {
            if (c.pass) continue;
            summary.violations++;
            std::ostringstream msg;
            msg << "seed " << seed << ": " << c.property << " margin " << c.margin
                << " at " << c.witness;
            summary.failures.push_back(msg.str());
        }
    }
    return summary;
}

SweepSummary run_power_sweep(int trials, std::uint64_t seed) {
    SweepSummary summary;
    Rng rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        const int m = static_cast<int>(rng.integer(1, 12));
        const double n = rng.uniform(1.0, 4.0);
        const bool force_equal = trial % 10 == 9;
        const double common = rng.log_uniform(1e-3, 1e3);
        std::vector<double> x(m);
        for (double& xi : x) xi = force_equal ? common : rng.log_uniform(1e-3, 1e3);

        bool all_equal = true;
        for (const double xi : x) all_equal &= xi == x[0];

        for (const auto& c : check_power_inequalities(x, n)) {
            bool bad = !c.pass;
            std::string note;
            if (c.property == "root_sum_upper") {
                // tight exactly when all terms coincide (or the law is linear)
                const bool tight_expected = all_equal || n == 1.0;
                const bool tight = std::abs(c.margin) <= 1e-12;
                if (tight != tight_expected) {
                    bad = true;
                    note = tight ? " (unexpected equality)" : " (equality case not tight)";
                }
            }
            if (bad) {
                summary.violations++;
                std::ostringstream msg;
                msg << "trial " << trial << ": " << c.property << " margin " << c.margin
                    << note;
                summary.failures.push_back(msg.str());
            }
        }
    }
    return summary;
}

SweepSummary run_poa_sweep(const SweepConfig& config) {
    SweepSummary summary;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int trial = 0; trial < config.trials; ++trial) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(trial);
        const RandomInstance inst = random_instance(seed, config.instance);

        const ContinuousPlan plan = proportional_configuration(inst.network, inst.demands);
        const Schedule greedy = schedule_S(inst.network, inst.demands);
        const DepthReport depth = effective_depth(inst.network);
        const double bound = bound_R(std::max(1, depth.m), inst.network.exponent);
        const double poa = greedy.total_time / plan.total_time;

        SweepRow row;
        row.seed = seed;
        row.m = depth.m;
        row.n = inst.network.exponent;
        row.t_cv = plan.total_time;
        row.t_S = greedy.total_time;
        row.t_d_opt = nan;
        row.t_mix = nan;
        row.R = nan;
        row.bound = bound;
        row.poa = poa;

        std::vector<std::string> flags;
        if (poa < 1.0 - 1e-9) flags.push_back("poa_below_one");
        if (poa > bound + 1e-6) flags.push_back("poa_above_bound");
        row.anomaly_flags = join_flags(flags);
        summary.rows.push_back(row);

        if (!flags.empty()) {
            summary.violations++;
            std::ostringstream msg;
            msg << "seed " << seed << ": " << row.anomaly_flags;
            summary.failures.push_back(msg.str());
        }
    }
    return summary;
}

} // namespace potflow
