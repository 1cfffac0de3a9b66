#include "potflow/report.hpp"

#include "potflow/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace potflow {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string num(double v, const char* fmt = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string csv_num(double v) { return std::isnan(v) ? "" : num(v); }

ordered_json network_json(const Network& net) {
    return ordered_json::parse(serialize_network(net));
}

ordered_json config_json(const ValveConfiguration& config) {
    ordered_json out = ordered_json::object();
    for (const auto& [id, valve] : config.valves) {
        out[id] = {{"open", valve.open}, {"kv", valve.kv}};
    }
    return out;
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

} // namespace

Format parse_format(const std::string& name) {
    if (name == "json") return Format::Json;
    if (name == "csv") return Format::Csv;
    if (name == "text") return Format::Text;
    throw Error(ErrorCode::InvalidArgument,
                "unknown format \"" + name + "\" (expected json, csv, or text)");
}

std::string render_flow_state(const Network& net, const FlowState& state, Format format) {
    switch (format) {
    case Format::Json: {
        ordered_json doc;
        doc["config"] = config_json(state.config);
        doc["node_heads"] = ordered_json::object();
        for (const auto& [id, h] : state.node_heads) doc["node_heads"][id] = h;
        doc["edge_flows"] = ordered_json::array();
        for (size_t e = 0; e < net.edges.size(); ++e)
            doc["edge_flows"].push_back({{"from", net.edges[e].from},
                                         {"to", net.edges[e].to},
                                         {"flow", state.edge_flows[e]}});
        doc["sink_flows"] = ordered_json::object();
        for (const auto& [id, f] : state.sink_flows(net)) doc["sink_flows"][id] = f;
        doc["root_outflow"] = state.root_outflow(net);
        return dump(doc);
    }
    case Format::Csv: {
        std::ostringstream out;
        out << "from,to,flow,head_from,head_to\n";
        for (size_t e = 0; e < net.edges.size(); ++e)
            out << net.edges[e].from << "," << net.edges[e].to << ","
                << num(state.edge_flows[e]) << ","
                << num(state.node_heads.at(net.edges[e].from)) << ","
                << num(state.node_heads.at(net.edges[e].to)) << "\n";
        return out.str();
    }
    case Format::Text: {
        std::ostringstream out;
        out << "root outflow " << num(state.root_outflow(net), "%.12g") << "\n";
        for (size_t e = 0; e < net.edges.size(); ++e)
            out << "  " << net.edges[e].from << " -> " << net.edges[e].to << "  q="
                << num(state.edge_flows[e], "%.12g") << "\n";
        out << "heads\n";
        for (const auto& [id, h] : state.node_heads)
            out << "  " << id << " = " << num(h, "%.12g") << "\n";
        return out.str();
    }
    }
    return {};
}

std::string render_continuous_plan(const Network& net, const ContinuousPlan& plan,
                                   Format format) {
    (void)net;
    switch (format) {
    case Format::Json: {
        ordered_json doc;
        doc["t_cv"] = plan.total_time;
        doc["scale"] = plan.scale;
        doc["binding_leaf"] = plan.binding_leaf;
        doc["config"] = config_json(plan.config);
        doc["leaf_flows"] = ordered_json::object();
        for (const auto& [id, f] : plan.leaf_flows) doc["leaf_flows"][id] = f;
        return dump(doc);
    }
    case Format::Csv: {
        std::ostringstream out;
        out << "sink,open,kv,flow\n";
        for (const auto& [id, valve] : plan.config.valves)
            out << id << "," << (valve.open ? 1 : 0) << "," << num(valve.kv) << ","
                << num(plan.leaf_flows.at(id)) << "\n";
        return out.str();
    }
    case Format::Text: {
        std::ostringstream out;
        out << "proportional plan: t_cv " << num(plan.total_time, "%.12g")
            << ", flow scale " << num(plan.scale, "%.12g") << ", binding leaf "
            << plan.binding_leaf << "\n";
        for (const auto& [id, valve] : plan.config.valves) {
            out << "  " << id << ": ";
            if (valve.open)
                out << "open kv=" << num(valve.kv, "%.12g")
                    << " flow=" << num(plan.leaf_flows.at(id), "%.12g") << "\n";
            else
                out << "closed\n";
        }
        return out.str();
    }
    }
    return {};
}

std::string render_schedule(const Network& net, const Schedule& schedule, Format format) {
    const auto sinks = net.demand_ids();
    switch (format) {
    case Format::Json: {
        ordered_json doc;
        doc["total_time"] = schedule.total_time;
        doc["steps"] = ordered_json::array();
        for (const auto& step : schedule.steps) {
            ordered_json s;
            s["open"] = step.open;
            s["duration"] = step.duration;
            s["flows"] = ordered_json::object();
            for (const auto& [id, f] : step.leaf_flows) s["flows"][id] = f;
            doc["steps"].push_back(std::move(s));
        }
        doc["delivered"] = ordered_json::object();
        for (const auto& [id, v] : schedule.delivered) doc["delivered"][id] = v;
        return dump(doc);
    }
    case Format::Csv: {
        std::ostringstream out;
        out << "step_index,duration";
        for (const auto& id : sinks) out << "," << id;
        out << "\n";
        for (size_t i = 0; i < schedule.steps.size(); ++i) {
            out << i << "," << num(schedule.steps[i].duration);
            for (const auto& id : sinks)
                out << "," << num(schedule.steps[i].leaf_flows.at(id));
            out << "\n";
        }
        return out.str();
    }
    case Format::Text: {
        std::ostringstream out;
        out << "total time " << num(schedule.total_time, "%.12g") << " over "
            << schedule.steps.size() << " steps\n";
        for (size_t i = 0; i < schedule.steps.size(); ++i) {
            const auto& step = schedule.steps[i];
            out << "  step " << i << ": dt " << num(step.duration, "%.12g") << ", open";
            for (const auto& id : step.open) out << " " << id;
            out << "\n";
        }
        return out.str();
    }
    }
    return {};
}

namespace {

ordered_json analysis_json(const AnalysisReport& report) {
    ordered_json doc;
    doc["t_cv"] = report.t_cv;
    doc["t_S"] = report.t_S;
    doc["t_d_opt"] = report.t_d_opt;
    doc["t_mix"] = report.t_mix;
    doc["R"] = report.R;
    doc["m"] = report.m;
    doc["bound"] = report.bound;
    doc["trivial_bound"] = report.trivial_bound;
    doc["poa"] = report.poa;
    doc["anomalies"] = report.anomalies;
    return doc;
}

std::string analysis_csv_header() {
    return "t_cv,t_S,t_d_opt,t_mix,R,m,bound,trivial_bound,poa,anomaly_flags";
}

std::string analysis_csv_row(const AnalysisReport& r) {
    std::ostringstream out;
    out << csv_num(r.t_cv) << "," << csv_num(r.t_S) << "," << csv_num(r.t_d_opt) << ","
        << csv_num(r.t_mix) << "," << csv_num(r.R) << "," << r.m << ","
        << csv_num(r.bound) << "," << csv_num(r.trivial_bound) << "," << csv_num(r.poa)
        << ",";
    for (size_t i = 0; i < r.anomalies.size(); ++i)
        out << (i ? ";" : "") << r.anomalies[i];
    return out.str();
}

std::string analysis_text(const AnalysisReport& r) {
    std::ostringstream out;
    out << "t_cv          " << num(r.t_cv, "%.12g") << "\n"
        << "t_S           " << num(r.t_S, "%.12g") << "\n"
        << "t_d_opt       " << num(r.t_d_opt, "%.12g") << "\n"
        << "t_mix         " << num(r.t_mix, "%.12g") << "\n"
        << "R             " << num(r.R, "%.12g") << "\n"
        << "m             " << r.m << "\n"
        << "bound         " << num(r.bound, "%.12g") << "\n"
        << "trivial_bound " << num(r.trivial_bound, "%.12g") << "\n"
        << "poa           " << num(r.poa, "%.12g") << "\n";
    if (r.anomalies.empty()) {
        out << "anomalies     none\n";
    } else {
        out << "anomalies    ";
        for (const auto& a : r.anomalies) out << " " << a;
        out << "\n";
    }
    return out.str();
}

} // namespace

std::string render_analysis(const AnalysisReport& report, Format format) {
    switch (format) {
    case Format::Json:
        return dump(analysis_json(report));
    case Format::Csv:
        return analysis_csv_header() + "\n" + analysis_csv_row(report) + "\n";
    case Format::Text:
        return analysis_text(report);
    }
    return {};
}

std::string render_braess(const BraessDemo& demo, Format format) {
    switch (format) {
    case Format::Json: {
        ordered_json doc;
        doc["t_cv"] = demo.t_cv;
        doc["t_S_inline"] = demo.t_S_inline;
        doc["t_S_relocated"] = demo.t_S_relocated;
        doc["ratio"] = demo.ratio;
        doc["inline_network"] = network_json(demo.inline_variant.network);
        doc["relocated_network"] = network_json(demo.relocated_variant);
        return dump(doc);
    }
    case Format::Csv: {
        std::ostringstream out;
        out << "quantity,value\n";
        out << "t_cv," << num(demo.t_cv) << "\n";
        out << "t_S_inline," << num(demo.t_S_inline) << "\n";
        out << "t_S_relocated," << num(demo.t_S_relocated) << "\n";
        out << "ratio," << num(demo.ratio) << "\n";
        return out.str();
    }
    case Format::Text: {
        std::ostringstream out;
        out << "greedy on frictionless offtakes: " << num(demo.t_S_inline, "%.12g")
            << "\n"
            << "greedy after moving valve resistance into the offtakes: "
            << num(demo.t_S_relocated, "%.12g") << "\n"
            << "proportional reference t_cv: " << num(demo.t_cv, "%.12g") << "\n"
            << "slowdown from removing resistance: " << num(demo.ratio, "%.12g")
            << "\n";
        return out.str();
    }
    }
    return {};
}

std::string render_checks(const std::vector<CheckResult>& checks, Format format) {
    switch (format) {
    case Format::Json: {
        ordered_json doc = ordered_json::array();
        for (const auto& c : checks)
            doc.push_back({{"property", c.property},
                           {"pass", c.pass},
                           {"margin", c.margin},
                           {"witness", c.witness}});
        return dump(doc);
    }
    case Format::Csv: {
        std::ostringstream out;
        out << "property,pass,margin,witness\n";
        for (const auto& c : checks)
            out << c.property << "," << (c.pass ? 1 : 0) << "," << num(c.margin) << ","
                << c.witness << "\n";
        return out.str();
    }
    case Format::Text: {
        std::ostringstream out;
        for (const auto& c : checks) {
            out << (c.pass ? "pass" : "FAIL") << "  " << c.property << "  margin "
                << num(c.margin, "%.6g");
            if (!c.witness.empty()) out << "  at " << c.witness;
            out << "\n";
        }
        return out.str();
    }
    }
    return {};
}

std::string render_sweep(const SweepSummary& summary, Format format) {
    switch (format) {
    case Format::Json: {
        ordered_json doc;
        doc["trials"] = summary.rows.size();
        doc["violations"] = summary.violations;
        doc["failures"] = summary.failures;
        doc["rows"] = ordered_json::array();
        for (const auto& r : summary.rows) {
            ordered_json row;
            row["seed"] = r.seed;
            row["m"] = r.m;
            row["n"] = r.n;
            auto put = [&row](const char* key, double v) {
                if (std::isnan(v))
                    row[key] = nullptr;
                else
                    row[key] = v;
            };
            put("t_cv", r.t_cv);
            put("t_S", r.t_S);
            put("t_d_opt", r.t_d_opt);
            put("t_mix", r.t_mix);
            put("R", r.R);
            put("bound", r.bound);
            put("poa", r.poa);
            row["anomaly_flags"] = r.anomaly_flags;
            doc["rows"].push_back(std::move(row));
        }
        return dump(doc);
    }
    case Format::Csv: {
        std::ostringstream out;
        out << "seed,m,n,t_cv,t_S,t_d_opt,t_mix,R,bound,poa,anomaly_flags\n";
        for (const auto& r : summary.rows)
            out << r.seed << "," << r.m << "," << num(r.n) << "," << csv_num(r.t_cv)
                << "," << csv_num(r.t_S) << "," << csv_num(r.t_d_opt) << ","
                << csv_num(r.t_mix) << "," << csv_num(r.R) << "," << csv_num(r.bound)
                << "," << csv_num(r.poa) << "," << r.anomaly_flags << "\n";
        return out.str();
    }
    case Format::Text: {
        std::ostringstream out;
        out << summary.rows.size() << " rows, " << summary.violations
            << " violations\n";
        for (const auto& f : summary.failures) out << "  " << f << "\n";
        return out.str();
    }
    }
    return {};
}

std::string render_worst_case(const ClassCInstance& instance, const AnalysisReport& report,
                              Format format) {
    switch (format) {
    case Format::Json: {
        ordered_json doc;
        doc["closed_form_t_d"] = instance.closed_form_t_d;
        doc["t_cv"] = instance.t_cv;
        doc["k"] = instance.k;
        doc["q"] = instance.q;
        doc["report"] = analysis_json(report);
        doc["network"] = network_json(instance.network);
        return dump(doc);
    }
    case Format::Csv:
        return "closed_form_t_d," + analysis_csv_header() + "\n" +
               num(instance.closed_form_t_d) + "," + analysis_csv_row(report) + "\n";
    case Format::Text: {
        std::ostringstream out;
        out << "predicted t_d (closed form) " << num(instance.closed_form_t_d, "%.12g")
            << "\n"
            << analysis_text(report);
        return out.str();
    }
    }
    return {};
}

} // namespace potflow
