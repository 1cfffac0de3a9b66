#include "potflow/analysis.hpp"
#include "potflow/errors.hpp"
#include "potflow/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace potflow;

int exit_code_for(const Error& err) {
    switch (err.code()) {
    case ErrorCode::Parse:
    case ErrorCode::Validation:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
        return 1;
    default:
        return 2;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open \"" + path + "\" for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw Error(ErrorCode::Io, "failed reading \"" + path + "\"");
    return buf.str();
}

// Output is composed in memory and moved into place in one step, so a failed
// run never leaves a truncated file behind.
void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    const std::string tmp = out_path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Io, "cannot open \"" + tmp + "\" for writing");
        out << text;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw Error(ErrorCode::Io, "failed writing \"" + tmp + "\"");
        }
    }
    if (std::rename(tmp.c_str(), out_path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error(ErrorCode::Io, "cannot move output into \"" + out_path + "\"");
    }
}

struct CommonArgs {
    std::string input;
    std::string out;
    std::string format = "text";
};

void add_io(CLI::App* cmd, CommonArgs& args, bool needs_input) {
    if (needs_input)
        cmd->add_option("--input", args.input, "network JSON file")->required();
    cmd->add_option("--out", args.out, "write the report here instead of stdout");
    cmd->add_option("--format", args.format, "json, csv, or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-time operation of branched potential-flow networks"};
    app.require_subcommand(1);

    CommonArgs solve_args, pc_args, pd_args, ps_args, ratio_args, wc_args, braess_args,
        verify_args;

    auto* cmd_solve =
        app.add_subcommand("solve", "steady flows with every valve fully open");
    add_io(cmd_solve, solve_args, true);

    auto* cmd_pc = app.add_subcommand(
        "plan-continuous", "constant valve settings draining all demands together");
    add_io(cmd_pc, pc_args, true);

    auto* cmd_pd = app.add_subcommand(
        "plan-discrete", "minimum-time ON/OFF schedule (exact, via LP)");
    add_io(cmd_pd, pd_args, true);

    auto* cmd_ps = app.add_subcommand(
        "plan-selfish", "greedy schedule: all valves open, close each sink as it finishes");
    add_io(cmd_ps, ps_args, true);

    int ratio_samples = 0;
    std::uint64_t ratio_seed = 1;
    auto* cmd_ratio = app.add_subcommand(
        "ratio", "compare continuous, greedy, discrete-optimal and mixed plans");
    add_io(cmd_ratio, ratio_args, true);
    cmd_ratio->add_option("--samples", ratio_samples,
                          "extra random directions in the mixture pool");
    cmd_ratio->add_option("--seed", ratio_seed, "seed for the mixture samples");

    int wc_m = 2;
    double wc_n = 2.0, wc_rho = 1e4;
    auto* cmd_wc = app.add_subcommand(
        "worst-case", "chain instance driving the discrete/continuous ratio to its bound");
    add_io(cmd_wc, wc_args, false);
    cmd_wc->add_option("--m", wc_m, "number of resistive mainline segments")->required();
    cmd_wc->add_option("--n", wc_n, "flow exponent")->required();
    cmd_wc->add_option("--rho", wc_rho, "resistance growth ratio (>= 1)");

    int braess_m = 2;
    double braess_n = 2.0, braess_rho = 1e4;
    auto* cmd_braess = app.add_subcommand(
        "braess-demo", "removing offtake resistance slows the greedy schedule down");
    add_io(cmd_braess, braess_args, false);
    cmd_braess->add_option("--m", braess_m, "number of resistive mainline segments")
        ->required();
    cmd_braess->add_option("--n", braess_n, "flow exponent")->required();
    cmd_braess->add_option("--rho", braess_rho, "resistance growth ratio (>= 1)");

    std::string verify_suite = "all";
    int verify_trials = 100;
    std::uint64_t verify_seed = 1;
    int verify_samples = 16;
    auto* cmd_verify = app.add_subcommand(
        "verify", "randomized self-checks of the bound, monotonicity and mean inequalities");
    add_io(cmd_verify, verify_args, false);
    cmd_verify->add_option("--suite", verify_suite, "props, bounds, poa, or all")
        ->check(CLI::IsMember({"props", "bounds", "poa", "all"}));
    cmd_verify->add_option("--trials", verify_trials, "instances per suite")
        ->check(CLI::PositiveNumber);
    cmd_verify->add_option("--seed", verify_seed, "base seed");
    cmd_verify->add_option("--samples", verify_samples,
                           "mixture pool samples in the bounds suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_solve->parsed()) {
            const Network net = parse_network(read_file(solve_args.input));
            const FlowState st = solve_state(net, ValveConfiguration::all_open(net));
            emit(render_flow_state(net, st, parse_format(solve_args.format)),
                 solve_args.out);
        } else if (cmd_pc->parsed()) {
            const Network net = parse_network(read_file(pc_args.input));
            const ContinuousPlan plan = proportional_configuration(net, net.demands);
            emit(render_continuous_plan(net, plan, parse_format(pc_args.format)),
                 pc_args.out);
        } else if (cmd_pd->parsed()) {
            const Network net = parse_network(read_file(pd_args.input));
            const DiscreteOptimum opt = optimal_discrete(net, net.demands);
            emit(render_schedule(net, opt.schedule, parse_format(pd_args.format)),
                 pd_args.out);
        } else if (cmd_ps->parsed()) {
            const Network net = parse_network(read_file(ps_args.input));
            const Schedule sched = schedule_S(net, net.demands);
            emit(render_schedule(net, sched, parse_format(ps_args.format)), ps_args.out);
        } else if (cmd_ratio->parsed()) {
            const Network net = parse_network(read_file(ratio_args.input));
            const AnalysisReport rep =
                compute_ratio(net, net.demands, ratio_samples, ratio_seed);
            emit(render_analysis(rep, parse_format(ratio_args.format)), ratio_args.out);
        } else if (cmd_wc->parsed()) {
            const ClassCInstance inst = worst_case_instance(wc_m, wc_n, wc_rho);
            const AnalysisReport rep = compute_ratio(inst.network, inst.demands, 0, 1);
            emit(render_worst_case(inst, rep, parse_format(wc_args.format)), wc_args.out);
        } else if (cmd_braess->parsed()) {
            const BraessDemo demo = braess_demo(braess_m, braess_n, braess_rho);
            emit(render_braess(demo, parse_format(braess_args.format)), braess_args.out);
        } else if (cmd_verify->parsed()) {
            const Format format = parse_format(verify_args.format);
            SweepConfig cfg;
            cfg.trials = verify_trials;
            cfg.seed = verify_seed;
            cfg.mixture_samples = verify_samples;

            std::vector<std::pair<std::string, SweepSummary>> sections;
            if (verify_suite == "props" || verify_suite == "all") {
                sections.emplace_back("monotonicity_concavity", run_property_sweep(cfg));
                sections.emplace_back("power_mean_inequalities",
                                      run_power_sweep(verify_trials * 200, verify_seed));
            }
            if (verify_suite == "bounds" || verify_suite == "all")
                sections.emplace_back("ratio_bounds", run_bound_sweep(cfg));
            if (verify_suite == "poa" || verify_suite == "all")
                sections.emplace_back("price_of_anarchy", run_poa_sweep(cfg));

            int violations = 0;
            std::string output;
            nlohmann::ordered_json doc;
            bool wrote_csv_header = false;
            for (const auto& [name, summary] : sections) {
                violations += summary.violations;
                switch (format) {
                case Format::Text:
                    output += "== " + name + " ==\n" + render_sweep(summary, format);
                    break;
                case Format::Csv: {
                    // suites share one row layout; keep a single header line
                    std::string block = render_sweep(summary, format);
                    const size_t eol = block.find('\n');
                    output += wrote_csv_header ? block.substr(eol + 1) : block;
                    wrote_csv_header = true;
                    break;
                }
                case Format::Json:
                    doc[name] =
                        nlohmann::ordered_json::parse(render_sweep(summary, Format::Json));
                    break;
                }
            }
            if (format == Format::Json) output = doc.dump(2) + "\n";

            emit(output, verify_args.out);
            if (violations > 0) {
                std::cerr << "error[verify]: " << violations << " violation(s) found\n";
                return 2;
            }
        }
    } catch (const Error& err) {
        std::cerr << "error[" << err.code_name() << "]: " << err.what() << "\n";
        return exit_code_for(err);
    } catch (const std::exception& ex) {
        std::cerr << "error[internal]: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
