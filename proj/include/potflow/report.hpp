#pragma once

#include "potflow/analysis.hpp"
#include "potflow/continuous.hpp"
#include "potflow/discrete.hpp"
#include "potflow/hydraulics.hpp"
#include "potflow/network.hpp"

#include <string>
#include <vector>

namespace potflow {

enum class Format { Json, Csv, Text };
Format parse_format(const std::string& name); // "json" | "csv" | "text"

std::string render_flow_state(const Network& net, const FlowState& state, Format format);
std::string render_continuous_plan(const Network& net, const ContinuousPlan& plan,
                                   Format format);
std::string render_schedule(const Network& net, const Schedule& schedule, Format format);
std::string render_analysis(const AnalysisReport& report, Format format);
std::string render_braess(const BraessDemo& demo, Format format);
std::string render_checks(const std::vector<CheckResult>& checks, Format format);
std::string render_sweep(const SweepSummary& summary, Format format);
std::string render_worst_case(const ClassCInstance& instance, const AnalysisReport& report,
                              Format format);

} // namespace potflow
