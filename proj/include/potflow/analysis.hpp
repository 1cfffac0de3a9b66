#pragma once

#include "potflow/continuous.hpp"
#include "potflow/discrete.hpp"
#include "potflow/network.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace potflow {

// Guaranteed ceiling on (discrete optimum) / (proportional time) for any
// network whose deepest sink sits behind m positive-resistance edges.
double bound_R(int m, double exponent); // m^(1 - 1/exponent)

struct AnalysisReport {
    double t_cv = 0.0;
    double t_S = 0.0;
    double t_d_opt = 0.0;
    double t_mix = 0.0;
    double R = 0.0;            // t_d_opt / t_cv
    int m = 0;
    double bound = 0.0;        // bound_R(m, exponent)
    double trivial_bound = 0.0;// number of sinks
    double poa = 0.0;          // t_S / t_cv
    std::vector<std::string> anomalies;
};

AnalysisReport compute_ratio(const Network& net,
                             const std::map<std::string, double>& demands,
                             int mixture_samples = 0, std::uint64_t seed = 1);

// Mainline chain with one zero-resistance offtake per junction. Closing the
// sinks far-to-near gives the exact discrete optimum in closed form.
struct ClassCInstance {
    Network network;
    std::vector<double> k;           // mainline resistances, k[0] nearest source
    std::vector<double> q;           // decreasing target sink flows
    std::map<std::string, double> demands;
    double closed_form_t_d = 0.0;
    double t_cv = 1.0;
};

// Exact discrete optimum for the chain: sum over stages of remaining-demand
// increments over stage flows. q must be positive and strictly decreasing.
double classC_closed_form(const std::vector<double>& k, const std::vector<double>& q,
                          double exponent);

// Instance whose ratio approaches bound_R(m, exponent) as rho grows
// (resistances k_i = rho^(i-1), sink targets chosen to equalize per-stage
// head drops). t_cv is normalized to 1.
ClassCInstance worst_case_instance(int m, double exponent, double rho);

struct RandomInstance {
    Network network;
    std::map<std::string, double> demands; // same map as network.demands
};

struct RandomInstanceOptions {
    int max_depth = 5;
    int max_branching = 3;
    int max_sinks = 9;      // keeps 2^|T| enumeration affordable
    double n_min = 1.0;
    double n_max = 3.0;
    bool star_only = false; // depth-1 topology
    double zero_k_fraction = 0.15; // chance an internal edge is frictionless
};

// Random valid tree with positive demands scaled so the proportional time is
// at most 1. Deterministic in `seed`.
RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& options);

// t_S / t_cv for the greedy all-open plan.
double compute_poa(const Network& net, const std::map<std::string, double>& demands);

// Braess-style comparison: the same chain with (a) frictionless offtakes and
// (b) offtake resistance moved off the mainline. Greedy operation is slower
// on (a) even though (a) is pointwise at least as conductive.
struct BraessDemo {
    ClassCInstance inline_variant;
    Network relocated_variant;
    double t_S_inline = 0.0;
    double t_S_relocated = 0.0;
    double t_cv = 0.0; // same for both variants
    double ratio = 0.0; // t_S_inline / t_S_relocated
};

BraessDemo braess_demo(int m, double exponent, double rho);

struct CheckResult {
    std::string property;
    bool pass = true;
    double margin = 0.0;   // worst signed slack; negative means violated
    std::string witness;   // where the worst slack occurred
};

// Closing (or throttling) one valve: its flow does not increase, every other
// sink flow does not decrease, heads do not decrease, and the closed sink's
// loss dominates everyone else's combined gain.
std::vector<CheckResult> check_valve_closure_monotonicity(
    const Network& net, const ValveConfiguration& from, const std::string& valve_id,
    double kv_increase);

// Root outflow as a function of one sink's delivered flow is concave: pushing
// the sink from 0 to x/2 costs at least as much root flow as x/2 to x.
CheckResult check_concavity(const Network& net, const ValveConfiguration& base,
                            const std::string& valve_id);

// Power-mean comparisons behind bound_R, on raw positive vectors:
//   sum(x_i^(1/n)) <= m^(1-1/n) * (sum x_i)^(1/n)   and
//   sum(x_i)^(1/n) <= sum(x_i^(1/n)).
std::vector<CheckResult> check_power_inequalities(const std::vector<double>& x,
                                                  double exponent);

struct SweepConfig {
    int trials = 100;
    std::uint64_t seed = 1;
    RandomInstanceOptions instance;
    int mixture_samples = 0;
};

struct SweepRow {
    std::uint64_t seed = 0;
    int m = 0;
    double n = 0.0;
    double t_cv = 0.0;
    double t_S = 0.0;
    double t_d_opt = 0.0;
    double t_mix = 0.0;
    double R = 0.0;
    double bound = 0.0;
    double poa = 0.0;
    std::string anomaly_flags; // semicolon-joined, empty when clean
};

struct SweepSummary {
    std::vector<SweepRow> rows;
    int violations = 0;
    std::vector<std::string> failures; // human-readable, one per violation
};

// Bound sandwich on random instances: 1 - eps <= R <= min(bound, sinks) + eps
// and t_mix <= min(t_cv, t_d_opt) + eps.
SweepSummary run_bound_sweep(const SweepConfig& config);

// Monotonicity and concavity spot checks on random instances/configurations.
SweepSummary run_property_sweep(const SweepConfig& config);

// Power-mean inequalities on random vectors; trials = number of vectors.
SweepSummary run_power_sweep(int trials, std::uint64_t seed);

// poa >= 1 - eps and poa <= bound + eps on random instances.
SweepSummary run_poa_sweep(const SweepConfig& config);

} // namespace potflow
