#include "potflow/analysis.hpp"
#include "potflow/continuous.hpp"
#include "potflow/discrete.hpp"
#include "potflow/errors.hpp"
#include "potflow/network.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

using namespace potflow;

namespace {

Network two_tap_chain() {
    Network net;
    net.exponent = 2.0;
    net.source_id = "source";
    net.source_head = 7.0;
    net.sink_head = 0.0;
    net.edges = {{"source", "v01", 1.0}, {"v01", "t01", 0.0},
                 {"v01", "v02", 3.0},    {"v02", "t02", 0.0}};
    net.demands = {{"t01", 1.0}, {"t02", 1.0}};
    return net;
}

Network star(int sinks) {
    Network net;
    net.exponent = 2.0;
    net.source_id = "s";
    net.source_head = 5.0;
    net.sink_head = 0.0;
    for (int i = 0; i < sinks; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "t%02d", i + 1);
        net.edges.push_back({"s", id, 1.0 + 0.25 * i});
        net.demands[id] = 1.0;
    }
    return net;
}

} // namespace

TEST_CASE("configuration enumeration covers every nonempty open-set") {
    SUBCASE("two sinks on the chain") {
        const Network net = two_tap_chain();
        const auto columns = enumerate_configurations(net);
        REQUIRE(columns.size() == 3);
        // masks count up; bit 0 is the first sorted sink (t01)
        CHECK(columns[0].mask == 1);
        CHECK(columns[0].open == std::vector<std::string>{"t01"});
        CHECK(columns[1].mask == 2);
        CHECK(columns[1].open == std::vector<std::string>{"t02"});
        CHECK(columns[2].mask == 3);
        CHECK(columns[2].open == std::vector<std::string>{"t01", "t02"});

        // frozen flows: t01 alone pulls sqrt(7); t02 alone sqrt(7/4); with
        // both open the frictionless near tap starves the far one
        CHECK(columns[0].sink_flows[0] ==
              doctest::Approx(2.6457513110645907).epsilon(1e-15));
        CHECK(columns[0].sink_flows[1] == 0.0);
        CHECK(columns[1].sink_flows[0] == 0.0);
        CHECK(columns[1].sink_flows[1] ==
              doctest::Approx(1.3228756555322954).epsilon(1e-15));
        CHECK(columns[2].sink_flows[0] ==
              doctest::Approx(2.6457513110645907).epsilon(1e-15));
        CHECK(columns[2].sink_flows[1] == 0.0);
    }
    SUBCASE("three sinks make seven columns") {
        const auto columns = enumerate_configurations(star(3));
        CHECK(columns.size() == 7);
        for (std::uint32_t mask = 1; mask <= 7; ++mask)
            CHECK(columns[mask - 1].mask == mask);
    }
    SUBCASE("past twenty sinks enumeration refuses") {
        try {
            enumerate_configurations(star(21));
            FAIL("expected a size guard");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TooManySinks);
        }
    }
}

TEST_CASE("greedy plan on the chain: frozen steps") {
    const Network net = two_tap_chain();
    const Schedule sched = schedule_S(net, net.demands);

    REQUIRE(sched.steps.size() == 2);
    CHECK(sched.steps[0].open == std::vector<std::string>{"t01", "t02"});
    CHECK(sched.steps[1].open == std::vector<std::string>{"t02"});

    // step 1: t01 swallows sqrt(7) until its unit volume is done
    CHECK(sched.steps[0].duration ==
          doctest::Approx(0.3779644730092272).epsilon(1e-15));
    CHECK(sched.steps[0].leaf_flows.at("t01") ==
          doctest::Approx(2.6457513110645907).epsilon(1e-15));
    CHECK(sched.steps[0].leaf_flows.at("t02") == 0.0);
    // step 2: t02 alone
    CHECK(sched.steps[1].duration ==
          doctest::Approx(0.7559289460184544).epsilon(1e-15));
    CHECK(sched.steps[1].leaf_flows.at("t02") ==
          doctest::Approx(1.3228756555322954).epsilon(1e-15));
    CHECK(sched.steps[1].leaf_flows.at("t01") == 0.0);

    CHECK(sched.total_time ==
          doctest::Approx(1.1338934190276817).epsilon(1e-14)); // 3 / sqrt(7)
    CHECK(sched.delivered.at("t01") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sched.delivered.at("t02") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("greedy plan ignores zero demands") {
    const Network net = two_tap_chain();
    const Schedule sched = schedule_S(net, {{"t01", 0.0}, {"t02", 2.0}});
    REQUIRE(sched.steps.size() == 1);
    CHECK(sched.steps[0].open == std::vector<std::string>{"t02"});
    CHECK(sched.total_time ==
          doctest::Approx(2.0 / 1.3228756555322954).epsilon(1e-14));
    CHECK(sched.delivered.at("t01") == 0.0);
}

TEST_CASE("discrete optimum on the chain matches the hand calculation") {
    const Network net = two_tap_chain();
    const DiscreteOptimum opt = optimal_discrete(net, net.demands);

    // the near tap can only ever drink at sqrt(7) and the far one at
    // sqrt(7/4), whatever the switching order: t = 1/sqrt(7) + 2/sqrt(7)
    CHECK(opt.total_time == doctest::Approx(1.1338934190276817).epsilon(1e-12));
    CHECK(opt.duality_gap <= 1e-10 * std::max(1.0, opt.total_time));
    // summed in a different order, so ulp-level slack
    CHECK(opt.schedule.total_time ==
          doctest::Approx(opt.total_time).epsilon(1e-14));

    // steps come largest open-set first and integrate back to the demands
    REQUIRE(opt.schedule.steps.size() >= 2);
    CHECK(opt.schedule.steps[0].open.size() >=
          opt.schedule.steps.back().open.size());
    for (const auto& [id, v] : opt.schedule.delivered)
        CHECK(v == doctest::Approx(net.demands.at(id)).epsilon(1e-9));

    SUBCASE("reusing enumerated columns gives the same answer") {
        const auto columns = enumerate_configurations(net);
        const DiscreteOptimum again = optimal_discrete(net, net.demands, columns);
        CHECK(again.total_time == opt.total_time);
    }
}

TEST_CASE("with a linear head law switching cannot help") {
    Network net = star(3);
    net.exponent = 1.0;
    const std::map<std::string, double> demands = {
        {"t01", 1.0}, {"t02", 2.0}, {"t03", 0.5}};
    const double t_cv = proportional_configuration(net, demands).total_time;
    const DiscreteOptimum opt = optimal_discrete(net, demands);
    CHECK(opt.total_time == doctest::Approx(t_cv).epsilon(1e-9));
}

TEST_CASE("the discrete optimum never loses to greedy") {
    for (const std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        RandomInstanceOptions opt;
        opt.max_sinks = 6;
        opt.max_depth = 4;
        const RandomInstance inst = random_instance(seed, opt);
        const Schedule greedy = schedule_S(inst.network, inst.demands);
        const DiscreteOptimum best = optimal_discrete(inst.network, inst.demands);
        CHECK(best.total_time <= greedy.total_time + 1e-9);
        for (const auto& [id, v] : best.schedule.delivered)
            CHECK(v == doctest::Approx(inst.demands.at(id)).epsilon(1e-8));
    }
}

TEST_CASE("star networks drain every tap at its solo rate") {
    // no shared pipes: open-sets do not interact, so greedy, optimal and
    // proportional all take max_i over solo times... but with every valve
    // open from the start, each tap still runs at its solo flow.
    const Network net = star(4);
    const Schedule greedy = schedule_S(net, net.demands);
    const Solver solver(net);
    for (const auto& id : net.demand_ids()) {
        const FlowState solo =
            solver.solve(ValveConfiguration::open_set(net, {id}));
        CHECK(greedy.steps[0].leaf_flows.at(id) ==
              doctest::Approx(solo.sink_flows(net).at(id)).epsilon(1e-12));
    }
    const DiscreteOptimum best = optimal_discrete(net, net.demands);
    CHECK(best.total_time == doctest::Approx(greedy.total_time).epsilon(1e-9));
}
