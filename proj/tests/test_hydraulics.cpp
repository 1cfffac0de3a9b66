#include "potflow/errors.hpp"
#include "potflow/hydraulics.hpp"
#include "potflow/network.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

using namespace potflow;

namespace {

Network single_pipe() {
    Network net;
    net.exponent = 2.0;
    net.source_id = "s";
    net.source_head = 9.0;
    net.sink_head = 0.0;
    net.edges = {{"s", "t01", 4.0}};
    net.demands = {{"t01", 1.0}};
    return net;
}

// Symmetric fork: one trunk, two equal branches, all resistance 1.
Network y_network() {
    Network net;
    net.exponent = 2.0;
    net.source_id = "s";
    net.source_head = 3.0;
    net.sink_head = 0.0;
    net.edges = {{"s", "j", 1.0}, {"j", "t01", 1.0}, {"j", "t02", 1.0}};
    net.demands = {{"t01", 1.0}, {"t02", 1.0}};
    return net;
}

// Mainline with a frictionless tap at the middle junction.
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

} // namespace

TEST_CASE("single pipe follows the closed form") {
    const Network net = single_pipe();
    const FlowState st = solve_state(net, ValveConfiguration::all_open(net));
    // q = ((H - h0) / k)^(1/n) = (9/4)^(1/2), exactly representable
    CHECK(st.edge_flows[0] == 1.5);
    CHECK(st.root_outflow(net) == 1.5);
    CHECK(st.sink_flows(net).at("t01") == 1.5);
    CHECK(st.node_heads.at("s") == 9.0);
    CHECK(st.node_heads.at("t01") == 0.0);
}

TEST_CASE("valve resistance adds in series") {
    const Network net = single_pipe();
    ValveConfiguration cfg = ValveConfiguration::all_open(net);
    cfg.valves.at("t01").kv = 5.0;
    const FlowState st = solve_state(net, cfg);
    CHECK(st.edge_flows[0] == doctest::Approx(1.0).epsilon(1e-14)); // (9/9)^(1/2)
}

TEST_CASE("series chain collapses without iteration error") {
    Network net;
    net.exponent = 2.0;
    net.source_id = "s";
    net.source_head = 7.0;
    net.sink_head = 0.0;
    net.edges = {{"s", "a", 1.0}, {"a", "b", 2.0}, {"b", "t01", 1.0}};
    net.demands = {{"t01", 1.0}};
    const FlowState st = solve_state(net, ValveConfiguration::all_open(net));
    const double q = std::sqrt(7.0 / 4.0);
    CHECK(st.edge_flows[0] == doctest::Approx(q).epsilon(1e-15));
    // downstream flows are re-derived from their local head drops: ulp slack
    CHECK(st.edge_flows[1] == doctest::Approx(st.edge_flows[0]).epsilon(1e-14));
    CHECK(st.edge_flows[2] == doctest::Approx(st.edge_flows[0]).epsilon(1e-14));
    CHECK(st.node_heads.at("a") == doctest::Approx(7.0 - q * q).epsilon(1e-14));
}

TEST_CASE("symmetric fork splits evenly") {
    const Network net = y_network();
    const FlowState st = solve_state(net, ValveConfiguration::all_open(net));
    // trunk head drop + branch head drop = 3 with q_branch = q_trunk / 2:
    // (2f)^2 + f^2 = 3  =>  f = sqrt(3/5)
    CHECK(st.sink_flows(net).at("t01") ==
          doctest::Approx(0.7745966692414834).epsilon(1e-14));
    CHECK(st.sink_flows(net).at("t02") ==
          doctest::Approx(0.7745966692414834).epsilon(1e-14));
    CHECK(st.root_outflow(net) ==
          doctest::Approx(1.5491933384829668).epsilon(1e-14));
    CHECK(st.node_heads.at("j") == doctest::Approx(0.6).epsilon(1e-12));

    SUBCASE("closing one branch speeds up the other") {
        const FlowState one =
            solve_state(net, ValveConfiguration::open_set(net, {"t01"}));
        CHECK(one.sink_flows(net).at("t01") ==
              doctest::Approx(1.224744871391589).epsilon(1e-14)); // sqrt(3/2)
        CHECK(one.sink_flows(net).at("t02") == 0.0);
        CHECK(one.edge_flows[2] == 0.0);
    }

    SUBCASE("equal valve resistance keeps the split symmetric") {
        ValveConfiguration cfg = ValveConfiguration::all_open(net);
        cfg.valves.at("t01").kv = 2.0;
        cfg.valves.at("t02").kv = 2.0;
        const FlowState st2 = solve_state(net, cfg);
        // (2f)^2 + 3 f^2 = 3  =>  f = sqrt(3/7)
        CHECK(st2.sink_flows(net).at("t01") ==
              doctest::Approx(std::sqrt(3.0 / 7.0)).epsilon(1e-12));
        CHECK(st2.sink_flows(net).at("t01") == st2.sink_flows(net).at("t02"));
    }
}

TEST_CASE("an open frictionless tap pins its junction to sink level") {
    const Network net = two_tap_chain();

    SUBCASE("everything open: the tap swallows the whole inflow") {
        const FlowState st = solve_state(net, ValveConfiguration::all_open(net));
        CHECK(st.node_heads.at("v01") == 0.0);
        CHECK(st.sink_flows(net).at("t01") ==
              doctest::Approx(2.6457513110645907).epsilon(1e-15)); // sqrt(7)
        CHECK(st.sink_flows(net).at("t02") == 0.0);
        CHECK(st.node_heads.at("v02") == 0.0);
    }

    SUBCASE("only the far tap open") {
        const FlowState st =
            solve_state(net, ValveConfiguration::open_set(net, {"t02"}));
        CHECK(st.sink_flows(net).at("t02") ==
              doctest::Approx(1.3228756555322954).epsilon(1e-15)); // sqrt(7/4)
        CHECK(st.sink_flows(net).at("t01") == 0.0);
        CHECK(st.node_heads.at("v01") == doctest::Approx(5.25).epsilon(1e-14));
        CHECK(st.node_heads.at("v02") == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("throttling the near tap revives the far one") {
        ValveConfiguration cfg = ValveConfiguration::all_open(net);
        cfg.valves.at("t01").kv = 3.0;
        const FlowState st = solve_state(net, cfg);
        // symmetric branches of resistance 3 behind a unit trunk:
        // (2f)^2 + 3 f^2 = 7  =>  f = 1
        CHECK(st.sink_flows(net).at("t01") == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(st.sink_flows(net).at("t02") == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(st.node_heads.at("v01") == doctest::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("all valves closed gives a dead network") {
    const Network net = two_tap_chain();
    const FlowState st = solve_state(net, ValveConfiguration::all_closed(net));
    for (const double q : st.edge_flows) CHECK(q == 0.0);
    CHECK(st.root_outflow(net) == 0.0);
    // sealed pipes float up to the source head; bare taps rest at sink level
    CHECK(st.node_heads.at("v01") == 7.0);
    CHECK(st.node_heads.at("v02") == 7.0);
    CHECK(st.node_heads.at("t01") == 0.0);
}

TEST_CASE("flows scale with the driving head to the power 1/n") {
    Network net = y_network();
    const FlowState base = solve_state(net, ValveConfiguration::all_open(net));
    net.source_head = 12.0; // span x4, n = 2  =>  flows x2
    const FlowState scaled = solve_state(net, ValveConfiguration::all_open(net));
    for (size_t e = 0; e < net.edges.size(); ++e)
        CHECK(scaled.edge_flows[e] ==
              doctest::Approx(2.0 * base.edge_flows[e]).epsilon(1e-13));
}

TEST_CASE("solver rejects impossible inputs") {
    SUBCASE("source below sink level") {
        Network net = single_pipe();
        net.source_head = -1.0;
        net.demands["t01"] = 0.0; // keep the network itself valid
        try {
            solve_state(net, ValveConfiguration::all_open(net));
            FAIL("expected a driving-head error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoDrivingHead);
        }
    }
    SUBCASE("open frictionless path from the source") {
        Network net = single_pipe();
        net.edges[0].k = 0.0;
        try {
            solve_state(net, ValveConfiguration::all_open(net));
            FAIL("expected an unbounded-flow error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Unbounded);
        }
        // closed, the same network is harmless
        const FlowState st = solve_state(net, ValveConfiguration::all_closed(net));
        CHECK(st.root_outflow(net) == 0.0);
    }
    SUBCASE("configuration must cover every demand node") {
        const Network net = y_network();
        ValveConfiguration cfg = ValveConfiguration::all_open(net);
        cfg.valves.erase("t02");
        CHECK_THROWS_AS(solve_state(net, cfg), Error);
        cfg.valves["t02"] = {true, -1.0};
        CHECK_THROWS_AS(solve_state(net, cfg), Error);
    }
}

TEST_CASE("zero head span is quiescent, not an error") {
    Network net = single_pipe();
    net.source_head = 0.0;
    net.demands["t01"] = 0.0;
    const FlowState st = solve_state(net, ValveConfiguration::all_open(net));
    CHECK(st.root_outflow(net) == 0.0);
}

TEST_CASE("repeat solves are bit-identical") {
    const Network net = two_tap_chain();
    const Solver solver(net);
    ValveConfiguration cfg = ValveConfiguration::all_open(net);
    cfg.valves.at("t01").kv = 1.75;

    const FlowState a = solver.solve(cfg);
    const FlowState b = solver.solve(cfg);
    const FlowState c = Solver(net).solve(cfg); // fresh solver, same answer
    REQUIRE(a.edge_flows.size() == b.edge_flows.size());
    for (size_t e = 0; e < a.edge_flows.size(); ++e) {
        CHECK(a.edge_flows[e] == b.edge_flows[e]);
        CHECK(a.edge_flows[e] == c.edge_flows[e]);
    }
    CHECK(a.node_heads == b.node_heads);
    CHECK(a.node_heads == c.node_heads);
}

TEST_CASE("every state satisfies the balance and edge-law residuals") {
    for (const Network& net : {y_network(), two_tap_chain(), single_pipe()}) {
        const Solver solver(net);
        std::vector<ValveConfiguration> configs = {
            ValveConfiguration::all_open(net), ValveConfiguration::all_closed(net)};
        for (const auto& id : net.demand_ids()) {
            configs.push_back(ValveConfiguration::open_set(net, {id}));
            ValveConfiguration throttled = ValveConfiguration::all_open(net);
            throttled.valves.at(id).kv = 2.5;
            configs.push_back(throttled);
        }
        for (const auto& cfg : configs) {
            const StateResiduals res = state_residuals(net, solver.solve(cfg));
            CHECK(res.node_balance <= 1e-9);
            CHECK(res.edge_law <= 1e-9);
        }
    }
}

TEST_CASE("the audit hook sees solved states") {
    audit::reset();
    audit::enable();
    CHECK(audit::enabled());

    const Network net = y_network();
    const Solver solver(net);
    solver.solve(ValveConfiguration::all_open(net));
    solver.solve(ValveConfiguration::open_set(net, {"t01"}));
    solver.solve(ValveConfiguration::all_closed(net));

    const audit::Tally tally = audit::tally();
    CHECK(tally.states >= 3);
    CHECK(tally.failures == 0);
    CHECK(tally.worst_node_balance <= 1e-9);
    CHECK(tally.worst_edge_law <= 1e-9);

    audit::disable();
    solver.solve(ValveConfiguration::all_open(net));
    CHECK(audit::tally().states == tally.states); // disabled: no new records
    audit::reset();
}

TEST_CASE("subtree draw matches the solved operating point") {
    const Network net = y_network();
    const Solver solver(net);
    const ValveConfiguration open = ValveConfiguration::all_open(net);
    const FlowState st = solver.solve(open);

    // At the head the solver settled on, the fork must draw its solved inflow.
    const double h_j = st.node_heads.at("j");
    CHECK(solver.subtree_characteristic(open, "j", h_j) ==
          doctest::Approx(st.edge_flows[0]).epsilon(1e-12));
    // At the source the draw is the root outflow.
    CHECK(solver.subtree_characteristic(open, "s", 3.0) ==
          doctest::Approx(st.root_outflow(net)).epsilon(1e-12));
    // No head, no draw.
    CHECK(solver.subtree_characteristic(open, "j", 0.0) == 0.0);
    // More head, more draw.
    CHECK(solver.subtree_characteristic(open, "j", 2.0) >
          solver.subtree_characteristic(open, "j", 1.0));

    CHECK_THROWS_AS(solver.subtree_characteristic(open, "nope", 1.0), Error);
    CHECK_THROWS_AS(solver.subtree_characteristic(open, "j", -1.0), Error);

    // A pinned node refuses positive head and draws nothing at sink level.
    const Network chain = two_tap_chain();
    const Solver chain_solver(chain);
    const ValveConfiguration chain_open = ValveConfiguration::all_open(chain);
    CHECK(chain_solver.subtree_characteristic(chain_open, "v01", 0.0) == 0.0);
    CHECK_THROWS_AS(chain_solver.subtree_characteristic(chain_open, "v01", 1.0),
                    Error);
}
