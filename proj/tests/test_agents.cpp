#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "gsr/agents.hpp"
#include "gsr/bench.hpp"
#include "gsr/serialize.hpp"

using namespace gsr;

TEST_CASE("oracle picks the lexicographically first matching cube on sod-easy") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 0);
    OraclePlanner planner(t.goal);
    ActionCommand first = planner.next_action(t.initial);
    CHECK(first.verb == Verb::Pick);

    // the first matching cube by id among the unsatisfied goal facts
    std::string expected;
    for (const GoalFact& f : expand_goal(t.goal, t.initial)) {
        const RelationEdge& e = std::get<RelationEdge>(f);
        if (expected.empty() || e.subject < expected) expected = e.subject;
    }
    CHECK(first.target == expected);
}

TEST_CASE("oracle opens a lid before any pick on sas-easy") {
    TaskSpec t = generate_task(Suite::SAS, Level::Easy, 0);
    OraclePlanner planner(t.goal);
    ActionCommand first = planner.next_action(t.initial);
    CHECK(first.verb == Verb::Open);
    CHECK((first.target == "red_box_01" || first.target == "yellow_box_01"));
}

TEST_CASE("oracle emits end exactly when the goal is satisfied") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 1);
    OraclePlanner planner(t.goal);

    SceneGraph g = t.initial;
    for (int guard = 0; guard < t.step_budget; ++guard) {
        ActionCommand next = planner.next_action(g);
        if (next.verb == Verb::End) break;
        g = transition(g, next);
    }
    CHECK(satisfied(g, t.goal));
    CHECK(planner.next_action(g).verb == Verb::End);
}

TEST_CASE("oracle determinism: identical observations give identical actions") {
    TaskSpec t = generate_task(Suite::SAS, Level::General, 4);
    OraclePlanner planner(t.goal);
    ActionCommand a = planner.next_action(t.initial);
    ActionCommand b = planner.next_action(t.initial);
    CHECK(a == b);
}

TEST_CASE("oracle responses always parse to one grounded action") {
    TaskSpec t = generate_task(Suite::GCG, Level::General, 2);
    OracleAgent oracle(t.goal);
    SceneGraph g = t.initial;
    for (int step = 0; step < t.step_budget; ++step) {
        PolicyQuery q;
        q.observation = serialize(g);
        q.instruction = t.instruction;
        q.step = step;
        q.budget = t.step_budget;
        PolicyResponse resp = oracle.act(q);

        std::vector<ActionCommand> parsed = scan_commands(resp.text);
        REQUIRE(parsed.size() == 1);  // N = 1 by construction
        if (parsed[0].verb == Verb::End) break;
        CHECK(g.has_node(parsed[0].target));  // always grounded
        g = transition(g, parsed[0]);
    }
    CHECK(satisfied(g, t.goal));
}

TEST_CASE("format_prompt is byte-stable and structured") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 3);
    PolicyQuery q;
    q.observation = serialize(t.initial);
    q.instruction = t.instruction;
    q.step = 2;
    q.budget = t.step_budget;
    q.history = {{"pick cube_01", true}, {"place inside red_box_01", false}};

    std::string p1 = format_prompt(q);
    CHECK(p1 == format_prompt(q));
    CHECK(p1.find("Instruction: " + t.instruction) != std::string::npos);
    CHECK(p1.find("1. pick cube_01 -> ok") != std::string::npos);
    CHECK(p1.find("2. place inside red_box_01 -> failed") != std::string::npos);

    PolicyQuery empty = q;
    empty.history.clear();
    empty.step = 0;
    CHECK(format_prompt(empty).find("History:\n\n") != std::string::npos);
}

TEST_CASE("policy request body carries the wire schema") {
    PolicyQuery q;
    q.observation = serialize(SceneGraph{});
    q.instruction = "do the thing";
    q.history = {{"pick a_01", true}};
    q.step = 1;
    q.budget = 9;
    nlohmann::json body = nlohmann::json::parse(policy_request_body(q));
    CHECK(body["instruction"] == "do the thing");
    CHECK(body["scene_graph"].is_object());
    CHECK(body["history"][0]["command"] == "pick a_01");
    CHECK(body["history"][0]["success"] == true);
    CHECK(body["meta"]["step"] == 1);
    CHECK(body["meta"]["budget"] == 9);
    CHECK(body.contains("prompt"));
}

namespace {

struct TestServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit TestServer(httplib::Server::Handler handler) {
        server.Post("/act", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/act"; }
};

PolicyQuery tiny_query() {
    PolicyQuery q;
    q.observation = serialize(SceneGraph{});
    q.instruction = "noop";
    q.budget = 3;
    return q;
}

}  // namespace

TEST_CASE("remote agent http round trip") {
    TestServer server([](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("prompt"));
        res.set_content("{\"response_text\": \"pick cube_01\"}", "application/json");
    });
    RemoteAgent agent(server.url(), {2000, 0});
    PolicyResponse r = agent.act(tiny_query());
    CHECK_FALSE(r.transport_failure);
    CHECK(r.text == "pick cube_01");
}

TEST_CASE("remote agent reports malformed replies after retries") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.set_content("not json at all", "text/plain");
    });
    RemoteAgent agent(server.url(), {2000, 2});
    PolicyResponse r = agent.act(tiny_query());
    CHECK(r.transport_failure);
    CHECK(r.error.find("malformed") != std::string::npos);
    CHECK(calls == 3);  // first attempt + 2 retries
}

TEST_CASE("remote agent distinguishes connection failures") {
    RemoteAgent agent("http://127.0.0.1:1/act", {500, 0});
    PolicyResponse r = agent.act(tiny_query());
    CHECK(r.transport_failure);
    CHECK_FALSE(r.error.empty());
}

TEST_CASE("cmd transport round trips one request line") {
    RemoteAgent agent(
        "cmd:head -n1 | sed 's/.*/{\"response_text\": \"end\"}/'", {4000, 0});
    PolicyResponse r = agent.act(tiny_query());
    CHECK_FALSE(r.transport_failure);
    CHECK(r.text == "end");
}

TEST_CASE("cmd transport maps silence to a transport failure") {
    RemoteAgent agent("cmd:cat >/dev/null", {300, 1});
    PolicyResponse r = agent.act(tiny_query());
    CHECK(r.transport_failure);
}

TEST_CASE("cmd transport survives an agent that exits instantly") {
    // the child never reads stdin; the write side must not kill the process
    RemoteAgent agent("cmd:true", {300, 0});
    PolicyResponse r = agent.act(tiny_query());
    CHECK(r.transport_failure);
}
