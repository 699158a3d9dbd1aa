#include <doctest.h>

#include "gsr/bench.hpp"
#include "gsr/graph_ops.hpp"
#include "gsr/serialize.hpp"

using namespace gsr;

TEST_CASE("task generation is deterministic byte-for-byte") {
    for (Suite s : {Suite::SOD, Suite::SAS, Suite::GCG}) {
        for (Level l : {Level::Easy, Level::General, Level::Complex}) {
            TaskSpec a = generate_task(s, l, 7);
            TaskSpec b = generate_task(s, l, 7);
            CHECK(task_to_json(a).dump() == task_to_json(b).dump());
            TaskSpec c = generate_task(s, l, 8);
            CHECK(task_to_json(a).dump() != task_to_json(c).dump());
        }
    }
}

TEST_CASE("sod scenes have one box and the documented distractor counts") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 7);
    int boxes = 0, cubes = 0;
    std::string box_color;
    for (const auto& [id, node] : t.initial.nodes) {
        if (node.category.find("_box") != std::string::npos) {
            ++boxes;
            box_color = node.attribute("color");
        }
        if (node.category == "cube") ++cubes;
    }
    CHECK(boxes == 1);
    CHECK(cubes >= 7);
    CHECK(cubes <= 10);
    REQUIRE(t.goal.clauses.size() == 1);
    CHECK(t.goal.clauses[0].filter.color == box_color);
    CHECK(t.instruction ==
          "Pick up all cubes that have the same color as the box and put them inside the box.");

    // at least one matching cube: the goal is never vacuous
    CHECK_FALSE(expand_goal(t.goal, t.initial).empty());

    TaskSpec g = generate_task(Suite::SOD, Level::General, 3);
    int mugs = 0;
    cubes = 0;
    for (const auto& [id, node] : g.initial.nodes) {
        if (node.category == "cube") ++cubes;
        if (node.category == "mug") ++mugs;
    }
    CHECK(cubes + mugs >= 9);
    CHECK(cubes + mugs <= 12);
    CHECK(mugs >= 2);

    TaskSpec c = generate_task(Suite::SOD, Level::Complex, 3);
    CHECK(c.initial.nodes.size() >= g.initial.nodes.size());
}

TEST_CASE("sas-general stacks with red at the bottom") {
    for (uint64_t seed : {0ULL, 3ULL, 11ULL}) {
        TaskSpec t = generate_task(Suite::SAS, Level::General, seed);
        CHECK(t.initial.has_node("red_box_01"));
        bool something_on_red = false;
        for (const auto& e : t.initial.edges)
            if (e.predicate == Predicate::Ontop && e.object == "red_box_01") something_on_red = true;
        CHECK(something_on_red);
        // red is on the table, never on another box
        CHECK(t.initial.has_edge("red_box_01", Predicate::Ontop, "table_01"));
        CHECK(t.instruction == "Move all objects on the table into the red box.");
    }
}

TEST_CASE("sas-easy starts with both boxes closed and contents in the yellow box") {
    TaskSpec t = generate_task(Suite::SAS, Level::Easy, 5);
    CHECK(t.initial.has_state("red_box_01", "closed"));
    CHECK(t.initial.has_state("yellow_box_01", "closed"));
    REQUIRE(!t.goal.predicates.empty());
    CHECK(t.goal.predicates.size() >= 5);
    CHECK(t.goal.predicates.size() <= 8);
    for (const RelationEdge& e : t.goal.predicates) {
        CHECK(e.object == "red_box_01");
        CHECK(t.initial.has_edge(e.subject, Predicate::Inside, "yellow_box_01"));
    }
}

TEST_CASE("sas-complex opens the top drawer and targets the middle one") {
    TaskSpec t = generate_task(Suite::SAS, Level::Complex, 2);
    CHECK(t.initial.has_state("drawer_01", "open"));
    CHECK(t.initial.has_state("drawer_02", "closed"));
    for (const RelationEdge& e : t.goal.predicates) CHECK(e.object == "drawer_02");
    CHECK(t.instruction == "Transfer all objects from the box into the middle drawer.");
}

TEST_CASE("gcg keeps a constant layout and level-specific goals") {
    TaskSpec easy = generate_task(Suite::GCG, Level::Easy, 4);
    CHECK(easy.instruction ==
          "Place the milk, the popcorn, and the book into different drawer layers of the cabinet.");
    REQUIRE(easy.goal.predicates.size() == 3);
    std::set<std::string> drawers;
    for (const RelationEdge& e : easy.goal.predicates) drawers.insert(e.object);
    CHECK(drawers.size() == 3);  // three different layers

    TaskSpec gen = generate_task(Suite::GCG, Level::General, 4);
    CHECK(gen.instruction == "Sort all cubes and mugs into the boxes of their corresponding colors.");
    CHECK(gen.goal.clauses.size() == 6);

    TaskSpec cx = generate_task(Suite::GCG, Level::Complex, 4);
    CHECK(cx.instruction ==
          "Store the cubes and mugs into different drawer layers based on their colors.");
    for (const auto& [id, node] : cx.initial.nodes) {
        if (node.category == "cube" || node.category == "mug") {
            std::string color = node.attribute("color");
            CHECK((color == "red" || color == "yellow" || color == "blue"));
        }
    }
}

TEST_CASE("task progress counts satisfied atomic facts") {
    TaskSpec t = generate_task(Suite::SAS, Level::Easy, 1);
    size_t total = t.goal.predicates.size();
    REQUIRE(total > 0);
    CHECK(task_progress(t.initial, t.goal) == 0.0);

    // satisfy two facts symbolically
    SceneGraph g = t.initial;
    EdgeDelta d;
    d.added_edges.insert(t.goal.predicates[0]);
    d.removed_edges.insert(edge(t.goal.predicates[0].subject, Predicate::Inside, "yellow_box_01"));
    g = apply_delta(g, d);
    CHECK(task_progress(g, t.goal) == doctest::Approx(1.0 / static_cast<double>(total)));

    GoalSpec empty;
    CHECK(task_progress(t.initial, empty) == 1.0);
}

TEST_CASE("perturb modifies exactly the ceiling count of spatial edges") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 3);
    size_t spatial = 0;
    for (const RelationEdge& e : t.initial.edges)
        if (e.predicate != Predicate::Holding) ++spatial;
    REQUIRE(spatial >= 8);

    Rng rng(42);
    SceneGraph same = perturb(t.initial, 0.0, rng);
    CHECK(same == t.initial);

    // ratio 0.10 over n edges: ceil(0.1 n) edges differ
    for (int trial = 0; trial < 20; ++trial) {
        SceneGraph noisy = perturb(t.initial, 0.10, rng);
        EdgeDelta d = diff(t.initial, noisy);
        size_t expected = static_cast<size_t>(std::ceil(0.10 * static_cast<double>(spatial)));
        CHECK(d.removed_edges.size() == expected);
        CHECK(d.added_edges.size() <= expected);
        for (const RelationEdge& e : d.removed_edges) CHECK(e.predicate != Predicate::Holding);
        CHECK(d.added_states.empty());
        CHECK(d.removed_states.empty());
    }
}

TEST_CASE("direction-reversal flip swaps endpoints") {
    SceneGraph sg;
    ObjectNode a, b;
    a.id = "cube_01";
    a.category = "cube";
    a.aabb = Aabb::centered({0, 0, 0.5}, {0.05, 0.05, 0.05});
    b.id = "box_01";
    b.category = "box";
    b.aabb = Aabb::centered({0, 0, 0.2}, {0.3, 0.3, 0.3});
    sg.add_node(a);
    sg.add_node(b);
    sg.edges.insert(edge("cube_01", Predicate::Ontop, "box_01"));

    Rng rng(3);
    int reversed = 0, dropped = 0;
    for (int t = 0; t < 40; ++t) {
        SceneGraph noisy = perturb(sg, 1.0, rng, FlipMode::DirectionReversal);
        if (noisy.has_edge("box_01", Predicate::Ontop, "cube_01")) ++reversed;
        else if (noisy.edges.empty()) ++dropped;
    }
    CHECK(reversed > 0);
    CHECK(dropped > 0);
    CHECK(reversed + dropped == 40);
}

TEST_CASE("suite and level names parse with aliases") {
    CHECK(suite_from_name("SOD") == Suite::SOD);
    CHECK(suite_from_name("gcg") == Suite::GCG);
    CHECK_FALSE(suite_from_name("xyz").has_value());
    CHECK(level_from_name("simple") == Level::Easy);
    CHECK(level_from_name("medium") == Level::General);
    CHECK(level_from_name("hard") == Level::Complex);
    CHECK(level_from_name("difficult") == Level::Complex);
    CHECK_FALSE(level_from_name("ultra").has_value());
}

TEST_CASE("perturb never touches holding edges or unary states") {
    TaskSpec t = generate_task(Suite::SAS, Level::Easy, 9);
    SceneGraph g = transition(t.initial, command(Verb::Open, "yellow_box_01"));
    // pick something so a holding edge exists
    std::string subject = t.goal.predicates[0].subject;
    g = transition(g, command(Verb::Pick, subject));
    REQUIRE(g.robot.held_object == subject);

    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        SceneGraph noisy = perturb(g, 1.0, rng);
        CHECK(noisy.has_edge(kRobotId, Predicate::Holding, subject));
        CHECK(noisy.unary_facts() == g.unary_facts());
        CHECK_NOTHROW(validate(noisy));
    }
}

TEST_CASE("episode loop: scripted agents, termination reasons") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 2);
    Rng rng(1);

    // immediate end on an unsatisfied goal
    ScriptedAgent quitter({"end"});
    EpisodeResult r = run_episode(t, quitter, rng);
    CHECK_FALSE(r.success);
    CHECK(r.termination == Termination::AgentEnd);
    CHECK(r.steps_used == 1);
    CHECK(r.progress == task_progress(t.initial, t.goal));

    // gibberish consumes the whole budget without executing anything
    ScriptedAgent babbler({"the weather is nice"});
    r = run_episode(t, babbler, rng);
    CHECK(r.termination == Termination::BudgetExhausted);
    CHECK(r.steps_used == t.step_budget);
    CHECK(r.progress == task_progress(t.initial, t.goal));
    for (const StepRecord& s : r.steps) CHECK_FALSE(s.parsed);
}

TEST_CASE("oracle completes sod-easy and records a consistent trajectory") {
    TaskSpec t = generate_task(Suite::SOD, Level::Easy, 0);
    OracleAgent oracle(t.goal);
    Rng rng(3);
    EpisodeOptions opts;
    opts.record_trajectory = true;
    EpisodeResult r = run_episode(t, oracle, rng, opts);
    CHECK(r.success);
    CHECK(r.progress == 1.0);
    CHECK(r.termination == Termination::AgentEnd);
    CHECK(r.steps_used <= t.step_budget);

    REQUIRE(r.trajectory.has_value());
    const Trajectory& traj = *r.trajectory;
    REQUIRE(traj.steps.size() >= 2);
    CHECK(traj.steps.back().action.verb == Verb::End);
    for (size_t i = 0; i + 1 < traj.steps.size(); ++i) {
        SceneGraph next = transition(traj.steps[i].graph, traj.steps[i].action);
        CHECK(relationally_equal(next, traj.steps[i + 1].graph));
    }
    CHECK(relationally_equal(transition(traj.steps.back().graph, traj.steps.back().action),
                             traj.final_graph));
}

TEST_CASE("noise touches observations only, never the true trajectory") {
    TaskSpec t = generate_task(Suite::SAS, Level::Easy, 3);
    std::vector<std::string> script = {"open yellow_box_01", "open red_box_01"};
    script.push_back("pick " + t.goal.predicates[0].subject);
    script.push_back("place inside red_box_01");
    script.push_back("end");

    EpisodeResult clean, noisy;
    {
        ScriptedAgent agent(script);
        Rng rng(77);
        clean = run_episode(t, agent, rng);
    }
    {
        ScriptedAgent agent(script);
        Rng rng(12345);
        EpisodeOptions opts;
        opts.noise_ratio = 0.3;
        noisy = run_episode(t, agent, rng, opts);
    }
    REQUIRE(clean.steps.size() == noisy.steps.size());
    CHECK(clean.progress == noisy.progress);
    CHECK(clean.success == noisy.success);
    for (size_t i = 0; i < clean.steps.size(); ++i) {
        CHECK(clean.steps[i].cmd == noisy.steps[i].cmd);
        CHECK(clean.steps[i].exec.success == noisy.steps[i].exec.success);
        CHECK(clean.steps[i].exec.graph == noisy.steps[i].exec.graph);
    }
}

TEST_CASE("generate_validated_task proves solvability at generation time") {
    TaskSpec t = generate_validated_task(Suite::SAS, Level::Complex, 1);
    CHECK(t.step_budget > 0);
    CHECK(task_to_json(t).dump() == task_to_json(generate_task(Suite::SAS, Level::Complex, 1)).dump());
}

TEST_CASE("the oracle solves one task per cell within budget") {
    for (Suite s : {Suite::SOD, Suite::SAS, Suite::GCG}) {
        for (Level l : {Level::Easy, Level::General, Level::Complex}) {
            CAPTURE(suite_name(s));
            CAPTURE(level_name(l));
            TaskSpec t = generate_task(s, l, 0);
            OracleAgent oracle(t.goal);
            Rng rng(5);
            EpisodeResult r = run_episode(t, oracle, rng);
            CHECK(r.success);
            CHECK(r.progress == 1.0);
        }
    }
}
