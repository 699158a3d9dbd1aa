#include <doctest.h>

#include "gsr/assets.hpp"
#include "gsr/errors.hpp"
#include "gsr/relations.hpp"
#include "gsr/world.hpp"
#include "scene_sampler.hpp"

using namespace gsr;

namespace {

const AssetSpec& colored_cube(const std::string& color) {
    for (const AssetSpec& a : asset_catalog())
        if (a.category == "cube" && a.color == color) return a;
    throw Error("no such cube");
}

// table + open red box + closed yellow box with a cube inside + loose cube
// + mug stacked on that cube + a three-drawer cabinet (top open)
SceneGraph fixture_scene() {
    std::vector<ObjectNode> objs;
    objs.push_back(make_table("table_01"));
    objs.push_back(make_lidded_box(*find_asset("red_box"), "red_box_01", -0.06, 0.40, 0.76, true));
    objs.push_back(make_lidded_box(*find_asset("yellow_box"), "yellow_box_01", 0.34, 0.40, 0.76, false));
    objs.push_back(make_object(colored_cube("green"), "cube_01", 0.34, 0.40, 0.78));  // in yellow box
    objs.push_back(make_object(colored_cube("red"), "cube_02", -0.24, -0.18, 0.76));
    objs.push_back(make_object(*find_asset("mug"), "mug_01", -0.24, -0.18, 0.805));  // on cube_02
    std::vector<ObjectNode> cab = make_cabinet(*find_asset("cabinet"), "cabinet_01", 1, -0.50, 0.40,
                                               0.76, /*top_drawer_open=*/true);
    objs.insert(objs.end(), cab.begin(), cab.end());
    return extract_relations(objs, {});
}

}  // namespace

TEST_CASE("fixture wiring sanity") {
    SceneGraph sg = fixture_scene();
    CHECK(sg.has_edge("cube_01", Predicate::Inside, "yellow_box_01"));
    CHECK(sg.has_edge("mug_01", Predicate::Ontop, "cube_02"));
    CHECK(sg.has_state("yellow_box_01", "closed"));
    CHECK(sg.has_state("red_box_01", "open"));
    CHECK(sg.has_state("drawer_01", "open"));
    CHECK(sg.has_state("drawer_02", "closed"));
}

TEST_CASE("pick preconditions: closed container, occlusion, unknown node") {
    SceneGraph sg = fixture_scene();

    Feasibility f = preconditions(sg, command(Verb::Pick, "cube_01"));
    CHECK(f.kind == Feasibility::Kind::Blocked);
    CHECK(f.reason.find("closed container") != std::string::npos);

    f = preconditions(sg, command(Verb::Pick, "cube_02"));
    CHECK(f.kind == Feasibility::Kind::Blocked);
    CHECK(f.reason == "occluded by mug_01");

    f = preconditions(sg, command(Verb::Pick, "ghost_99"));
    CHECK(f.kind == Feasibility::Kind::UnknownTarget);

    CHECK(preconditions(sg, command(Verb::End)).ok());
    CHECK(preconditions(sg, command(Verb::Pick, "mug_01")).ok());
}

TEST_CASE("drawer access is gated by the open drawer above") {
    SceneGraph sg = fixture_scene();

    Feasibility f = preconditions(sg, command(Verb::Open, "drawer_02"));
    CHECK(f.kind == Feasibility::Kind::Blocked);
    CHECK(f.reason.find("drawer_01") != std::string::npos);

    CHECK(preconditions(sg, command(Verb::Close, "drawer_01")).ok());
    CHECK(preconditions(sg, command(Verb::Push, "drawer_01")).ok());

    SceneGraph closed = transition(sg, command(Verb::Push, "drawer_01"));
    CHECK(closed.has_state("drawer_01", "closed"));
    CHECK(preconditions(closed, command(Verb::Open, "drawer_02")).ok());
}

TEST_CASE("pick removes support edges and adds holding") {
    SceneGraph sg = fixture_scene();
    SceneGraph out = transition(sg, command(Verb::Pick, "mug_01"));
    CHECK(out.has_edge(kRobotId, Predicate::Holding, "mug_01"));
    CHECK(out.robot.held_object == "mug_01");
    CHECK_FALSE(out.has_edge("mug_01", Predicate::Ontop, "cube_02"));
    for (const RelationEdge& e : out.edges)
        if (e.predicate != Predicate::Holding) CHECK(e.subject != "mug_01");
}

TEST_CASE("place_inside an open box creates the inside edge and empties the gripper") {
    SceneGraph sg = fixture_scene();
    SceneGraph held = transition(sg, command(Verb::Pick, "mug_01"));
    SceneGraph out = transition(held, command(Verb::PlaceInside, "red_box_01"));
    CHECK(out.has_edge("mug_01", Predicate::Inside, "red_box_01"));
    CHECK_FALSE(out.robot.held_object.has_value());
    CHECK_FALSE(out.robot.grasping());
}

TEST_CASE("place_inside a closed destination is blocked") {
    SceneGraph sg = fixture_scene();
    SceneGraph held = transition(sg, command(Verb::Pick, "mug_01"));
    Feasibility f = preconditions(held, command(Verb::PlaceInside, "yellow_box_01"));
    CHECK(f.kind == Feasibility::Kind::Blocked);
    CHECK(f.reason.find("closed") != std::string::npos);
    CHECK_THROWS_AS(transition(held, command(Verb::PlaceInside, "yellow_box_01")), IllegalTransition);
}

TEST_CASE("open and close flip the joint and state reversibly") {
    SceneGraph sg = fixture_scene();
    SceneGraph opened = transition(sg, command(Verb::Open, "yellow_box_01"));
    CHECK(opened.has_state("yellow_box_01", "open"));
    CHECK(opened.find("yellow_box_01")->articulation->joint_value >
          opened.find("yellow_box_01")->articulation->open_threshold);

    SceneGraph closed = transition(opened, command(Verb::Close, "yellow_box_01"));
    CHECK(closed.has_state("yellow_box_01", "closed"));
    CHECK(relationally_equal(closed, sg));
}

TEST_CASE("stacked lids block open until the stack is cleared") {
    std::vector<ObjectNode> objs;
    objs.push_back(make_table("table_01"));
    objs.push_back(make_lidded_box(*find_asset("red_box"), "red_box_01", 0.14, 0.40, 0.76, false));
    objs.push_back(make_lidded_box(*find_asset("yellow_box"), "yellow_box_01", 0.14, 0.40, 0.96, false));
    SceneGraph sg = extract_relations(objs, {});
    REQUIRE(sg.has_edge("yellow_box_01", Predicate::Ontop, "red_box_01"));

    Feasibility f = preconditions(sg, command(Verb::Open, "red_box_01"));
    CHECK(f.kind == Feasibility::Kind::Blocked);
    CHECK(f.reason == "occluded by yellow_box_01");

    SceneGraph lifted = transition(sg, command(Verb::Pick, "yellow_box_01"));
    SceneGraph parked = transition(lifted, command(Verb::PlaceOn, "table_01"));
    CHECK(parked.has_edge("yellow_box_01", Predicate::Ontop, "table_01"));
    CHECK(preconditions(parked, command(Verb::Open, "red_box_01")).ok());
}

TEST_CASE("place_on after pick restores the original support edge") {
    SceneGraph sg = fixture_scene();
    REQUIRE(sg.has_edge("mug_01", Predicate::Ontop, "cube_02"));
    SceneGraph lifted = transition(sg, command(Verb::Pick, "mug_01"));
    SceneGraph restored = transition(lifted, command(Verb::PlaceOn, "cube_02"));
    CHECK(restored.has_edge("mug_01", Predicate::Ontop, "cube_02"));
    CHECK(relationally_equal(restored, sg));
}

TEST_CASE("turn_on and turn_off flip the semantic state") {
    std::vector<ObjectNode> objs;
    objs.push_back(make_table("table_01"));
    objs.push_back(make_object(*find_asset("lamp"), "lamp_01", 0.0, -0.18, 0.76));
    SceneGraph sg = extract_relations(objs, {});
    REQUIRE(sg.has_state("lamp_01", "off"));

    SceneGraph on = transition(sg, command(Verb::TurnOn, "lamp_01"));
    CHECK(on.has_state("lamp_01", "on"));
    CHECK_FALSE(on.has_state("lamp_01", "off"));
    CHECK(preconditions(on, command(Verb::TurnOn, "lamp_01")).kind == Feasibility::Kind::Blocked);

    // a cube has no switch
    SceneGraph fx = fixture_scene();
    CHECK(preconditions(fx, command(Verb::TurnOn, "cube_02")).kind == Feasibility::Kind::Blocked);
}

TEST_CASE("end is the identity transition") {
    SceneGraph sg = fixture_scene();
    CHECK(transition(sg, command(Verb::End)) == sg);
}

TEST_CASE("transition output stays geometrically consistent") {
    SceneGraph sg = fixture_scene();
    const char* scripts[][3] = {
        {"pick mug_01", "place inside red_box_01", "open yellow_box_01"},
        {"push drawer_01", "open drawer_02", "pick mug_01"},
    };
    for (auto& script : scripts) {
        SceneGraph g = sg;
        for (const char* line : script) {
            auto cmd = parse_command(line);
            REQUIRE(cmd.has_value());
            g = transition(g, *cmd);
            std::vector<ObjectNode> objs;
            for (const auto& [id, node] : g.nodes) objs.push_back(node);
            SceneGraph re = extract_relations(objs, g.robot);
            CHECK(re.edges == g.edges);
            CHECK(re.unary_facts() == g.unary_facts());
            CHECK_NOTHROW(validate(g));
        }
    }
}

TEST_CASE("frame property: unrelated facts survive a transition") {
    SceneGraph sg = fixture_scene();
    SceneGraph out = transition(sg, command(Verb::Pick, "mug_01"));
    std::vector<std::string> moved = move_set(sg, "mug_01");
    for (const RelationEdge& e : sg.edges) {
        bool touches_moved = false;
        for (const std::string& m : moved) touches_moved |= e.subject == m || e.object == m;
        if (!touches_moved) CHECK(out.has_edge(e));
    }
}

TEST_CASE("execute mirrors the staged loop") {
    SceneGraph sg = fixture_scene();

    ExecutionResult ok = execute(sg, command(Verb::Pick, "mug_01"));
    CHECK(ok.success);
    REQUIRE(ok.log.size() == 3);
    CHECK(ok.log[0].stage == 1);
    CHECK(ok.log[2].stage == 3);
    for (const StageVerdict& v : ok.log) CHECK(v.pass);
    CHECK(ok.graph == transition(sg, command(Verb::Pick, "mug_01")));

    ExecutionResult blocked = execute(sg, command(Verb::Pick, "cube_01"));
    CHECK_FALSE(blocked.success);
    REQUIRE(blocked.log.size() == 1);
    CHECK_FALSE(blocked.log[0].pass);
    CHECK(blocked.graph == sg);

    ExecutionResult unknown = execute(sg, command(Verb::Pick, "ghost_99"));
    CHECK_FALSE(unknown.success);
    CHECK(unknown.log.empty());
    CHECK(unknown.graph == sg);
}

TEST_CASE("satisfied: membership, quantified clauses, vacuous truth, unknown nodes") {
    SceneGraph sg = fixture_scene();

    GoalSpec by_edge;
    by_edge.predicates.push_back(edge("cube_01", Predicate::Inside, "yellow_box_01"));
    CHECK(satisfied(sg, by_edge));

    GoalSpec red_cubes;
    QuantifiedClause c;
    c.filter.category = "cube";
    c.filter.color = "red";
    c.predicate = Predicate::Inside;
    c.object = "red_box_01";
    red_cubes.clauses.push_back(c);
    CHECK_FALSE(satisfied(sg, red_cubes));  // cube_02 is red and still on the table

    GoalSpec vacuous = red_cubes;
    vacuous.clauses[0].filter.color = "purple";
    CHECK(satisfied(sg, vacuous));

    GoalSpec ghost;
    ghost.predicates.push_back(edge("ghost_99", Predicate::Inside, "red_box_01"));
    CHECK_THROWS_AS(satisfied(sg, ghost), UnknownNode);
}

TEST_CASE("unary goal facts are checked") {
    SceneGraph sg = fixture_scene();
    GoalSpec g;
    g.state_predicates.push_back({"yellow_box_01", "open"});
    CHECK_FALSE(satisfied(sg, g));
    SceneGraph opened = transition(sg, command(Verb::Open, "yellow_box_01"));
    CHECK(satisfied(opened, g));
}
