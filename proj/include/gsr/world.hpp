#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gsr/actions.hpp"
#include "gsr/relations.hpp"
#include "gsr/scene_graph.hpp"

namespace gsr {

// Attribute-stable node filter for quantified goal clauses. A node matches
// when every present field agrees; relation-dependent goals ("objects on
// the table") are baked to explicit ids at task-generation time so the
// match set cannot drift as objects move.
struct NodeFilter {
    std::optional<std::string> category;
    std::optional<std::string> color;
    std::vector<std::string> ids;

    bool matches(const ObjectNode& n) const;
};

// "for all objects matching filter: predicate(x, object) holds"
struct QuantifiedClause {
    NodeFilter filter;
    Predicate predicate = Predicate::Inside;
    std::string object;
};

using GoalFact = std::variant<RelationEdge, UnaryFact>;

struct GoalSpec {
    std::string instruction;
    std::vector<RelationEdge> predicates;
    std::vector<UnaryFact> state_predicates;
    std::vector<QuantifiedClause> clauses;
};

nlohmann::ordered_json goal_to_json(const GoalSpec& goal);
GoalSpec goal_from_json(const nlohmann::json& j);

// Explicit predicates plus one atomic fact per clause-matching node, in
// deterministic order. Task Progress is the satisfied fraction of this set.
std::vector<GoalFact> expand_goal(const GoalSpec& goal, const SceneGraph& sg);

bool fact_holds(const SceneGraph& sg, const GoalFact& fact);

// True iff every explicit predicate and every quantified clause holds.
// Empty-filter clauses are vacuously true. Throws UnknownNode when the goal
// names a node absent from the graph.
bool satisfied(const SceneGraph& sg, const GoalSpec& goal);

struct Feasibility {
    enum class Kind { Ok, Blocked, UnknownTarget };
    Kind kind = Kind::Ok;
    std::string reason;

    bool ok() const { return kind == Kind::Ok; }
};

struct EngineConfig {
    ExtractionConfig extraction;
    double hover_clearance = 0.2;   // lift height of a freshly picked object
    double place_clearance = 0.01;  // lateral clearance kept when placing
};

// Symbolic feasibility of one command against a canonical graph. Never
// throws; an unknown target is its own verdict kind, distinct from Blocked.
Feasibility preconditions(const SceneGraph& sg, const ActionCommand& cmd,
                          const EngineConfig& cfg = {});

// The transition function Phi. Moves the target's geometry (an object and
// everything attached to or contained in it), updates joints, gripper and
// semantic states, then re-derives the edge set from the updated geometry,
// so the symbolic update and a fresh extract_relations agree by
// construction. Throws IllegalTransition when preconditions fail.
SceneGraph transition(const SceneGraph& sg, const ActionCommand& cmd, const EngineConfig& cfg = {});

struct StageVerdict {
    int stage = 0;
    bool pass = false;
    std::string message;
};

struct ExecutionResult {
    bool success = false;  // sigma
    SceneGraph graph;      // final (or partial, on early abort)
    std::vector<StageVerdict> log;
};

// Execution loop: unknown target returns (0, sg, empty log); an infeasible
// command returns (0, sg, [blocked verdict]); otherwise the fixed
// approach/interact/retract script runs with a per-stage verifier, aborting
// on the first failed stage.
ExecutionResult execute(const SceneGraph& sg, const ActionCommand& cmd, const EngineConfig& cfg = {});

// Node ids that move together with `id`: the node itself, its articulated
// children and, transitively, everything inside any member.
std::vector<std::string> move_set(const SceneGraph& sg, const std::string& id);

}  // namespace gsr
