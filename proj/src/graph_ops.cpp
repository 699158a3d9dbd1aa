#include "gsr/graph_ops.hpp"

#include <algorithm>

#include "gsr/errors.hpp"

namespace gsr {

namespace {

ObjectNode stub_node(const std::string& id) {
    ObjectNode n;
    n.id = id;
    n.category = category_of_id(id);
    n.aabb = Aabb::centered({0, 0, 0}, {0.05, 0.05, 0.05});
    n.attributes["stub"] = "true";
    return n;
}

void resolve_state_conflicts(ObjectNode& n) {
    for (const char* raw : {"open", "on", "empty", "folded"}) {
        std::string tag = raw;
        std::string other = opposite_state(tag);
        if (!n.states.count(tag) || !n.states.count(other)) continue;
        if (tag == "open" && n.articulation) {
            n.states.erase(n.articulation->is_open() ? other : tag);
        } else {
            n.states.erase(std::max(tag, other));
        }
    }
}

}  // namespace

SceneGraph normalize(const SceneGraph& sg) {
    SceneGraph out;
    out.nodes = sg.nodes;
    out.robot = sg.robot;

    // Synthesize nodes for dangling endpoints, then re-admit edges.
    for (const RelationEdge& e : sg.edges) {
        if (e.subject != kRobotId && !out.has_node(e.subject)) out.add_node(stub_node(e.subject));
        if (!out.has_node(e.object)) out.add_node(stub_node(e.object));
    }

    std::string held;
    for (RelationEdge e : sg.edges) {
        if (e.subject == e.object) continue;
        if (e.predicate == Predicate::Holding) {
            if (held.empty() || e.object < held) held = e.object;
            continue;
        }
        if (e.predicate == Predicate::Beside && e.object < e.subject) std::swap(e.subject, e.object);
        // A contradictory reversed twin collapses onto the lexicographically
        // first of the pair.
        RelationEdge reversed{e.object, e.predicate, e.subject};
        if (e.predicate != Predicate::Beside && sg.edges.count(reversed) && reversed < e) continue;
        out.edges.insert(e);
    }

    if (!held.empty()) {
        out.edges.insert(edge(kRobotId, Predicate::Holding, held));
        out.robot.held_object = held;
        if (!out.robot.grasping())
            out.robot.gripper_value = out.robot.gripper_threshold + 0.5;
    } else {
        out.robot.held_object.reset();
    }

    for (auto& [id, node] : out.nodes) resolve_state_conflicts(node);
    return out;
}

EdgeDelta diff(const SceneGraph& before, const SceneGraph& after) {
    EdgeDelta d;
    for (const RelationEdge& e : after.edges)
        if (!before.edges.count(e)) d.added_edges.insert(e);
    for (const RelationEdge& e : before.edges)
        if (!after.edges.count(e)) d.removed_edges.insert(e);

    std::vector<UnaryFact> fb = before.unary_facts();
    std::vector<UnaryFact> fa = after.unary_facts();
    std::set<UnaryFact> sb(fb.begin(), fb.end());
    std::set<UnaryFact> sa(fa.begin(), fa.end());
    for (const UnaryFact& f : sa)
        if (!sb.count(f)) d.added_states.insert(f);
    for (const UnaryFact& f : sb)
        if (!sa.count(f)) d.removed_states.insert(f);
    return d;
}

SceneGraph apply_delta(const SceneGraph& sg, const EdgeDelta& delta) {
    SceneGraph out = sg;

    for (const RelationEdge& e : delta.removed_edges) {
        if (!out.edges.erase(e))
            throw DeltaMismatch("removed edge absent: " + e.subject + " " +
                                predicate_name(e.predicate) + " " + e.object);
    }
    for (const UnaryFact& f : delta.removed_states) {
        auto it = out.nodes.find(f.node);
        if (it == out.nodes.end() || !it->second.states.erase(f.state))
            throw DeltaMismatch("removed state absent: (" + f.node + ", " + f.state + ")");
    }
    for (const RelationEdge& e : delta.added_edges) {
        if (e.subject != kRobotId && !out.has_node(e.subject)) throw UnknownNode(e.subject);
        if (!out.has_node(e.object)) throw UnknownNode(e.object);
        out.edges.insert(e);
    }
    for (const UnaryFact& f : delta.added_states) {
        auto it = out.nodes.find(f.node);
        if (it == out.nodes.end()) throw UnknownNode(f.node);
        it->second.states.insert(f.state);
    }

    out.robot.held_object.reset();
    for (const RelationEdge& e : out.edges) {
        if (e.predicate == Predicate::Holding) {
            out.robot.held_object = e.object;
            if (!out.robot.grasping())
                out.robot.gripper_value = out.robot.gripper_threshold + 0.5;
        }
    }
    if (!out.robot.held_object) out.robot.gripper_value = 0.0;
    return out;
}

}  // namespace gsr
