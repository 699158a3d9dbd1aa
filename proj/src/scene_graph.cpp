#include "gsr/scene_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "gsr/errors.hpp"

namespace gsr {

const char* predicate_name(Predicate p) {
    switch (p) {
        case Predicate::Ontop: return "ontop";
        case Predicate::Inside: return "inside";
        case Predicate::Beside: return "beside";
        case Predicate::Holding: return "holding";
    }
    return "?";
}

std::optional<PredicateToken> predicate_from_token(const std::string& raw) {
    std::string t;
    t.reserve(raw.size());
    for (char c : raw) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    if (t == "ontop" || t == "on_top" || t == "on" || t == "up" || t == "stack")
        return PredicateToken{Predicate::Ontop, false};
    if (t == "under") return PredicateToken{Predicate::Ontop, true};
    if (t == "inside" || t == "in") return PredicateToken{Predicate::Inside, false};
    if (t == "contains") return PredicateToken{Predicate::Inside, true};
    if (t == "beside" || t == "adjacent" || t == "near") return PredicateToken{Predicate::Beside, false};
    if (t == "holding") return PredicateToken{Predicate::Holding, false};
    return std::nullopt;
}

namespace {
const char* kStates[] = {"open", "closed", "on", "off", "empty", "full", "folded", "unfolded"};
}

bool is_unary_state(const std::string& tag) {
    for (const char* s : kStates)
        if (tag == s) return true;
    return false;
}

std::string opposite_state(const std::string& tag) {
    if (tag == "open") return "closed";
    if (tag == "closed") return "open";
    if (tag == "on") return "off";
    if (tag == "off") return "on";
    if (tag == "empty") return "full";
    if (tag == "full") return "empty";
    if (tag == "folded") return "unfolded";
    if (tag == "unfolded") return "folded";
    return {};
}

bool valid_node_id(const std::string& id) {
    if (id.size() < 4) return false;
    size_t us = id.rfind('_');
    if (us == std::string::npos || us == 0 || us + 3 != id.size()) return false;
    if (!std::isdigit(static_cast<unsigned char>(id[us + 1])) ||
        !std::isdigit(static_cast<unsigned char>(id[us + 2])))
        return false;
    for (size_t i = 0; i < us; ++i) {
        char c = id[i];
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    }
    return true;
}

std::string category_of_id(const std::string& id) {
    size_t us = id.rfind('_');
    if (us == std::string::npos || us == 0) return id;
    for (size_t i = us + 1; i < id.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) return id;
    return id.substr(0, us);
}

std::vector<UnaryFact> SceneGraph::unary_facts() const {
    std::vector<UnaryFact> out;
    for (const auto& [id, node] : nodes)
        for (const std::string& s : node.states) out.push_back(UnaryFact{id, s});
    return out;
}

std::vector<RelationEdge> SceneGraph::edges_incident(const std::string& id) const {
    std::vector<RelationEdge> out;
    for (const RelationEdge& e : edges)
        if (e.subject == id || e.object == id) out.push_back(e);
    return out;
}

std::string SceneGraph::parent_of(const std::string& id) const {
    for (const auto& [pid, node] : nodes)
        for (const std::string& c : node.children)
            if (c == id) return pid;
    return {};
}

void SceneGraph::add_node(ObjectNode node) {
    std::string id = node.id;
    nodes.emplace(std::move(id), std::move(node));
}

namespace {

void validate_node(const SceneGraph& sg, const ObjectNode& n) {
    if (!valid_node_id(n.id)) throw Error("node id does not match <category>_<NN>: " + n.id);
    if (!n.aabb.valid()) throw Error("aabb min > max on node " + n.id);
    if (std::abs(n.pose.orientation.norm() - 1.0) > 1e-6)
        throw Error("orientation quaternion not unit on node " + n.id);
    for (const char* group : {"open", "on", "empty", "folded"}) {
        if (n.states.count(group) && n.states.count(opposite_state(group)))
            throw Error("conflicting unary states on node " + n.id);
    }
    if (n.articulation) {
        const Articulation& a = *n.articulation;
        if (!(a.joint_min <= a.joint_value && a.joint_value <= a.joint_max))
            throw Error("joint value outside [min, max] on node " + n.id);
    }
    std::set<std::string> kp_names;
    for (const Keypoint& kp : n.keypoints)
        if (!kp_names.insert(kp.name).second)
            throw Error("duplicate keypoint name '" + kp.name + "' on node " + n.id);
    for (const std::string& c : n.children) {
        if (!sg.has_node(c)) throw UnknownNode(c);
        if (c == n.id) throw Error("node " + n.id + " lists itself as a child");
    }
}

void check_child_cycles(const SceneGraph& sg) {
    // children links must form a forest
    for (const auto& [id, node] : sg.nodes) {
        std::set<std::string> seen{id};
        std::vector<std::string> frontier = node.children;
        while (!frontier.empty()) {
            std::string cur = frontier.back();
            frontier.pop_back();
            if (!seen.insert(cur).second) throw Error("child cycle through node " + cur);
            const ObjectNode* c = sg.find(cur);
            if (c != nullptr)
                frontier.insert(frontier.end(), c->children.begin(), c->children.end());
        }
    }
}

}  // namespace

void validate(const SceneGraph& sg) {
    for (const auto& [id, node] : sg.nodes) {
        if (id != node.id) throw Error("node map key differs from node id: " + id);
        validate_node(sg, node);
    }
    check_child_cycles(sg);

    int holding_count = 0;
    std::string held;
    for (const RelationEdge& e : sg.edges) {
        if (e.subject == e.object) throw Error("self-loop edge on " + e.subject);
        if (e.predicate == Predicate::Holding) {
            if (e.subject != kRobotId) throw Error("holding edge subject must be 'robot'");
            ++holding_count;
            held = e.object;
        } else if (e.subject == kRobotId) {
            throw Error("'robot' may only appear as the holding-edge subject");
        }
        if (e.subject != kRobotId && !sg.has_node(e.subject)) throw UnknownNode(e.subject);
        if (!sg.has_node(e.object)) throw UnknownNode(e.object);
    }
    if (holding_count > 1) throw Error("more than one holding edge");
    if (holding_count == 1) {
        if (!sg.robot.held_object || *sg.robot.held_object != held)
            throw Error("held_object does not match the holding edge");
    } else if (sg.robot.held_object) {
        throw Error("held_object set without a holding edge");
    }
}

bool relationally_equal(const SceneGraph& a, const SceneGraph& b) {
    return a.edges == b.edges && a.unary_facts() == b.unary_facts() &&
           a.robot.held_object == b.robot.held_object;
}

std::string relational_key(const SceneGraph& sg) {
    std::ostringstream os;
    for (const RelationEdge& e : sg.edges)
        os << e.subject << ' ' << predicate_name(e.predicate) << ' ' << e.object << ';';
    for (const UnaryFact& f : sg.unary_facts()) os << f.node << ' ' << f.state << ';';
    os << "held=" << (sg.robot.held_object ? *sg.robot.held_object : std::string("-"));
    return os.str();
}

}  // namespace gsr
