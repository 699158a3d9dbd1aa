#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gsr/geometry.hpp"

namespace gsr {

// Canonical relation vocabulary. Aliases (on, up, in, stack, under,
// contains, adjacent) exist only in the parser and are rewritten to these
// four before a graph is built.
enum class Predicate { Ontop, Inside, Beside, Holding };

const char* predicate_name(Predicate p);

// Maps a raw token (canonical name or alias) onto the canonical predicate.
// reversed is set when the alias flips subject/object (under, contains).
struct PredicateToken {
    Predicate predicate;
    bool reversed = false;
};
std::optional<PredicateToken> predicate_from_token(const std::string& token);

// The reserved edge subject used for the gripper's holding edge; it is the
// one endpoint exempt from node-existence checks.
inline const std::string kRobotId = "robot";

// Closed set of unary object-state tags.
bool is_unary_state(const std::string& tag);
// The tag it conflicts with (open<->closed, on<->off, ...), empty if none.
std::string opposite_state(const std::string& tag);

struct Keypoint {
    std::string name;
    Vec3 position;
    std::string role;  // free-form semantic tag (handle, button, ...)

    bool operator==(const Keypoint&) const = default;
};

struct Articulation {
    double joint_value = 0.0;
    double joint_min = 0.0;
    double joint_max = 1.0;
    double open_threshold = 0.05;  // J_tau

    bool operator==(const Articulation&) const = default;
    bool is_open() const { return joint_value > open_threshold; }
};

struct ObjectNode {
    std::string id;        // <category>_<two-digit index>, e.g. apple_01
    std::string category;  // e.g. apple
    Pose pose;
    Aabb aabb;
    std::vector<Keypoint> keypoints;
    std::vector<std::string> children;  // ids of articulated child components
    std::optional<Articulation> articulation;
    std::set<std::string> states;                 // open/closed, on/off, ...
    std::map<std::string, std::string> attributes;  // e.g. color -> red

    bool operator==(const ObjectNode&) const = default;

    std::string attribute(const std::string& key) const {
        auto it = attributes.find(key);
        return it == attributes.end() ? std::string() : it->second;
    }
};

// True if id matches <category>_<NN> with a two-digit index.
bool valid_node_id(const std::string& id);
// "cup_01" -> "cup". Returns the id unchanged when there is no index suffix.
std::string category_of_id(const std::string& id);

struct RelationEdge {
    std::string subject;
    Predicate predicate;
    std::string object;

    auto operator<=>(const RelationEdge&) const = default;
};

inline RelationEdge edge(std::string subject, Predicate p, std::string object) {
    return RelationEdge{std::move(subject), p, std::move(object)};
}

// A (node id, unary state) fact, e.g. (box_01, open).
struct UnaryFact {
    std::string node;
    std::string state;

    auto operator<=>(const UnaryFact&) const = default;
};

struct RobotState {
    double gripper_value = 0.0;      // G
    double gripper_threshold = 0.5;  // G_tau
    std::optional<std::string> held_object;

    bool operator==(const RobotState&) const = default;
    bool grasping() const { return gripper_value > gripper_threshold; }
};

struct SceneGraph {
    std::map<std::string, ObjectNode> nodes;
    std::set<RelationEdge> edges;
    RobotState robot;

    bool operator==(const SceneGraph&) const = default;

    bool has_node(const std::string& id) const { return nodes.count(id) > 0; }
    const ObjectNode* find(const std::string& id) const {
        auto it = nodes.find(id);
        return it == nodes.end() ? nullptr : &it->second;
    }
    bool has_edge(const RelationEdge& e) const { return edges.count(e) > 0; }
    bool has_edge(const std::string& s, Predicate p, const std::string& o) const {
        return edges.count(RelationEdge{s, p, o}) > 0;
    }
    bool has_state(const std::string& id, const std::string& state) const {
        const ObjectNode* n = find(id);
        return n != nullptr && n->states.count(state) > 0;
    }

    // All unary facts, sorted (std::set of nodes is already ordered by id).
    std::vector<UnaryFact> unary_facts() const;

    // Edges whose subject or object is `id`.
    std::vector<RelationEdge> edges_incident(const std::string& id) const;

    // The id of the node's parent when the node is an articulated child
    // component (appears in some node's children list), empty otherwise.
    std::string parent_of(const std::string& id) const;

    void add_node(ObjectNode node);
};

// Throws (DuplicateNode, UnknownNode, Error) on the first violated
// invariant; returns normally on a well-formed graph.
void validate(const SceneGraph& sg);

// Equality on the relational content only: edge set, unary facts, held
// object. Poses and joint values are ignored. This is the notion of
// equality under which diff/apply round-trips are exact, since EdgeDelta
// carries no geometry.
bool relationally_equal(const SceneGraph& a, const SceneGraph& b);

// Stable text key of the relational content; used for planner visited sets.
std::string relational_key(const SceneGraph& sg);

struct EdgeDelta {
    std::set<RelationEdge> added_edges;
    std::set<RelationEdge> removed_edges;
    std::set<UnaryFact> added_states;
    std::set<UnaryFact> removed_states;

    bool operator==(const EdgeDelta&) const = default;
    bool empty() const {
        return added_edges.empty() && removed_edges.empty() && added_states.empty() &&
               removed_states.empty();
    }
};

}  // namespace gsr
