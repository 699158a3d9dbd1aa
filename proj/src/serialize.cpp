#include "gsr/serialize.hpp"

#include <algorithm>
#include <sstream>

#include "gsr/errors.hpp"

namespace gsr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec3_to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-element number array");
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json node_to_json(const ObjectNode& n) {
    ordered_json j;
    j["id"] = n.id;
    j["category"] = n.category;
    j["pose"] = {{"position", vec3_to_json(n.pose.position)},
                 {"orientation", ordered_json::array({n.pose.orientation.w, n.pose.orientation.x,
                                                      n.pose.orientation.y, n.pose.orientation.z})}};
    j["aabb"] = {{"min", vec3_to_json(n.aabb.min)}, {"max", vec3_to_json(n.aabb.max)}};

    std::vector<Keypoint> kps = n.keypoints;
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) { return a.name < b.name; });
    ordered_json jkps = ordered_json::array();
    for (const Keypoint& kp : kps)
        jkps.push_back({{"name", kp.name}, {"position", vec3_to_json(kp.position)}, {"role", kp.role}});
    j["keypoints"] = jkps;

    std::vector<std::string> children = n.children;
    std::sort(children.begin(), children.end());
    j["children"] = children;

    if (n.articulation) {
        const Articulation& a = *n.articulation;
        j["articulation"] = {{"joint_value", a.joint_value},
                             {"joint_min", a.joint_min},
                             {"joint_max", a.joint_max},
                             {"open_threshold", a.open_threshold}};
    }
    j["states"] = std::vector<std::string>(n.states.begin(), n.states.end());
    j["attributes"] = n.attributes;
    return j;
}

ObjectNode node_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("node entry is not an object");
    ObjectNode n;
    if (!j.contains("id") || !j["id"].is_string()) throw SchemaError("node missing string 'id'");
    n.id = j["id"].get<std::string>();
    n.category = j.value("category", category_of_id(n.id));
    if (j.contains("pose")) {
        const json& p = j["pose"];
        if (p.contains("position")) n.pose.position = vec3_from_json(p["position"]);
        if (p.contains("orientation")) {
            const json& q = p["orientation"];
            if (!q.is_array() || q.size() != 4) throw SchemaError("orientation must be [w,x,y,z]");
            n.pose.orientation = Quat{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                      q[3].get<double>()};
        }
    }
    if (j.contains("aabb")) {
        n.aabb.min = vec3_from_json(j["aabb"].at("min"));
        n.aabb.max = vec3_from_json(j["aabb"].at("max"));
    }
    if (j.contains("keypoints")) {
        for (const json& k : j["keypoints"]) {
            Keypoint kp;
            kp.name = k.value("name", std::string());
            if (k.contains("position")) kp.position = vec3_from_json(k["position"]);
            kp.role = k.value("role", std::string());
            n.keypoints.push_back(std::move(kp));
        }
    }
    if (j.contains("children")) {
        for (const json& c : j["children"]) n.children.push_back(c.get<std::string>());
    }
    if (j.contains("articulation") && !j["articulation"].is_null()) {
        const json& a = j["articulation"];
        Articulation art;
        art.joint_value = a.value("joint_value", 0.0);
        art.joint_min = a.value("joint_min", 0.0);
        art.joint_max = a.value("joint_max", 1.0);
        art.open_threshold = a.value("open_threshold", 0.05);
        n.articulation = art;
    }
    if (j.contains("states")) {
        for (const json& s : j["states"]) {
            std::string tag = s.get<std::string>();
            if (!is_unary_state(tag)) throw SchemaError("unknown unary state tag: " + tag);
            n.states.insert(tag);
        }
    }
    if (j.contains("attributes")) {
        for (auto it = j["attributes"].begin(); it != j["attributes"].end(); ++it)
            n.attributes[it.key()] = it.value().get<std::string>();
    }
    return n;
}

struct WireFact {
    std::string subject;
    std::string predicate;
    std::string object;  // empty means null (unary fact)
    bool operator<(const WireFact& o) const {
        return std::tie(subject, predicate, object) < std::tie(o.subject, o.predicate, o.object);
    }
};

std::vector<WireFact> collect_facts(const SceneGraph& sg) {
    std::vector<WireFact> facts;
    for (const RelationEdge& e : sg.edges)
        facts.push_back({e.subject, predicate_name(e.predicate), e.object});
    for (const UnaryFact& f : sg.unary_facts()) facts.push_back({f.node, f.state, ""});
    std::sort(facts.begin(), facts.end());
    return facts;
}

ordered_json fact_to_json(const WireFact& f) {
    ordered_json j;
    j["subject"] = f.subject;
    j["predicate"] = f.predicate;
    if (f.object.empty())
        j["object"] = nullptr;
    else
        j["object"] = f.object;
    return j;
}

ordered_json robot_to_json(const RobotState& r) {
    ordered_json j;
    j["gripper_value"] = r.gripper_value;
    j["gripper_threshold"] = r.gripper_threshold;
    if (r.held_object)
        j["held_object"] = *r.held_object;
    else
        j["held_object"] = nullptr;
    return j;
}

}  // namespace

ordered_json scene_graph_to_json(const SceneGraph& sg) {
    ordered_json j;
    ordered_json nodes = ordered_json::array();
    for (const auto& [id, node] : sg.nodes) nodes.push_back(node_to_json(node));
    j["nodes"] = nodes;
    ordered_json edges = ordered_json::array();
    for (const WireFact& f : collect_facts(sg)) edges.push_back(fact_to_json(f));
    j["edges"] = edges;
    j["robot"] = robot_to_json(sg.robot);
    return j;
}

SceneGraph scene_graph_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("scene graph document is not an object");
    if (!j.contains("nodes") || !j["nodes"].is_array()) throw SchemaError("missing 'nodes' array");
    if (!j.contains("edges") || !j["edges"].is_array()) throw SchemaError("missing 'edges' array");

    SceneGraph sg;
    for (const json& n : j["nodes"]) {
        ObjectNode node = node_from_json(n);
        if (sg.has_node(node.id)) throw DuplicateNode(node.id);
        sg.add_node(std::move(node));
    }
    for (const json& e : j["edges"]) {
        if (!e.is_object() || !e.contains("subject") || !e.contains("predicate"))
            throw SchemaError("edge entry needs 'subject' and 'predicate'");
        std::string subject = e["subject"].get<std::string>();
        std::string token = e["predicate"].get<std::string>();
        bool has_object = e.contains("object") && !e["object"].is_null();

        if (!has_object) {
            if (!is_unary_state(token)) throw UnknownPredicate(token);
            auto it = sg.nodes.find(subject);
            if (it == sg.nodes.end()) {
                ObjectNode stub;
                stub.id = subject;
                stub.category = category_of_id(subject);
                stub.aabb = Aabb::centered({0, 0, 0}, {0.05, 0.05, 0.05});
                stub.attributes["stub"] = "true";
                sg.add_node(std::move(stub));
                it = sg.nodes.find(subject);
            }
            it->second.states.insert(token);
            continue;
        }
        std::string object = e["object"].get<std::string>();
        auto pred = predicate_from_token(token);
        if (!pred) throw UnknownPredicate(token);
        if (pred->reversed) std::swap(subject, object);
        sg.edges.insert(edge(subject, pred->predicate, object));
    }
    if (j.contains("robot") && j["robot"].is_object()) {
        const json& r = j["robot"];
        sg.robot.gripper_value = r.value("gripper_value", 0.0);
        sg.robot.gripper_threshold = r.value("gripper_threshold", 0.5);
        if (r.contains("held_object") && !r["held_object"].is_null())
            sg.robot.held_object = r["held_object"].get<std::string>();
    }
    // The edge set is the source of truth for the holding state.
    sg.robot.held_object.reset();
    for (const RelationEdge& e : sg.edges) {
        if (e.predicate == Predicate::Holding) {
            sg.robot.held_object = e.object;
            if (!sg.robot.grasping()) sg.robot.gripper_value = sg.robot.gripper_threshold + 0.5;
        }
    }
    return sg;
}

std::string to_prompt_text(const SceneGraph& sg) {
    std::ostringstream os;
    for (const auto& [id, node] : sg.nodes) {
        os << id << ": ";
        std::string color = node.attribute("color");
        if (!color.empty()) os << color << ' ';
        os << node.category << '\n';
    }
    for (const WireFact& f : collect_facts(sg)) {
        if (f.subject == kRobotId) continue;
        os << f.subject << ' ' << f.predicate;
        if (!f.object.empty()) os << ' ' << f.object;
        os << '\n';
    }
    if (sg.robot.held_object)
        os << "robot holding " << *sg.robot.held_object << '\n';
    else
        os << "robot holding nothing\n";
    return os.str();
}

std::string serialize(const SceneGraph& sg, TextFormat format) {
    if (format == TextFormat::PromptText) return to_prompt_text(sg);
    return scene_graph_to_json(sg).dump();
}

std::string serialize_shuffled(const SceneGraph& sg, Rng& rng) {
    ordered_json canon = scene_graph_to_json(sg);
    std::vector<ordered_json> nodes(canon["nodes"].begin(), canon["nodes"].end());
    std::vector<ordered_json> edges(canon["edges"].begin(), canon["edges"].end());
    rng.shuffle(nodes);
    rng.shuffle(edges);
    ordered_json out;
    out["nodes"] = nodes;
    out["edges"] = edges;
    out["robot"] = canon["robot"];
    return out.dump();
}

namespace {

void byte_offset_to_line_col(const std::string& text, size_t byte, int& line, int& col) {
    line = 1;
    col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

}  // namespace

SceneGraph parse_scene_graph(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 0, col = 0;
        byte_offset_to_line_col(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
        throw ParseError(e.what(), line, col);
    }
    return scene_graph_from_json(j);
}

ordered_json edge_delta_to_json(const EdgeDelta& d) {
    auto facts = [](const std::set<RelationEdge>& edges, const std::set<UnaryFact>& states) {
        std::vector<WireFact> out;
        for (const RelationEdge& e : edges) out.push_back({e.subject, predicate_name(e.predicate), e.object});
        for (const UnaryFact& f : states) out.push_back({f.node, f.state, ""});
        std::sort(out.begin(), out.end());
        ordered_json arr = ordered_json::array();
        for (const WireFact& f : out) arr.push_back(fact_to_json(f));
        return arr;
    };
    ordered_json j;
    j["added"] = facts(d.added_edges, d.added_states);
    j["removed"] = facts(d.removed_edges, d.removed_states);
    return j;
}

EdgeDelta edge_delta_from_json(const json& j) {
    EdgeDelta d;
    auto load = [](const json& arr, std::set<RelationEdge>& edges, std::set<UnaryFact>& states) {
        for (const json& e : arr) {
            std::string subject = e.at("subject").get<std::string>();
            std::string token = e.at("predicate").get<std::string>();
            if (!e.contains("object") || e["object"].is_null()) {
                if (!is_unary_state(token)) throw UnknownPredicate(token);
                states.insert(UnaryFact{subject, token});
            } else {
                std::string object = e["object"].get<std::string>();
                auto pred = predicate_from_token(token);
                if (!pred) throw UnknownPredicate(token);
                if (pred->reversed) std::swap(subject, object);
                edges.insert(RelationEdge{subject, pred->predicate, object});
            }
        }
    };
    if (j.contains("added")) load(j["added"], d.added_edges, d.added_states);
    if (j.contains("removed")) load(j["removed"], d.removed_edges, d.removed_states);
    return d;
}

}  // namespace gsr
