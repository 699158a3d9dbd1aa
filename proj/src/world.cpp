#include "gsr/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gsr/errors.hpp"

namespace gsr {

using nlohmann::json;
using nlohmann::ordered_json;

bool NodeFilter::matches(const ObjectNode& n) const {
    if (category && n.category != *category) return false;
    if (color && n.attribute("color") != *color) return false;
    if (!ids.empty() && std::find(ids.begin(), ids.end(), n.id) == ids.end()) return false;
    return true;
}

ordered_json goal_to_json(const GoalSpec& goal) {
    ordered_json j;
    j["instruction"] = goal.instruction;
    ordered_json preds = ordered_json::array();
    for (const RelationEdge& e : goal.predicates)
        preds.push_back({{"subject", e.subject}, {"predicate", predicate_name(e.predicate)}, {"object", e.object}});
    for (const UnaryFact& f : goal.state_predicates)
        preds.push_back({{"subject", f.node}, {"predicate", f.state}, {"object", nullptr}});
    j["predicates"] = preds;
    ordered_json clauses = ordered_json::array();
    for (const QuantifiedClause& c : goal.clauses) {
        ordered_json f = ordered_json::object();
        if (c.filter.category) f["category"] = *c.filter.category;
        if (c.filter.color) f["color"] = *c.filter.color;
        if (!c.filter.ids.empty()) f["ids"] = c.filter.ids;
        clauses.push_back({{"filter", f}, {"predicate", predicate_name(c.predicate)}, {"object", c.object}});
    }
    j["clauses"] = clauses;
    return j;
}

GoalSpec goal_from_json(const json& j) {
    GoalSpec g;
    g.instruction = j.value("instruction", std::string());
    if (j.contains("predicates")) {
        for (const json& p : j["predicates"]) {
            std::string subject = p.at("subject").get<std::string>();
            std::string token = p.at("predicate").get<std::string>();
            if (!p.contains("object") || p["object"].is_null()) {
                if (!is_unary_state(token)) throw UnknownPredicate(token);
                g.state_predicates.push_back(UnaryFact{subject, token});
            } else {
                auto pred = predicate_from_token(token);
                if (!pred) throw UnknownPredicate(token);
                std::string object = p["object"].get<std::string>();
                if (pred->reversed) std::swap(subject, object);
                g.predicates.push_back(RelationEdge{subject, pred->predicate, object});
            }
        }
    }
    if (j.contains("clauses")) {
        for (const json& c : j["clauses"]) {
            QuantifiedClause qc;
            if (c.contains("filter")) {
                const json& f = c["filter"];
                if (f.contains("category")) qc.filter.category = f["category"].get<std::string>();
                if (f.contains("color")) qc.filter.color = f["color"].get<std::string>();
                if (f.contains("ids"))
                    for (const json& id : f["ids"]) qc.filter.ids.push_back(id.get<std::string>());
            }
            auto pred = predicate_from_token(c.at("predicate").get<std::string>());
            if (!pred) throw UnknownPredicate(c.at("predicate").get<std::string>());
            qc.predicate = pred->predicate;
            qc.object = c.at("object").get<std::string>();
            g.clauses.push_back(std::move(qc));
        }
    }
    return g;
}

namespace {

RelationEdge canonical_edge(std::string subject, Predicate p, std::string object) {
    if (p == Predicate::Beside && object < subject) std::swap(subject, object);
    return RelationEdge{std::move(subject), p, std::move(object)};
}

}  // namespace

std::vector<GoalFact> expand_goal(const GoalSpec& goal, const SceneGraph& sg) {
    std::vector<GoalFact> out;
    for (const RelationEdge& e : goal.predicates)
        out.push_back(canonical_edge(e.subject, e.predicate, e.object));
    for (const UnaryFact& f : goal.state_predicates) out.push_back(f);
    for (const QuantifiedClause& c : goal.clauses) {
        for (const auto& [id, node] : sg.nodes) {
            if (id == c.object || !c.filter.matches(node)) continue;
            out.push_back(canonical_edge(id, c.predicate, c.object));
        }
    }
    return out;
}

bool fact_holds(const SceneGraph& sg, const GoalFact& fact) {
    if (const RelationEdge* e = std::get_if<RelationEdge>(&fact))
        return sg.has_edge(canonical_edge(e->subject, e->predicate, e->object));
    const UnaryFact& f = std::get<UnaryFact>(fact);
    return sg.has_state(f.node, f.state);
}

bool satisfied(const SceneGraph& sg, const GoalSpec& goal) {
    for (const RelationEdge& e : goal.predicates) {
        if (e.subject != kRobotId && !sg.has_node(e.subject)) throw UnknownNode(e.subject);
        if (!sg.has_node(e.object)) throw UnknownNode(e.object);
    }
    for (const UnaryFact& f : goal.state_predicates)
        if (!sg.has_node(f.node)) throw UnknownNode(f.node);
    for (const QuantifiedClause& c : goal.clauses)
        if (!sg.has_node(c.object)) throw UnknownNode(c.object);

    for (const GoalFact& fact : expand_goal(goal, sg))
        if (!fact_holds(sg, fact)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// engine internals
// ---------------------------------------------------------------------------

namespace {

bool is_drawer_like(const SceneGraph& sg, const ObjectNode& n) {
    return n.articulation && !sg.parent_of(n.id).empty();
}

// The closed container directly blocking access to `id`, if any.
std::string closed_container_of(const SceneGraph& sg, const std::string& id) {
    for (const RelationEdge& e : sg.edges) {
        if (e.predicate != Predicate::Inside || e.subject != id) continue;
        if (sg.has_state(e.object, "closed")) return e.object;
    }
    return {};
}

std::string occluder_of(const SceneGraph& sg, const std::string& id) {
    for (const RelationEdge& e : sg.edges)
        if (e.predicate == Predicate::Ontop && e.object == id) return e.subject;
    return {};
}

// An open sibling drawer strictly above `id` in the same parent.
std::string open_drawer_above(const SceneGraph& sg, const std::string& id) {
    const ObjectNode* n = sg.find(id);
    std::string parent = sg.parent_of(id);
    if (n == nullptr || parent.empty()) return {};
    const ObjectNode* p = sg.find(parent);
    if (p == nullptr) return {};
    double z = n->aabb.center().z;
    for (const std::string& sib : p->children) {
        if (sib == id) continue;
        const ObjectNode* s = sg.find(sib);
        if (s == nullptr || !s->articulation) continue;
        if (s->aabb.center().z > z && s->states.count("open")) return sib;
    }
    return {};
}

Vec3 slide_direction(const ObjectNode& n) {
    std::string d = n.attribute("slide_dir");
    if (d == "+x") return {1, 0, 0};
    if (d == "-x") return {-1, 0, 0};
    if (d == "-y") return {0, -1, 0};
    return {0, 1, 0};  // default +y
}

bool has_open_close_semantics(const ObjectNode& n) {
    return n.articulation.has_value() || n.states.count("open") || n.states.count("closed");
}

bool supports_on_off(const ObjectNode& n) {
    return n.states.count("on") || n.states.count("off") || n.attribute("switchable") == "true";
}

// Collision test helper: inflated in xy to keep a small lateral clearance.
bool placement_collides(const SceneGraph& sg, const Aabb& candidate,
                        const std::set<std::string>& ignore, double clearance) {
    Aabb probe = candidate;
    probe.min.x -= clearance;
    probe.min.y -= clearance;
    probe.max.x += clearance;
    probe.max.y += clearance;
    for (const auto& [id, node] : sg.nodes) {
        if (ignore.count(id)) continue;
        if (volumes_collide(probe, node.aabb)) return true;
    }
    return false;
}

// Deterministic free-position search on a rectangular region: candidates on
// a pitch grid ordered center-out, then row-major.
std::optional<Vec3> find_free_xy(const SceneGraph& sg, const Aabb& held, double zmin,
                                 double x0, double x1, double y0, double y1,
                                 const std::set<std::string>& ignore, double clearance) {
    Vec3 size = held.size();
    double hw = size.x * 0.5;
    double hd = size.y * 0.5;
    double cx = (x0 + x1) * 0.5;
    double cy = (y0 + y1) * 0.5;

    std::vector<Vec3> candidates;
    if (x1 - x0 <= size.x || y1 - y0 <= size.y) {
        candidates.push_back({cx, cy, 0});
    } else {
        double px = size.x + 2.0 * clearance;
        double py = size.y + 2.0 * clearance;
        for (double x = x0 + hw; x <= x1 - hw + 1e-9; x += px)
            for (double y = y0 + hd; y <= y1 - hd + 1e-9; y += py) candidates.push_back({x, y, 0});
        std::sort(candidates.begin(), candidates.end(), [&](const Vec3& a, const Vec3& b) {
            double da = (a.x - cx) * (a.x - cx) + (a.y - cy) * (a.y - cy);
            double db = (b.x - cx) * (b.x - cx) + (b.y - cy) * (b.y - cy);
            if (da != db) return da < db;
            if (a.x != b.x) return a.x < b.x;
            return a.y < b.y;
        });
    }
    for (const Vec3& c : candidates) {
        Aabb box = Aabb::centered({c.x, c.y, zmin + size.z * 0.5}, size);
        if (!placement_collides(sg, box, ignore, clearance)) return Vec3{c.x, c.y, zmin};
    }
    return std::nullopt;
}

constexpr double kWall = 0.02;  // container wall/floor thickness

Aabb interior_of(const Aabb& box) {
    return Aabb{{box.min.x + kWall, box.min.y + kWall, box.min.z + kWall},
                {box.max.x - kWall, box.max.y - kWall, box.max.z - 0.001}};
}

std::optional<Vec3> place_on_position(const SceneGraph& sg, const Aabb& held, const ObjectNode& dest,
                                      const std::set<std::string>& ignore, double clearance) {
    return find_free_xy(sg, held, dest.aabb.max.z, dest.aabb.min.x, dest.aabb.max.x, dest.aabb.min.y,
                        dest.aabb.max.y, ignore, clearance);
}

std::optional<Vec3> place_inside_position(const SceneGraph& sg, const Aabb& held,
                                          const ObjectNode& dest, const std::set<std::string>& ignore,
                                          double clearance) {
    Aabb in = interior_of(dest.aabb);
    Vec3 size = held.size();
    if (size.x > in.max.x - in.min.x || size.y > in.max.y - in.min.y || size.z > in.max.z - in.min.z)
        return std::nullopt;
    return find_free_xy(sg, held, in.min.z, in.min.x, in.max.x, in.min.y, in.max.y, ignore, clearance);
}

void translate_nodes(SceneGraph& sg, const std::vector<std::string>& ids, const Vec3& d) {
    for (const std::string& id : ids) {
        auto it = sg.nodes.find(id);
        if (it == sg.nodes.end()) continue;
        ObjectNode& n = it->second;
        n.aabb = n.aabb.translated(d);
        n.pose.position = n.pose.position + d;
        for (Keypoint& kp : n.keypoints) kp.position = kp.position + d;
    }
}

}  // namespace

std::vector<std::string> move_set(const SceneGraph& sg, const std::string& id) {
    std::set<std::string> set{id};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const std::string& m : std::vector<std::string>(set.begin(), set.end())) {
            const ObjectNode* n = sg.find(m);
            if (n != nullptr)
                for (const std::string& c : n->children) grew |= set.insert(c).second;
        }
        for (const RelationEdge& e : sg.edges)
            if (e.predicate == Predicate::Inside && set.count(e.object)) grew |= set.insert(e.subject).second;
    }
    return {set.begin(), set.end()};
}

Feasibility preconditions(const SceneGraph& sg, const ActionCommand& cmd, const EngineConfig& cfg) {
    auto blocked = [](std::string reason) {
        return Feasibility{Feasibility::Kind::Blocked, std::move(reason)};
    };
    if (cmd.verb == Verb::End) return {};

    const ObjectNode* target = sg.find(cmd.target);
    if (target == nullptr) return {Feasibility::Kind::UnknownTarget, "unknown node " + cmd.target};

    const std::optional<std::string>& held = sg.robot.held_object;

    switch (cmd.verb) {
        case Verb::Pick: {
            if (held) return blocked("gripper already holding " + *held);
            if (target->attribute("fixed") == "true") return blocked(cmd.target + " is a fixed fixture");
            std::string parent = sg.parent_of(cmd.target);
            if (!parent.empty()) return blocked(cmd.target + " is an attached component of " + parent);
            std::string container = closed_container_of(sg, cmd.target);
            if (!container.empty()) return blocked("inside closed container " + container);
            std::string occluder = occluder_of(sg, cmd.target);
            if (!occluder.empty()) return blocked("occluded by " + occluder);
            return {};
        }
        case Verb::PlaceOn:
        case Verb::PlaceInside: {
            if (!held) return blocked("gripper is empty");
            if (*held == cmd.target) return blocked("cannot place " + *held + " onto itself");
            const ObjectNode* held_node = sg.find(*held);
            if (held_node == nullptr) return blocked("held object " + *held + " missing");
            std::set<std::string> ignore;
            for (const std::string& m : move_set(sg, *held)) ignore.insert(m);
            if (cmd.verb == Verb::PlaceOn) {
                std::string container = closed_container_of(sg, cmd.target);
                if (!container.empty())
                    return blocked("destination inside closed container " + container);
                ignore.insert(cmd.target);
                if (!place_on_position(sg, held_node->aabb, *target, ignore, cfg.place_clearance))
                    return blocked("no free space on " + cmd.target);
            } else {
                if (has_open_close_semantics(*target) && !target->states.count("open"))
                    return blocked("destination " + cmd.target + " is closed");
                if (is_drawer_like(sg, *target)) {
                    std::string above = open_drawer_above(sg, cmd.target);
                    if (!above.empty()) return blocked("blocked by open " + above + " above");
                }
                ignore.insert(cmd.target);
                for (const auto& [id, node] : sg.nodes)
                    if (std::find(node.children.begin(), node.children.end(), cmd.target) !=
                        node.children.end())
                        ignore.insert(id);
                if (!place_inside_position(sg, held_node->aabb, *target, ignore, cfg.place_clearance))
                    return blocked("no free space inside " + cmd.target);
            }
            return {};
        }
        case Verb::Open:
        case Verb::Close: {
            if (!target->articulation) return blocked(cmd.target + " is not articulated");
            bool want_open = cmd.verb == Verb::Open;
            if (target->articulation->is_open() == want_open)
                return blocked(cmd.target + (want_open ? " is already open" : " is already closed"));
            if (is_drawer_like(sg, *target)) {
                std::string above = open_drawer_above(sg, cmd.target);
                if (!above.empty()) return blocked("blocked by open " + above + " above");
            }
            std::string occluder = occluder_of(sg, cmd.target);
            if (!occluder.empty()) return blocked("occluded by " + occluder);
            return {};
        }
        case Verb::TurnOn:
        case Verb::TurnOff: {
            if (!supports_on_off(*target)) return blocked(cmd.target + " does not support on/off");
            bool want_on = cmd.verb == Verb::TurnOn;
            if (target->states.count(want_on ? "on" : "off"))
                return blocked(cmd.target + (want_on ? " is already on" : " is already off"));
            return {};
        }
        case Verb::Push: {
            if (!is_drawer_like(sg, *target)) return blocked("push applies to drawers");
            if (!target->articulation->is_open()) return blocked(cmd.target + " is already closed");
            std::string above = open_drawer_above(sg, cmd.target);
            if (!above.empty()) return blocked("blocked by open " + above + " above");
            return {};
        }
        case Verb::End: return {};
    }
    return {};
}

SceneGraph transition(const SceneGraph& sg, const ActionCommand& cmd, const EngineConfig& cfg) {
    Feasibility feas = preconditions(sg, cmd, cfg);
    if (!feas.ok()) throw IllegalTransition(feas.reason);
    if (cmd.verb == Verb::End) return sg;

    SceneGraph g = sg;
    ObjectNode& target = g.nodes.at(cmd.target);

    switch (cmd.verb) {
        case Verb::Pick: {
            std::vector<std::string> moving = move_set(g, cmd.target);
            std::set<std::string> moving_set(moving.begin(), moving.end());
            double top = 0.0;
            for (const auto& [id, node] : g.nodes)
                if (!moving_set.count(id)) top = std::max(top, node.aabb.max.z);
            Vec3 c = target.aabb.center();
            Vec3 d{0.0 - c.x, 0.0 - c.y, (top + cfg.hover_clearance) - target.aabb.min.z};
            translate_nodes(g, moving, d);
            g.robot.gripper_value = 1.0;
            g.robot.held_object = cmd.target;
            break;
        }
        case Verb::PlaceOn:
        case Verb::PlaceInside: {
            std::string held = *g.robot.held_object;
            ObjectNode& held_node = g.nodes.at(held);
            std::vector<std::string> moving = move_set(g, held);
            std::set<std::string> ignore(moving.begin(), moving.end());
            ignore.insert(cmd.target);
            std::optional<Vec3> pos;
            if (cmd.verb == Verb::PlaceOn) {
                pos = place_on_position(g, held_node.aabb, target, ignore, cfg.place_clearance);
            } else {
                for (const auto& [id, node] : g.nodes)
                    if (std::find(node.children.begin(), node.children.end(), cmd.target) !=
                        node.children.end())
                        ignore.insert(id);
                pos = place_inside_position(g, held_node.aabb, target, ignore, cfg.place_clearance);
            }
            if (!pos) throw IllegalTransition("no free space for " + held);
            Vec3 c = held_node.aabb.center();
            Vec3 d{pos->x - c.x, pos->y - c.y, pos->z - held_node.aabb.min.z};
            translate_nodes(g, moving, d);
            g.robot.gripper_value = 0.0;
            g.robot.held_object.reset();
            break;
        }
        case Verb::Open:
        case Verb::Close:
        case Verb::Push: {
            Articulation& art = *target.articulation;
            double next = cmd.verb == Verb::Open
                              ? art.open_threshold + 0.5 * (art.joint_max - art.open_threshold)
                              : art.joint_min;
            if (is_drawer_like(g, target)) {
                Vec3 d = slide_direction(target) * (next - art.joint_value);
                translate_nodes(g, move_set(g, cmd.target), d);
            }
            art.joint_value = next;
            break;
        }
        case Verb::TurnOn:
        case Verb::TurnOff: {
            bool on = cmd.verb == Verb::TurnOn;
            target.states.erase(on ? "off" : "on");
            target.states.insert(on ? "on" : "off");
            break;
        }
        case Verb::End: break;
    }

    // Re-derive the edge set from the updated geometry so the symbolic
    // update and extraction can never drift apart.
    std::vector<ObjectNode> objects;
    objects.reserve(g.nodes.size());
    for (const auto& [id, node] : g.nodes) objects.push_back(node);
    return extract_relations(objects, g.robot, cfg.extraction);
}

ExecutionResult execute(const SceneGraph& sg, const ActionCommand& cmd, const EngineConfig& cfg) {
    ExecutionResult result;
    result.graph = sg;

    if (cmd.verb != Verb::End && !sg.has_node(cmd.target)) return result;  // empty log

    Feasibility feas = preconditions(sg, cmd, cfg);
    if (!feas.ok()) {
        result.log.push_back({0, false, feas.reason});
        return result;
    }

    result.log.push_back({1, true, "approach"});

    SceneGraph next;
    try {
        next = transition(sg, cmd, cfg);
    } catch (const IllegalTransition& e) {
        result.log.push_back({2, false, e.reason});
        return result;
    }
    result.log.push_back({2, true, "interact"});
    result.graph = next;

    bool verified = true;
    std::string msg = "retract";
    switch (cmd.verb) {
        case Verb::Pick:
            verified = next.has_edge(kRobotId, Predicate::Holding, cmd.target);
            if (!verified) msg = "holding edge missing after pick";
            break;
        case Verb::PlaceOn:
            verified = sg.robot.held_object &&
                       next.has_edge(*sg.robot.held_object, Predicate::Ontop, cmd.target);
            if (!verified) msg = "ontop edge missing after place";
            break;
        case Verb::PlaceInside:
            verified = sg.robot.held_object &&
                       next.has_edge(*sg.robot.held_object, Predicate::Inside, cmd.target);
            if (!verified) msg = "inside edge missing after place";
            break;
        case Verb::Open:
            verified = next.has_state(cmd.target, "open");
            if (!verified) msg = "target not open";
            break;
        case Verb::Close:
        case Verb::Push:
            verified = next.has_state(cmd.target, "closed");
            if (!verified) msg = "target not closed";
            break;
        case Verb::TurnOn:
            verified = next.has_state(cmd.target, "on");
            if (!verified) msg = "target not on";
            break;
        case Verb::TurnOff:
            verified = next.has_state(cmd.target, "off");
            if (!verified) msg = "target not off";
            break;
        case Verb::End: break;
    }
    result.log.push_back({3, verified, msg});
    result.success = verified;
    return result;
}

}  // namespace gsr
