#include "gsr/relations.hpp"

#include <algorithm>

#include "gsr/errors.hpp"

namespace gsr {

namespace {

bool in_child_chain(const SceneGraph& sg, const std::string& ancestor, const std::string& node) {
    const ObjectNode* a = sg.find(ancestor);
    if (a == nullptr) return false;
    for (const std::string& c : a->children) {
        if (c == node || in_child_chain(sg, c, node)) return true;
    }
    return false;
}

}  // namespace

SceneGraph extract_relations(const std::vector<ObjectNode>& objects, const RobotState& robot,
                             const ExtractionConfig& cfg) {
    SceneGraph sg;
    for (const ObjectNode& obj : objects) {
        if (sg.has_node(obj.id)) throw DuplicateNode(obj.id);
        if (obj.aabb.volume() <= 0.0) throw DegenerateGeometry(obj.id);
        sg.add_node(obj);
    }

    // Joint-derived open/closed; other state groups are semantic and kept.
    for (auto& [id, node] : sg.nodes) {
        if (!node.articulation) continue;
        node.states.erase("open");
        node.states.erase("closed");
        node.states.insert(node.articulation->is_open() ? "open" : "closed");
    }

    std::vector<const ObjectNode*> order;
    order.reserve(sg.nodes.size());
    for (const auto& [id, node] : sg.nodes) order.push_back(&node);

    for (size_t i = 0; i < order.size(); ++i) {
        for (size_t j = i + 1; j < order.size(); ++j) {
            const ObjectNode& a = *order[i];
            const ObjectNode& b = *order[j];
            if (in_child_chain(sg, a.id, b.id) || in_child_chain(sg, b.id, a.id)) continue;

            // Containment: IoA of the smaller box inside the larger.
            const ObjectNode* small = &a;
            const ObjectNode* large = &b;
            if (b.aabb.volume() < a.aabb.volume()) std::swap(small, large);
            double inter = intersection_volume(a.aabb, b.aabb);
            if (inter / small->aabb.volume() > cfg.ioa_threshold) {
                sg.edges.insert(edge(small->id, Predicate::Inside, large->id));
                continue;
            }

            // Resting contact: subject is the higher object.
            double area = horizontal_overlap_area(a.aabb, b.aabb);
            if (area > 0.0) {
                double ratio = area / std::min(a.aabb.horizontal_area(), b.aabb.horizontal_area());
                if (ratio >= cfg.horizontal_overlap_min) {
                    double gap_ab = a.aabb.min.z - b.aabb.max.z;  // a above b
                    double gap_ba = b.aabb.min.z - a.aabb.max.z;
                    if (std::abs(gap_ab) <= cfg.contact_tolerance) {
                        sg.edges.insert(edge(a.id, Predicate::Ontop, b.id));
                        continue;
                    }
                    if (std::abs(gap_ba) <= cfg.contact_tolerance) {
                        sg.edges.insert(edge(b.id, Predicate::Ontop, a.id));
                        continue;
                    }
                }
            }

            // Proximity.
            if (horizontal_center_distance(a.aabb, b.aabb) <= cfg.beside_max_center_dist &&
                z_intervals_overlap(a.aabb, b.aabb)) {
                sg.edges.insert(edge(std::min(a.id, b.id), Predicate::Beside, std::max(a.id, b.id)));
            }
        }
    }

    sg.robot = robot;
    if (robot.grasping() && robot.held_object && sg.has_node(*robot.held_object)) {
        sg.edges.insert(edge(kRobotId, Predicate::Holding, *robot.held_object));
    } else {
        sg.robot.held_object.reset();
    }
    return sg;
}

}  // namespace gsr
