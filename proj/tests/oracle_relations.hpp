#pragma once

// Independent brute-force re-evaluation of the relation-extraction case
// ladder, kept deliberately separate from the library implementation: all
// pairs are scanned with explicit interval arithmetic and the rules are
// re-stated from scratch. Used as the equivalence oracle.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gsr/relations.hpp"
#include "gsr/scene_graph.hpp"

namespace test_oracle {

struct Result {
    std::set<gsr::RelationEdge> edges;
    std::set<std::pair<std::string, std::string>> states;  // (id, open|closed) for articulated
};

inline bool chain_links(const std::vector<gsr::ObjectNode>& all, const std::string& parent,
                        const std::string& child) {
    for (const gsr::ObjectNode& n : all) {
        if (n.id != parent) continue;
        for (const std::string& c : n.children) {
            if (c == child) return true;
            if (chain_links(all, c, child)) return true;
        }
    }
    return false;
}

inline Result brute_force(const std::vector<gsr::ObjectNode>& objects, const gsr::RobotState& robot,
                          const gsr::ExtractionConfig& cfg) {
    Result r;

    auto span = [](double a0, double a1, double b0, double b1) {
        double lo = a0 > b0 ? a0 : b0;
        double hi = a1 < b1 ? a1 : b1;
        return hi > lo ? hi - lo : 0.0;
    };

    for (size_t i = 0; i < objects.size(); ++i) {
        for (size_t j = 0; j < objects.size(); ++j) {
            if (i == j) continue;
            const gsr::ObjectNode& a = objects[i];
            const gsr::ObjectNode& b = objects[j];
            if (a.id > b.id) continue;  // one evaluation per unordered pair
            if (chain_links(objects, a.id, b.id) || chain_links(objects, b.id, a.id)) continue;

            double ix = span(a.aabb.min.x, a.aabb.max.x, b.aabb.min.x, b.aabb.max.x);
            double iy = span(a.aabb.min.y, a.aabb.max.y, b.aabb.min.y, b.aabb.max.y);
            double iz = span(a.aabb.min.z, a.aabb.max.z, b.aabb.min.z, b.aabb.max.z);
            double inter = ix * iy * iz;

            double vol_a = (a.aabb.max.x - a.aabb.min.x) * (a.aabb.max.y - a.aabb.min.y) *
                           (a.aabb.max.z - a.aabb.min.z);
            double vol_b = (b.aabb.max.x - b.aabb.min.x) * (b.aabb.max.y - b.aabb.min.y) *
                           (b.aabb.max.z - b.aabb.min.z);

            // containment first: IoA of the smaller-volume box
            const gsr::ObjectNode* inner = vol_a <= vol_b ? &a : &b;
            const gsr::ObjectNode* outer = vol_a <= vol_b ? &b : &a;
            double inner_vol = inner == &a ? vol_a : vol_b;
            if (inter / inner_vol > cfg.ioa_threshold) {
                r.edges.insert({inner->id, gsr::Predicate::Inside, outer->id});
                continue;
            }

            // resting contact next: higher object on the lower one
            double fa = (a.aabb.max.x - a.aabb.min.x) * (a.aabb.max.y - a.aabb.min.y);
            double fb = (b.aabb.max.x - b.aabb.min.x) * (b.aabb.max.y - b.aabb.min.y);
            double foot = ix * iy;
            bool contact = false;
            if (foot > 0.0 && foot / (fa < fb ? fa : fb) >= cfg.horizontal_overlap_min) {
                if (std::fabs(a.aabb.min.z - b.aabb.max.z) <= cfg.contact_tolerance) {
                    r.edges.insert({a.id, gsr::Predicate::Ontop, b.id});
                    contact = true;
                } else if (std::fabs(b.aabb.min.z - a.aabb.max.z) <= cfg.contact_tolerance) {
                    r.edges.insert({b.id, gsr::Predicate::Ontop, a.id});
                    contact = true;
                }
            }
            if (contact) continue;

            // proximity last
            double cax = (a.aabb.min.x + a.aabb.max.x) / 2 - (b.aabb.min.x + b.aabb.max.x) / 2;
            double cay = (a.aabb.min.y + a.aabb.max.y) / 2 - (b.aabb.min.y + b.aabb.max.y) / 2;
            bool z_touch = a.aabb.min.z <= b.aabb.max.z && b.aabb.min.z <= a.aabb.max.z;
            if (std::sqrt(cax * cax + cay * cay) <= cfg.beside_max_center_dist && z_touch)
                r.edges.insert({std::min(a.id, b.id), gsr::Predicate::Beside, std::max(a.id, b.id)});
        }
    }

    for (const gsr::ObjectNode& n : objects) {
        if (!n.articulation) continue;
        r.states.insert({n.id, n.articulation->joint_value > n.articulation->open_threshold
                                   ? "open"
                                   : "closed"});
    }

    if (robot.gripper_value > robot.gripper_threshold && robot.held_object) {
        for (const gsr::ObjectNode& n : objects)
            if (n.id == *robot.held_object)
                r.edges.insert({gsr::kRobotId, gsr::Predicate::Holding, n.id});
    }
    return r;
}

}  // namespace test_oracle
