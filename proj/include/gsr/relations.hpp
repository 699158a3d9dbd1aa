#pragma once

#include <vector>

#include "gsr/scene_graph.hpp"

namespace gsr {

// Thresholds of the geometric relation extraction. tau has no published
// value; 0.5 is this artifact's default. The beside distance is likewise a
// choice, flagged here so configs can override it.
struct ExtractionConfig {
    double ioa_threshold = 0.5;            // tau; IoA uses the smaller volume as denominator
    double horizontal_overlap_min = 0.25;  // footprint overlap ratio gate for ontop
    double contact_tolerance = 0.01;       // max vertical gap (m) for resting contact
    double beside_max_center_dist = 0.15;  // max horizontal center distance (m)
};

// Builds a canonical scene graph from geometric object state.
//
// Per unordered pair the case ladder is: containment by IoA of the
// smaller-volume box, else resting contact (ontop of the higher object),
// else proximity (beside, lexicographically smaller subject). Pairs linked
// by a children chain are never spatially related; the parent-child
// relation is structural. Articulated nodes get open/closed from their
// joint value; a grasping gripper produces the holding edge.
//
// Throws DuplicateNode on repeated ids and DegenerateGeometry on
// zero-volume boxes.
SceneGraph extract_relations(const std::vector<ObjectNode>& objects, const RobotState& robot,
                             const ExtractionConfig& cfg = {});

}  // namespace gsr
