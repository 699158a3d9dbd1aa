#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/actions.hpp"
#include "gsr/scene_graph.hpp"

namespace gsr {

struct TrajectoryStep {
    SceneGraph graph;  // state before the action
    ActionCommand action;
};

struct Trajectory {
    std::string id;
    std::string instruction;
    std::vector<TrajectoryStep> steps;
    SceneGraph final_graph;
    std::string provenance;
};

nlohmann::ordered_json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace gsr
