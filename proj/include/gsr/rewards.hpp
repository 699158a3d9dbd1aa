#pragma once

#include <string>
#include <vector>

#include "gsr/actions.hpp"
#include "gsr/world.hpp"

namespace gsr {

struct RewardWeights {
    double lambda_step = 1.0;       // lambda_1
    double lambda_grounding = 1.0;  // lambda_2
    double lambda_term = 1.0;       // lambda_3
    double alpha = 0.5;             // multi-step penalty magnitude
    double beta = 1.0;              // wrong-termination penalty magnitude
};

struct GradedResponse {
    std::string raw;
    std::vector<ActionCommand> actions;
    int action_count = 0;  // N
    double r_step = 0.0;
    double r_grounding = 0.0;
    double r_termination = 0.0;
    double r_total = 0.0;
    std::vector<std::string> diagnostics;  // multi_step, ungrounded_object, premature_end, missing_end
};

// N(.) and the executable primitives found in a raw response.
std::vector<ActionCommand> parse_actions(const std::string& response);

// Step-wise constraint reward: -alpha when more than one primitive was
// emitted, 1 for a lone END with the goal satisfied, else 0.
double reward_step(const std::vector<ActionCommand>& parsed, const SceneGraph& sg,
                   const GoalSpec& goal, const RewardWeights& weights);

// Strict grounding: 1 iff every named target is a node id of the graph
// (END needs no target and counts as grounded, as does an empty parse).
double reward_grounding(const std::vector<ActionCommand>& parsed, const SceneGraph& sg);

// Termination reward: 1 for END on a satisfied goal, -beta for END on an
// unsatisfied one, 0 for any non-terminal step.
double reward_termination(const std::vector<ActionCommand>& parsed, const SceneGraph& sg,
                          const GoalSpec& goal, const RewardWeights& weights);

// Composes the three components with their weights and fills diagnostics.
// The grader never executes anything; it evaluates against the snapshot.
GradedResponse grade(const std::string& response, const SceneGraph& sg, const GoalSpec& goal,
                     const RewardWeights& weights = {});

}  // namespace gsr
