#include "gsr/rewards.hpp"

namespace gsr {

std::vector<ActionCommand> parse_actions(const std::string& response) {
    return scan_commands(response);
}

double reward_step(const std::vector<ActionCommand>& parsed, const SceneGraph& sg,
                   const GoalSpec& goal, const RewardWeights& weights) {
    // The multi-step guard is checked first: trailing actions after a
    // correct END still count as open-loop planning.
    if (parsed.size() > 1) return -weights.alpha;
    if (parsed.size() == 1 && parsed[0].verb == Verb::End && satisfied(sg, goal)) return 1.0;
    return 0.0;
}

double reward_grounding(const std::vector<ActionCommand>& parsed, const SceneGraph& sg) {
    for (const ActionCommand& cmd : parsed) {
        if (cmd.verb == Verb::End) continue;
        if (!sg.has_node(cmd.target)) return 0.0;
    }
    return 1.0;
}

double reward_termination(const std::vector<ActionCommand>& parsed, const SceneGraph& sg,
                          const GoalSpec& goal, const RewardWeights& weights) {
    if (parsed.size() != 1 || parsed[0].verb != Verb::End) return 0.0;
    return satisfied(sg, goal) ? 1.0 : -weights.beta;
}

GradedResponse grade(const std::string& response, const SceneGraph& sg, const GoalSpec& goal,
                     const RewardWeights& weights) {
    GradedResponse g;
    g.raw = response;
    g.actions = parse_actions(response);
    g.action_count = static_cast<int>(g.actions.size());

    g.r_step = reward_step(g.actions, sg, goal, weights);
    g.r_grounding = reward_grounding(g.actions, sg);
    g.r_termination = reward_termination(g.actions, sg, goal, weights);
    g.r_total = weights.lambda_step * g.r_step + weights.lambda_grounding * g.r_grounding +
                weights.lambda_term * g.r_termination;

    bool goal_done = satisfied(sg, goal);
    if (g.action_count > 1) g.diagnostics.push_back("multi_step");
    if (g.r_grounding == 0.0) g.diagnostics.push_back("ungrounded_object");
    bool has_end = false;
    for (const ActionCommand& cmd : g.actions) has_end |= cmd.verb == Verb::End;
    if (g.action_count == 1 && has_end && !goal_done) g.diagnostics.push_back("premature_end");
    if (g.action_count >= 1 && !has_end && goal_done) g.diagnostics.push_back("missing_end");
    return g;
}

}  // namespace gsr
