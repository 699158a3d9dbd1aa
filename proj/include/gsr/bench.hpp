#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/agents.hpp"
#include "gsr/rng.hpp"
#include "gsr/trajectory.hpp"
#include "gsr/world.hpp"

namespace gsr {

enum class Suite { SOD, SAS, GCG };
enum class Level { Easy, General, Complex };

const char* suite_name(Suite s);
const char* level_name(Level l);
std::optional<Suite> suite_from_name(const std::string& name);
std::optional<Level> level_from_name(const std::string& name);  // accepts simple/medium/hard aliases

inline constexpr int kSeedsPerCell = 20;  // 3 suites x 3 levels x 20 = 180 tasks

struct TaskSpec {
    Suite suite = Suite::SOD;
    Level level = Level::Easy;
    uint64_t seed = 0;
    SceneGraph initial;
    GoalSpec goal;
    std::string instruction;
    int step_budget = 0;
};

// Procedural task generation. Deterministic: the same (suite, level, seed)
// yields a byte-identical spec. Generation is total; solvability is the
// oracle's contract (see generate_validated_task).
TaskSpec generate_task(Suite suite, Level level, uint64_t seed);

// generate_task plus an oracle rollout; throws Error when the oracle cannot
// reach success within the step budget.
TaskSpec generate_validated_task(Suite suite, Level level, uint64_t seed,
                                 const EngineConfig& cfg = {});

nlohmann::ordered_json task_to_json(const TaskSpec& task);

// Satisfied fraction of the expanded goal facts; an empty goal counts as
// complete. Success (all facts) is exactly task_progress == 1.
double task_progress(const SceneGraph& final_graph, const GoalSpec& goal);

enum class FlipMode { PredicateSubstitution, DirectionReversal };

// Observation noise: ceil(noise_ratio * |spatial edges|) distinct spatial
// edges are each dropped (p = 0.5) or flipped; holding edges and unary
// states are never touched; the result is re-normalized. Flip substitutes a
// different spatial predicate with endpoints kept (the default reading) or
// reverses the direction (DirectionReversal).
SceneGraph perturb(const SceneGraph& sg, double noise_ratio, Rng& rng,
                   FlipMode mode = FlipMode::PredicateSubstitution);

enum class Termination { AgentEnd, BudgetExhausted, AgentError };
const char* termination_name(Termination t);

struct StepRecord {
    std::string raw_response;
    bool parsed = false;  // false: the step consumed budget without executing
    ActionCommand cmd;
    ExecutionResult exec;
};

struct EpisodeResult {
    Suite suite = Suite::SOD;
    Level level = Level::Easy;
    uint64_t seed = 0;
    int trial = 0;
    double noise_ratio = 0.0;
    std::string agent_id;
    bool success = false;
    double progress = 0.0;
    int steps_used = 0;
    Termination termination = Termination::BudgetExhausted;
    std::vector<StepRecord> steps;
    std::optional<Trajectory> trajectory;  // only successful executions, plus end
};

struct EpisodeOptions {
    double noise_ratio = 0.0;
    bool noise_per_episode = false;  // default: resample each step
    FlipMode flip_mode = FlipMode::PredicateSubstitution;
    bool record_trajectory = false;
    EngineConfig engine;
};

// Runs one episode: per step the agent sees the (possibly perturbed)
// serialized graph while commands execute against the true graph. An
// unparseable response consumes the step; a transport failure aborts the
// episode with AgentError.
EpisodeResult run_episode(const TaskSpec& task, Agent& agent, Rng& rng,
                          const EpisodeOptions& opts = {});

}  // namespace gsr
