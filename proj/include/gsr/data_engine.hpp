#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/trajectory.hpp"

namespace gsr {

enum class Modality { Grounding, WorldModeling, ForwardReasoning, GoalPlanning, GoalInterpretation };

const char* modality_name(Modality m);
std::optional<Modality> modality_from_name(const std::string& name);

// One training sample. input/output are the modality-specific bundles;
// graphs travel as serialized text inside them.
struct DataRecord {
    Modality modality = Modality::Grounding;
    nlohmann::ordered_json input;
    nlohmann::ordered_json output;
    std::string source_id;
    int step = -1;
    int horizon = 0;
    std::vector<std::string> tags;
};

nlohmann::ordered_json record_to_json(const DataRecord& r);

// --- extractors -------------------------------------------------------------

// (SG_t, A_t) -> edge delta, one record per step; the last step pairs with
// the final graph. Non-engine trajectories are verified step by step and
// inconsistent steps are flagged (skipped) rather than emitted.
std::vector<DataRecord> world_modeling_samples(const Trajectory& traj);

// (SG_t, SG_{t+n}) -> action sequence, for every valid (t, n). Horizons
// beyond the trajectory length are skipped; 0 entries select the full
// length.
std::vector<DataRecord> forward_reasoning_samples(const Trajectory& traj,
                                                  const std::vector<int>& horizons = {1, 2, 3, 0});

// (SG_t, instruction) -> A_t, one per step. Throws NoInstruction.
std::vector<DataRecord> goal_planning_samples(const Trajectory& traj);

// (SG_0, instruction) -> final graph. Throws NoInstruction.
DataRecord goal_interpretation_sample(const Trajectory& traj);

// Text -> SG pairs over the distinct graphs of a trajectory.
std::vector<DataRecord> grounding_samples(const Trajectory& traj);

// One world-modeling + one single-step forward-reasoning + one
// goal-planning record per step; the three bases are equal by construction,
// which is what the 36x planning multiplier in the audit assumes.
std::vector<DataRecord> planning_family_samples(const Trajectory& traj);

// Deterministic template description used as grounding input text.
std::string describe_scene(const SceneGraph& sg);

// Tolerant parse (aliases, duplicates, dangling endpoints) followed by
// normalize; the cleaning pass applied to external scene-graph text.
SceneGraph clean(const std::string& sg_text);

// --- augmentation -----------------------------------------------------------

struct SynonymTable {
    // category -> replacement category; ids are re-indexed consistently
    std::map<std::string, std::string> mapping;
};

SynonymTable load_synonyms(const std::string& path);  // throws Error on bad file

// text in -> text out; variant >= 1 selects the alternative phrasings. The
// pipeline accepts any callable here (an external service hook); this
// built-in keeps runs offline and deterministic.
using Rephraser = std::function<std::string(const std::string& text, int variant)>;
std::string template_rephrase(const std::string& text, int variant);

struct AugmentationPlan {
    int shuffle = 3;    // graph-order variants (1 canonical + n-1 reorderings)
    int swap = 2;       // 1 original + 1 synonym pass
    int rephrase = 2;   // instruction variants (planning/interpretation)
    int paraphrase = 3; // description variants (grounding)
    int end_state = 4;  // goal-graph serialization variants (interpretation)
    uint64_t seed = 0;
    SynonymTable synonyms;
    Rephraser rephraser = template_rephrase;
};

struct AuditRow {
    std::string label;
    size_t base = 0;
    std::string methods;
    size_t multiplier = 0;
    size_t final_count = 0;
};

using RecordSink = std::function<void(const DataRecord&)>;

// Streams every augmented variant of every base record into the sink and
// returns the per-modality audit. Emitted counts are exactly
// base x multiplier except for logged synonym collisions.
std::vector<AuditRow> augment(const std::vector<DataRecord>& base, const AugmentationPlan& plan,
                              const RecordSink& sink);

// The base/methods/multiplier/final table; the three planning modalities
// merge into one row when their bases are equal.
std::string render_audit(const std::vector<AuditRow>& rows);

}  // namespace gsr
