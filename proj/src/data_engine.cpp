#include "gsr/data_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gsr/errors.hpp"
#include "gsr/graph_ops.hpp"
#include "gsr/serialize.hpp"
#include "gsr/world.hpp"

namespace gsr {

using nlohmann::json;
using nlohmann::ordered_json;

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Grounding: return "grounding";
        case Modality::WorldModeling: return "world_modeling";
        case Modality::ForwardReasoning: return "forward_reasoning";
        case Modality::GoalPlanning: return "goal_planning";
        case Modality::GoalInterpretation: return "goal_interpretation";
    }
    return "?";
}

std::optional<Modality> modality_from_name(const std::string& name) {
    for (Modality m : {Modality::Grounding, Modality::WorldModeling, Modality::ForwardReasoning,
                       Modality::GoalPlanning, Modality::GoalInterpretation})
        if (name == modality_name(m)) return m;
    return std::nullopt;
}

ordered_json record_to_json(const DataRecord& r) {
    ordered_json j;
    j["modality"] = modality_name(r.modality);
    j["input"] = r.input;
    j["output"] = r.output;
    ordered_json meta;
    meta["source"] = r.source_id;
    if (r.step >= 0) meta["step"] = r.step;
    if (r.horizon > 0) meta["horizon"] = r.horizon;
    meta["tags"] = r.tags;
    j["meta"] = meta;
    return j;
}

// --- trajectory json --------------------------------------------------------

ordered_json trajectory_to_json(const Trajectory& traj) {
    ordered_json j;
    j["id"] = traj.id;
    j["instruction"] = traj.instruction;
    ordered_json steps = ordered_json::array();
    for (const TrajectoryStep& s : traj.steps)
        steps.push_back(
            {{"scene_graph", scene_graph_to_json(s.graph)}, {"action", format_command(s.action)}});
    j["steps"] = steps;
    j["final_scene_graph"] = scene_graph_to_json(traj.final_graph);
    j["provenance"] = traj.provenance;
    return j;
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory t;
    t.id = j.value("id", std::string());
    t.instruction = j.value("instruction", std::string());
    if (j.contains("steps")) {
        for (const json& s : j["steps"]) {
            TrajectoryStep step;
            step.graph = scene_graph_from_json(s.at("scene_graph"));
            auto cmd = parse_command(s.at("action").get<std::string>());
            if (!cmd) throw SchemaError("unparseable trajectory action: " + s.at("action").dump());
            step.action = *cmd;
            t.steps.push_back(std::move(step));
        }
    }
    if (j.contains("final_scene_graph")) t.final_graph = scene_graph_from_json(j["final_scene_graph"]);
    t.provenance = j.value("provenance", std::string("import"));
    return t;
}

// --- extractors -------------------------------------------------------------

namespace {

const SceneGraph& graph_at(const Trajectory& traj, size_t idx) {
    return idx < traj.steps.size() ? traj.steps[idx].graph : traj.final_graph;
}

bool step_consistent(const Trajectory& traj, size_t t) {
    try {
        SceneGraph predicted = transition(traj.steps[t].graph, traj.steps[t].action);
        return relationally_equal(predicted, graph_at(traj, t + 1));
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

std::vector<DataRecord> world_modeling_samples(const Trajectory& traj) {
    std::vector<DataRecord> out;
    bool verify = traj.provenance != "engine";
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        if (verify && !step_consistent(traj, t)) {
            std::fprintf(stderr, "[data-engine] %s step %zu inconsistent, flagged\n",
                         traj.id.c_str(), t);
            continue;
        }
        DataRecord r;
        r.modality = Modality::WorldModeling;
        r.input["scene_graph"] = serialize(traj.steps[t].graph);
        r.input["action"] = format_command(traj.steps[t].action);
        r.output["delta"] = edge_delta_to_json(diff(traj.steps[t].graph, graph_at(traj, t + 1)));
        r.source_id = traj.id;
        r.step = static_cast<int>(t);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DataRecord> forward_reasoning_samples(const Trajectory& traj,
                                                  const std::vector<int>& horizons) {
    std::vector<int> hs;
    for (int n : horizons) {
        if (n == 0) n = static_cast<int>(traj.steps.size());
        if (n >= 1 && n <= static_cast<int>(traj.steps.size())) hs.push_back(n);
    }
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());

    std::vector<DataRecord> out;
    for (int n : hs) {
        for (size_t t = 0; t + n <= traj.steps.size(); ++t) {
            DataRecord r;
            r.modality = Modality::ForwardReasoning;
            r.input["scene_graph"] = serialize(traj.steps[t].graph);
            r.input["target_scene_graph"] = serialize(graph_at(traj, t + n));
            ordered_json actions = ordered_json::array();
            for (size_t k = t; k < t + n; ++k) actions.push_back(format_command(traj.steps[k].action));
            r.output["actions"] = actions;
            r.source_id = traj.id;
            r.step = static_cast<int>(t);
            r.horizon = n;
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<DataRecord> goal_planning_samples(const Trajectory& traj) {
    if (traj.instruction.empty()) throw NoInstruction();
    std::vector<DataRecord> out;
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        DataRecord r;
        r.modality = Modality::GoalPlanning;
        r.input["scene_graph"] = serialize(traj.steps[t].graph);
        r.input["instruction"] = traj.instruction;
        r.output["action"] = format_command(traj.steps[t].action);
        r.source_id = traj.id;
        r.step = static_cast<int>(t);
        out.push_back(std::move(r));
    }
    return out;
}

DataRecord goal_interpretation_sample(const Trajectory& traj) {
    if (traj.instruction.empty()) throw NoInstruction();
    DataRecord r;
    r.modality = Modality::GoalInterpretation;
    r.input["scene_graph"] = serialize(traj.steps.empty() ? traj.final_graph : traj.steps[0].graph);
    r.input["instruction"] = traj.instruction;
    r.output["goal_scene_graph"] = serialize(traj.final_graph);
    r.source_id = traj.id;
    return r;
}

std::vector<DataRecord> grounding_samples(const Trajectory& traj) {
    std::vector<DataRecord> out;
    std::vector<std::string> seen;
    auto emit = [&](const SceneGraph& g, int step) {
        std::string text = serialize(g);
        if (std::find(seen.begin(), seen.end(), text) != seen.end()) return;
        seen.push_back(text);
        DataRecord r;
        r.modality = Modality::Grounding;
        r.input["description"] = describe_scene(g);
        r.output["scene_graph"] = text;
        r.source_id = traj.id;
        r.step = step;
        out.push_back(std::move(r));
    };
    for (size_t t = 0; t < traj.steps.size(); ++t) emit(traj.steps[t].graph, static_cast<int>(t));
    emit(traj.final_graph, static_cast<int>(traj.steps.size()));
    return out;
}

std::vector<DataRecord> planning_family_samples(const Trajectory& traj) {
    std::vector<DataRecord> out = world_modeling_samples(traj);
    std::vector<DataRecord> fr = forward_reasoning_samples(traj, {1});
    std::vector<DataRecord> gp = goal_planning_samples(traj);
    out.insert(out.end(), std::make_move_iterator(fr.begin()), std::make_move_iterator(fr.end()));
    out.insert(out.end(), std::make_move_iterator(gp.begin()), std::make_move_iterator(gp.end()));
    return out;
}

std::string describe_scene(const SceneGraph& sg) {
    std::ostringstream os;
    os << "The scene contains";
    bool first = true;
    for (const auto& [id, node] : sg.nodes) {
        os << (first ? " " : ", ");
        first = false;
        std::string color = node.attribute("color");
        if (!color.empty()) os << "a " << color << ' ' << node.category << ' ' << id;
        else os << "a " << node.category << ' ' << id;
    }
    os << ". ";
    for (const RelationEdge& e : sg.edges) {
        if (e.predicate == Predicate::Holding) continue;
        os << e.subject;
        switch (e.predicate) {
            case Predicate::Ontop: os << " is on top of "; break;
            case Predicate::Inside: os << " is inside "; break;
            case Predicate::Beside: os << " is beside "; break;
            case Predicate::Holding: break;
        }
        os << e.object << ". ";
    }
    for (const UnaryFact& f : sg.unary_facts()) os << f.node << " is " << f.state << ". ";
    if (sg.robot.held_object) os << "The robot is holding " << *sg.robot.held_object << ".";
    else os << "The robot gripper is empty.";
    return os.str();
}

SceneGraph clean(const std::string& sg_text) { return normalize(parse_scene_graph(sg_text)); }

// --- augmentation -----------------------------------------------------------

SynonymTable load_synonyms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synonym table: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error("bad synonym table " + path + ": " + e.what());
    }
    SynonymTable t;
    for (auto it = j.begin(); it != j.end(); ++it) t.mapping[it.key()] = it.value().get<std::string>();
    return t;
}

std::string template_rephrase(const std::string& text, int variant) {
    if (variant <= 0 || text.empty()) return text;
    std::string lowered = text;
    lowered[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lowered[0])));
    if (variant == 1) return "Your task: " + lowered;
    return "Please make sure of the following. " + text;
}

namespace {

bool id_token(const std::string& tok, std::string& category, int& index) {
    if (!valid_node_id(tok)) return false;
    size_t us = tok.rfind('_');
    category = tok.substr(0, us);
    index = std::stoi(tok.substr(us + 1));
    return true;
}

// Builds the whole-token renaming for one record: node ids change category
// with consistent re-indexing, bare category words map directly. Returns
// false on an id collision (the variant is then skipped and logged).
bool build_renamer(const std::vector<std::string>& texts, const SynonymTable& table,
                   std::map<std::string, std::string>& out) {
    // collect every id-looking token
    std::set<std::string> ids;
    for (const std::string& text : texts) {
        size_t i = 0;
        while (i < text.size()) {
            if (std::islower(static_cast<unsigned char>(text[i]))) {
                size_t j = i;
                while (j < text.size() &&
                       (std::islower(static_cast<unsigned char>(text[j])) ||
                        std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                    ++j;
                std::string tok = text.substr(i, j - i);
                if (valid_node_id(tok)) ids.insert(tok);
                i = j;
            } else {
                ++i;
            }
        }
    }

    // indices that stay occupied per category (ids whose category is unmapped)
    std::map<std::string, std::set<int>> occupied;
    for (const std::string& id : ids) {
        std::string cat;
        int index = 0;
        id_token(id, cat, index);
        if (!table.mapping.count(cat)) occupied[cat].insert(index);
    }

    std::map<std::string, int> cursor;
    for (const std::string& id : ids) {
        std::string cat;
        int index = 0;
        id_token(id, cat, index);
        auto it = table.mapping.find(cat);
        if (it == table.mapping.end()) continue;
        const std::string& target = it->second;
        int& next = cursor[target];
        ++next;
        while (occupied[target].count(next)) ++next;
        if (next > 99) return false;  // two-digit index space exhausted
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%s_%02d", target.c_str(), next);
        if (ids.count(buf) && !table.mapping.count(target)) return false;  // collision
        out[id] = buf;
    }
    return true;
}

std::string apply_renamer(const std::string& text, const std::map<std::string, std::string>& renames,
                          const SynonymTable& table) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        if (std::islower(static_cast<unsigned char>(text[i])) &&
            (i == 0 || !(std::isalnum(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '_'))) {
            size_t j = i;
            while (j < text.size() &&
                   (std::islower(static_cast<unsigned char>(text[j])) ||
                    std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            std::string tok = text.substr(i, j - i);
            auto rit = renames.find(tok);
            if (rit != renames.end()) {
                out += rit->second;
            } else {
                auto cit = table.mapping.find(tok);
                out += cit != table.mapping.end() ? cit->second : tok;
            }
            i = j;
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    return out;
}

void swap_strings(ordered_json& j, const std::map<std::string, std::string>& renames,
                  const SynonymTable& table) {
    if (j.is_string()) {
        j = apply_renamer(j.get<std::string>(), renames, table);
    } else if (j.is_object() || j.is_array()) {
        for (auto& item : j) swap_strings(item, renames, table);
    }
}

std::vector<std::string> collect_strings(const ordered_json& j) {
    std::vector<std::string> out;
    if (j.is_string()) out.push_back(j.get<std::string>());
    else if (j.is_object() || j.is_array())
        for (const auto& item : j) {
            std::vector<std::string> inner = collect_strings(item);
            out.insert(out.end(), inner.begin(), inner.end());
        }
    return out;
}

std::string shuffle_lines(const std::string& text, Rng& rng) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    rng.shuffle(lines);
    std::ostringstream os;
    for (const std::string& l : lines) os << l << '\n';
    return os.str();
}

struct FieldVariants {
    // per graph-bearing input field: shuffle variants of the serialized text
    std::map<std::string, std::vector<std::string>> input_fields;
    std::vector<std::string> output_scene;  // grounding output variants
    std::vector<std::string> end_states;    // interpretation output variants
};

}  // namespace

std::vector<AuditRow> augment(const std::vector<DataRecord>& base, const AugmentationPlan& plan,
                              const RecordSink& sink) {
    std::map<Modality, size_t> base_count, final_count;
    size_t collisions = 0;

    for (size_t idx = 0; idx < base.size(); ++idx) {
        const DataRecord& rec = base[idx];
        ++base_count[rec.modality];

        bool grounding = rec.modality == Modality::Grounding;
        bool interpretation = rec.modality == Modality::GoalInterpretation;
        int n_para = grounding ? plan.paraphrase : 1;
        int n_shuffle = plan.shuffle;
        int n_swap = plan.swap;
        int n_rephrase = grounding ? 1 : plan.rephrase;
        int n_end = interpretation ? plan.end_state : 1;

        // Pre-render the shuffle variants of every graph-bearing field.
        FieldVariants fv;
        for (const char* key : {"scene_graph", "target_scene_graph"}) {
            if (!rec.input.contains(key)) continue;
            std::string canon = rec.input[key].get<std::string>();
            SceneGraph g = parse_scene_graph(canon);
            std::vector<std::string> variants{canon};
            for (int s = 1; s < n_shuffle; ++s) {
                Rng r(hash_combine(hash_combine(plan.seed, idx), fnv1a(key) + static_cast<uint64_t>(s)));
                variants.push_back(serialize_shuffled(g, r));
            }
            fv.input_fields[key] = std::move(variants);
        }
        if (grounding && rec.output.contains("scene_graph")) {
            std::string canon = rec.output["scene_graph"].get<std::string>();
            SceneGraph g = parse_scene_graph(canon);
            fv.output_scene.push_back(canon);
            for (int s = 1; s < n_shuffle; ++s) {
                Rng r(hash_combine(hash_combine(plan.seed, idx), fnv1a("out") + s));
                fv.output_scene.push_back(serialize_shuffled(g, r));
            }
        }
        if (interpretation && rec.output.contains("goal_scene_graph")) {
            std::string canon = rec.output["goal_scene_graph"].get<std::string>();
            SceneGraph g = parse_scene_graph(canon);
            Rng r(hash_combine(hash_combine(plan.seed, idx), fnv1a("end")));
            fv.end_states.push_back(canon);
            fv.end_states.push_back(serialize_shuffled(g, r));
            std::string prompt = to_prompt_text(g);
            fv.end_states.push_back(prompt);
            fv.end_states.push_back(shuffle_lines(prompt, r));
        }

        // The rename map depends only on the record's id set, which no other
        // transform changes; build it once per record.
        std::map<std::string, std::string> renames;
        bool renames_ok = true;
        if (n_swap > 1) {
            std::vector<std::string> texts = collect_strings(rec.input);
            std::vector<std::string> more = collect_strings(rec.output);
            texts.insert(texts.end(), more.begin(), more.end());
            renames_ok = build_renamer(texts, plan.synonyms, renames);
        }

        for (int p = 0; p < n_para; ++p)
            for (int s = 0; s < n_shuffle; ++s)
                for (int w = 0; w < n_swap; ++w)
                    for (int rp = 0; rp < n_rephrase; ++rp)
                        for (int e = 0; e < n_end; ++e) {
                            DataRecord v = rec;
                            for (auto& [key, variants] : fv.input_fields)
                                v.input[key] = variants[static_cast<size_t>(s)];
                            if (grounding && !fv.output_scene.empty())
                                v.output["scene_graph"] = fv.output_scene[static_cast<size_t>(s)];
                            if (interpretation && !fv.end_states.empty())
                                v.output["goal_scene_graph"] = fv.end_states[static_cast<size_t>(e)];
                            if (p > 0 && v.input.contains("description"))
                                v.input["description"] = plan.rephraser(
                                    rec.input["description"].get<std::string>(), p);
                            if (rp > 0 && v.input.contains("instruction"))
                                v.input["instruction"] = plan.rephraser(
                                    rec.input["instruction"].get<std::string>(), rp);
                            if (w > 0) {
                                if (!renames_ok) {
                                    ++collisions;
                                    continue;
                                }
                                swap_strings(v.input, renames, plan.synonyms);
                                swap_strings(v.output, renames, plan.synonyms);
                            }
                            if (grounding) v.tags.push_back("paraphrase:" + std::to_string(p));
                            v.tags.push_back("shuffle:" + std::to_string(s));
                            v.tags.push_back("swap:" + std::to_string(w));
                            if (!grounding) v.tags.push_back("rephrase:" + std::to_string(rp));
                            if (interpretation) v.tags.push_back("end_state:" + std::to_string(e));
                            ++final_count[rec.modality];
                            sink(v);
                        }
    }

    std::vector<AuditRow> rows;
    auto methods = [&](Modality m) -> std::string {
        char buf[160];
        switch (m) {
            case Modality::Grounding:
                std::snprintf(buf, sizeof(buf), "Paraphrasing (%d) x Shuffling (%d) x Swapping (%d)",
                              plan.paraphrase, plan.shuffle, plan.swap);
                return buf;
            case Modality::GoalInterpretation:
                std::snprintf(buf, sizeof(buf),
                              "Shuffling (%d) x Swapping (%d) x Rephrasing (%d) x End-state (%d)",
                              plan.shuffle, plan.swap, plan.rephrase, plan.end_state);
                return buf;
            default:
                std::snprintf(buf, sizeof(buf), "Shuffling (%d) x Swapping (%d) x Rephrasing (%d)",
                              plan.shuffle, plan.swap, plan.rephrase);
                return buf;
        }
    };
    for (Modality m : {Modality::Grounding, Modality::WorldModeling, Modality::ForwardReasoning,
                       Modality::GoalPlanning, Modality::GoalInterpretation}) {
        if (!base_count.count(m)) continue;
        AuditRow row;
        row.label = modality_name(m);
        row.base = base_count[m];
        row.methods = methods(m);
        size_t mult = 1;
        if (m == Modality::Grounding)
            mult = static_cast<size_t>(plan.paraphrase) * plan.shuffle * plan.swap;
        else if (m == Modality::GoalInterpretation)
            mult = static_cast<size_t>(plan.shuffle) * plan.swap * plan.rephrase * plan.end_state;
        else
            mult = static_cast<size_t>(plan.shuffle) * plan.swap * plan.rephrase;
        row.multiplier = mult;
        row.final_count = final_count[m];
        rows.push_back(std::move(row));
    }
    if (collisions > 0)
        std::fprintf(stderr, "[data-engine] %zu variant(s) skipped on synonym collisions\n",
                     collisions);
    return rows;
}

std::string render_audit(const std::vector<AuditRow>& rows) {
    // Merge the three planning modalities into one row when their bases
    // match ("x 3 Tasks" accounting).
    std::vector<AuditRow> merged;
    std::vector<AuditRow> planning;
    for (const AuditRow& r : rows) {
        if (r.label == "world_modeling" || r.label == "forward_reasoning" ||
            r.label == "goal_planning")
            planning.push_back(r);
        else
            merged.push_back(r);
    }
    if (planning.size() == 3 && planning[0].base == planning[1].base &&
        planning[1].base == planning[2].base) {
        AuditRow row;
        row.label = "planning (3 tasks)";
        row.base = planning[0].base;
        row.methods = planning[0].methods + " x 3 Tasks";
        row.multiplier = planning[0].multiplier * 3;
        row.final_count = planning[0].final_count + planning[1].final_count + planning[2].final_count;
        merged.insert(merged.begin() + (merged.empty() ? 0 : 1), row);
    } else {
        merged.insert(merged.end(), planning.begin(), planning.end());
    }

    std::ostringstream os;
    os << "data modality          | base size | augmentation methods                                        | multiplier | final\n";
    os << "-----------------------+-----------+-------------------------------------------------------------+------------+----------\n";
    for (const AuditRow& r : merged) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-22s | %9zu | %-59s | %9zux | %zu\n", r.label.c_str(),
                      r.base, r.methods.c_str(), r.multiplier, r.final_count);
        os << line;
    }
    return os.str();
}

}  // namespace gsr
