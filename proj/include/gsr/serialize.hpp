#pragma once

#include <string>

#include <json.hpp>

#include "gsr/rng.hpp"
#include "gsr/scene_graph.hpp"

namespace gsr {

enum class TextFormat { Structured, PromptText };

// Canonical serialization. Structured is the JSON wire schema (nodes,
// edges, robot; unary states appear in the edges array with object null);
// nodes and edges are sorted lexicographically so identical graphs yield
// identical bytes. PromptText is a sorted line-per-fact rendering meant for
// prompts; it is not parseable back.
std::string serialize(const SceneGraph& sg, TextFormat format = TextFormat::Structured);

// Structured serialization with node/edge order permuted by rng. The
// semantic content is unchanged; used by the shuffle augmentation.
std::string serialize_shuffled(const SceneGraph& sg, Rng& rng);

// Parses the structured format. Tolerates alias predicates, unary facts in
// the edges array, missing optional fields and arbitrary field order. Does
// NOT canonicalize; run normalize() when the source is untrusted.
// Throws ParseError (with line/column) on malformed text, SchemaError on
// well-formed JSON of the wrong shape, UnknownPredicate on bad tokens.
SceneGraph parse_scene_graph(const std::string& text);

nlohmann::ordered_json scene_graph_to_json(const SceneGraph& sg);
SceneGraph scene_graph_from_json(const nlohmann::json& j);

nlohmann::ordered_json edge_delta_to_json(const EdgeDelta& d);
EdgeDelta edge_delta_from_json(const nlohmann::json& j);

std::string to_prompt_text(const SceneGraph& sg);

}  // namespace gsr
