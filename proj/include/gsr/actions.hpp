#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsr/scene_graph.hpp"

namespace gsr {

enum class Verb { Pick, PlaceOn, PlaceInside, Open, Close, TurnOn, TurnOff, Push, End };

const char* verb_name(Verb v);  // canonical text form: "place on", "turn off", ...

// One atomic "action type + target object" primitive. target is free text
// as produced by an agent (grounding is the grader's concern); keypoint is
// the optional bracket qualifier in "pick mug_01[handle]".
struct ActionCommand {
    Verb verb = Verb::End;
    std::string target;
    std::string keypoint;

    auto operator<=>(const ActionCommand&) const = default;
};

inline ActionCommand command(Verb v, std::string target = {}, std::string keypoint = {}) {
    return ActionCommand{v, std::move(target), std::move(keypoint)};
}

// Canonical text form, e.g. "pick cube_01", "place on box_01", "end".
std::string format_command(const ActionCommand& cmd);

// Scans free-form text for occurrences of the command grammar. Verbs are
// case-insensitive; "put" aliases "place", "task end" aliases "end"; "LLM:"
// prefixes are stripped; commas, semicolons, periods, newlines and the word
// "then" separate commands; text around matches is ignored. Returns all
// matches in order (possibly none).
std::vector<ActionCommand> scan_commands(const std::string& text);

// Strict single-command parse: the text must contain exactly one command.
std::optional<ActionCommand> parse_command(const std::string& text);

}  // namespace gsr
