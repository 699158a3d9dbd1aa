#include "gsr/actions.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace gsr {

const char* verb_name(Verb v) {
    switch (v) {
        case Verb::Pick: return "pick";
        case Verb::PlaceOn: return "place on";
        case Verb::PlaceInside: return "place inside";
        case Verb::Open: return "open";
        case Verb::Close: return "close";
        case Verb::TurnOn: return "turn on";
        case Verb::TurnOff: return "turn off";
        case Verb::Push: return "push";
        case Verb::End: return "end";
    }
    return "?";
}

std::string format_command(const ActionCommand& cmd) {
    if (cmd.verb == Verb::End) return "end";
    std::string out = std::string(verb_name(cmd.verb)) + " " + cmd.target;
    if (!cmd.keypoint.empty()) out += "[" + cmd.keypoint + "]";
    return out;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string strip_punct(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ';' || s.back() == ':' ||
                          s.back() == '!' || s.back() == '?' || s.back() == '"' || s.back() == '\''))
        s.pop_back();
    while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.erase(s.begin());
    return s;
}

struct VerbPhrase {
    const char* first;
    const char* second;  // nullptr for one-word verbs
    Verb verb;
};

// Two-word phrases are tried before one-word ones at each position so that
// "turn on" never parses as a bare "turn".
const VerbPhrase kPhrases[] = {
    {"place", "on", Verb::PlaceOn},     {"place", "inside", Verb::PlaceInside},
    {"put", "on", Verb::PlaceOn},       {"put", "inside", Verb::PlaceInside},
    {"turn", "on", Verb::TurnOn},       {"turn", "off", Verb::TurnOff},
    {"task", "end", Verb::End},         {"pick", nullptr, Verb::Pick},
    {"open", nullptr, Verb::Open},      {"close", nullptr, Verb::Close},
    {"push", nullptr, Verb::Push},      {"end", nullptr, Verb::End},
};

std::optional<std::pair<Verb, size_t>> match_verb(const std::vector<std::string>& words, size_t i) {
    for (const VerbPhrase& p : kPhrases) {
        if (words[i] != p.first) continue;
        if (p.second == nullptr) return std::make_pair(p.verb, size_t{1});
        if (i + 1 < words.size() && words[i + 1] == p.second) return std::make_pair(p.verb, size_t{2});
    }
    return std::nullopt;
}

// Splits a target token like "mug_01[handle]" into id and keypoint.
void split_keypoint(std::string& target, std::string& keypoint) {
    size_t lb = target.rfind('[');
    if (lb == std::string::npos || target.back() != ']') return;
    keypoint = target.substr(lb + 1, target.size() - lb - 2);
    target = target.substr(0, lb);
}

void scan_segment(const std::string& segment, std::vector<ActionCommand>& out) {
    std::vector<std::string> raw_words;
    std::istringstream is(segment);
    std::string w;
    while (is >> w) {
        // tolerated "LLM:" prefix, with or without a following space
        if (lower(w).rfind("llm:", 0) == 0) w = w.substr(4);
        std::string stripped = strip_punct(w);
        if (lower(stripped) == "llm") continue;
        if (stripped.empty()) continue;
        raw_words.push_back(stripped);
    }
    std::vector<std::string> words;
    words.reserve(raw_words.size());
    for (const std::string& word : raw_words) words.push_back(lower(word));

    size_t i = 0;
    while (i < words.size()) {
        auto m = match_verb(words, i);
        if (!m) {
            ++i;
            continue;
        }
        auto [verb, used] = *m;
        size_t start = i + used;
        // Target runs to the next verb phrase or end of segment.
        size_t stop = start;
        while (stop < words.size() && !match_verb(words, stop)) ++stop;

        if (verb == Verb::End) {
            if (start == stop) out.push_back(command(Verb::End));
            // "end" with trailing words ("end of the task") is not a command
            i = start;
            continue;
        }
        if (stop > start) {
            std::string target;
            for (size_t k = start; k < stop; ++k) {
                if (!target.empty()) target += ' ';
                target += raw_words[k];
            }
            std::string keypoint;
            split_keypoint(target, keypoint);
            out.push_back(command(verb, target, keypoint));
        }
        i = stop;
    }
}

}  // namespace

std::vector<ActionCommand> scan_commands(const std::string& text) {
    std::vector<ActionCommand> out;
    std::string segment;
    auto flush = [&] {
        if (!segment.empty()) scan_segment(segment, out);
        segment.clear();
    };

    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        size_t i = 0;
        while (i < line.size()) {
            char c = line[i];
            if (c == ',' || c == ';' || c == '.') {
                flush();
                ++i;
                continue;
            }
            // the word "then" is a separator
            if ((c == 't' || c == 'T') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
                std::string word;
                size_t k = i;
                while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])) &&
                       line[k] != ',' && line[k] != ';' && line[k] != '.')
                    word.push_back(line[k++]);
                if (lower(word) == "then") {
                    flush();
                    i = k;
                    continue;
                }
            }
            segment.push_back(c);
            ++i;
        }
        flush();  // newline separates
    }
    flush();
    return out;
}

std::optional<ActionCommand> parse_command(const std::string& text) {
    std::vector<ActionCommand> cmds = scan_commands(text);
    if (cmds.size() != 1) return std::nullopt;
    return cmds[0];
}

}  // namespace gsr
