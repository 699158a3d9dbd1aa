#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gsr/actions.hpp"
#include "gsr/world.hpp"

namespace gsr {

struct PolicyQuery {
    std::string observation;  // serialized scene graph, possibly perturbed
    std::string instruction;
    std::vector<std::pair<std::string, bool>> history;  // (command text, sigma)
    int step = 0;
    int budget = 0;
};

struct PolicyResponse {
    std::string text;       // graded by the reward-engine parser
    std::string reasoning;  // logged, never interpreted
    bool transport_failure = false;
    std::string error;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual PolicyResponse act(const PolicyQuery& query) = 0;
    virtual std::string id() const = 0;
};

// Deterministic prompt rendering: instruction block, prompt-text scene
// block, history block, output contract. Identical queries yield identical
// bytes.
std::string format_prompt(const PolicyQuery& query);

// Greedy per-fact planner over the symbolic state space: breadth-first
// search (transition as successor function) to the nearest state that
// satisfies one more goal fact without breaking an already-satisfied one.
// Deterministic; ties break on verb order then lexicographic target id.
class OraclePlanner {
public:
    explicit OraclePlanner(GoalSpec goal, EngineConfig cfg = {}, size_t expansion_cap = 50000);

    // First action of the plan from this state; "end" when satisfied or
    // when no plan exists within the expansion cap.
    ActionCommand next_action(const SceneGraph& observed) const;

private:
    GoalSpec goal_;
    EngineConfig cfg_;
    size_t expansion_cap_;
};

class OracleAgent : public Agent {
public:
    explicit OracleAgent(GoalSpec goal, EngineConfig cfg = {}, size_t expansion_cap = 50000)
        : planner_(std::move(goal), cfg, expansion_cap) {}

    PolicyResponse act(const PolicyQuery& query) override;
    std::string id() const override { return "oracle"; }

private:
    OraclePlanner planner_;
};

// Test/utility agent replaying a fixed response sequence (repeats the last
// entry when exhausted).
class ScriptedAgent : public Agent {
public:
    explicit ScriptedAgent(std::vector<std::string> lines) : lines_(std::move(lines)) {}
    PolicyResponse act(const PolicyQuery&) override {
        std::string text = lines_.empty() ? "" : lines_[std::min(next_, lines_.size() - 1)];
        ++next_;
        return {text, "", false, ""};
    }
    std::string id() const override { return "scripted"; }

private:
    std::vector<std::string> lines_;
    size_t next_ = 0;
};

struct RemoteOptions {
    int timeout_ms = 10000;
    int retries = 2;  // R retries after the first attempt
};

// Bridges to an external policy over one of two transports carrying the
// same body: "http://host:port/path" (POST, JSON in/out) or
// "cmd:<command>" (one request line on stdin, one reply line on stdout per
// invocation). The reply document must carry {"response_text": str}.
class RemoteAgent : public Agent {
public:
    RemoteAgent(std::string endpoint, RemoteOptions opts = {});
    PolicyResponse act(const PolicyQuery& query) override;
    std::string id() const override { return "remote:" + endpoint_; }

private:
    std::string endpoint_;
    RemoteOptions opts_;
};

std::string policy_request_body(const PolicyQuery& query);

}  // namespace gsr
