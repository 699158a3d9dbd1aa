#include "gsr/agents.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gsr/errors.hpp"
#include "gsr/serialize.hpp"

namespace gsr {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_prompt(const PolicyQuery& query) {
    std::ostringstream os;
    os << "Instruction: " << query.instruction << "\n\n";
    os << "Scene graph:\n";
    try {
        os << to_prompt_text(parse_scene_graph(query.observation));
    } catch (const Error&) {
        os << query.observation << '\n';
    }
    os << "\nHistory:\n";
    for (size_t i = 0; i < query.history.size(); ++i)
        os << (i + 1) << ". " << query.history[i].first << " -> "
           << (query.history[i].second ? "ok" : "failed") << '\n';
    os << "\nStep " << (query.step + 1) << " of " << query.budget
       << ". Respond with exactly one atomic action of the form '<verb> <target_id>' "
          "(pick, place on, place inside, open, close, turn on, turn off, push), or 'end' "
          "when the instruction is satisfied.\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// oracle planner
// ---------------------------------------------------------------------------

namespace {

std::string fixture_id(const SceneGraph& sg) {
    for (const auto& [id, node] : sg.nodes)
        if (node.attribute("fixed") == "true") return id;
    return {};
}

// Nodes an action could usefully touch while pursuing the unsatisfied
// facts: fact endpoints, their occluders, enclosing containers and open
// drawers above, expanded to a fixpoint.
std::set<std::string> relevance_set(const SceneGraph& sg, const std::vector<GoalFact>& unsat) {
    std::set<std::string> rel;
    auto add = [&](const std::string& id) {
        if (sg.has_node(id)) rel.insert(id);
    };
    for (const GoalFact& fact : unsat) {
        if (const RelationEdge* e = std::get_if<RelationEdge>(&fact)) {
            add(e->subject);
            add(e->object);
        } else {
            add(std::get<UnaryFact>(fact).node);
        }
    }
    if (sg.robot.held_object) add(*sg.robot.held_object);

    bool grew = true;
    while (grew) {
        grew = false;
        std::set<std::string> next = rel;
        for (const std::string& id : rel) {
            for (const RelationEdge& e : sg.edges) {
                if (e.predicate == Predicate::Ontop && e.object == id) next.insert(e.subject);
                if (e.predicate == Predicate::Inside && e.subject == id) next.insert(e.object);
            }
            const ObjectNode* n = sg.find(id);
            if (n == nullptr) continue;
            // sibling drawers above, open or not: closing/opening order matters
            std::string parent = sg.parent_of(id);
            if (!parent.empty() && n->articulation) {
                const ObjectNode* p = sg.find(parent);
                if (p != nullptr) {
                    double z = n->aabb.center().z;
                    for (const std::string& sib : p->children) {
                        const ObjectNode* s = sg.find(sib);
                        if (s != nullptr && s->aabb.center().z > z) next.insert(sib);
                    }
                }
            }
        }
        if (next.size() != rel.size()) {
            rel.swap(next);
            grew = true;
        }
    }
    return rel;
}

// Actions worth trying while pursuing `fact`: picks and lid/drawer motions
// over the relevance set, placements only where the fact wants the subject,
// parking on the fixture. Anything else cannot shorten a plan for this
// fact family.
std::vector<ActionCommand> candidate_actions(const SceneGraph& sg,
                                             const std::set<std::string>& relevant,
                                             const GoalFact& fact) {
    std::vector<ActionCommand> out;
    std::string table = fixture_id(sg);
    const RelationEdge* goal_edge = std::get_if<RelationEdge>(&fact);
    const UnaryFact* goal_state = std::get_if<UnaryFact>(&fact);

    for (const std::string& id : relevant) {
        const ObjectNode* n = sg.find(id);
        if (n == nullptr) continue;
        bool fixed = n->attribute("fixed") == "true";
        bool drawer = n->articulation && !sg.parent_of(id).empty();
        if (!fixed) out.push_back(command(Verb::Pick, id));
        if (n->articulation) out.push_back(command(Verb::Open, id));
        if (drawer) out.push_back(command(Verb::Close, id));
        if (goal_state != nullptr && id == goal_state->node) {
            if (goal_state->state == "on") out.push_back(command(Verb::TurnOn, id));
            if (goal_state->state == "off") out.push_back(command(Verb::TurnOff, id));
            if (goal_state->state == "closed" && n->articulation)
                out.push_back(command(Verb::Close, id));
        }
    }
    if (goal_edge != nullptr) {
        if (goal_edge->predicate == Predicate::Inside)
            out.push_back(command(Verb::PlaceInside, goal_edge->object));
        if (goal_edge->predicate == Predicate::Ontop)
            out.push_back(command(Verb::PlaceOn, goal_edge->object));
    }
    if (!table.empty()) out.push_back(command(Verb::PlaceOn, table));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct SearchNode {
    SceneGraph graph;
    int parent = -1;
    ActionCommand action;
};

}  // namespace

OraclePlanner::OraclePlanner(GoalSpec goal, EngineConfig cfg, size_t expansion_cap)
    : goal_(std::move(goal)), cfg_(cfg), expansion_cap_(expansion_cap) {}

namespace {

struct FactPlan {
    ActionCommand first;
    size_t length = 0;
    bool found = false;
};

// Shortest action sequence to a state where `fact` holds and no
// already-satisfied fact is broken. The search is restricted to actions on
// the fact's own relevance set; depth_bound stops the search once it cannot
// beat an already-found plan for another fact.
FactPlan plan_for_fact(const SceneGraph& start, const GoalFact& fact,
                       const std::vector<GoalFact>& facts, const std::set<size_t>& keep,
                       const EngineConfig& cfg, size_t cap, size_t depth_bound) {
    std::vector<ActionCommand> candidates =
        candidate_actions(start, relevance_set(start, {fact}), fact);

    auto reached = [&](const SceneGraph& g) {
        if (!fact_holds(g, fact)) return false;
        for (size_t i : keep)
            if (!fact_holds(g, facts[i])) return false;
        return true;
    };

    std::vector<SearchNode> nodes;
    nodes.push_back({start, -1, {}});
    std::set<std::string> visited{relational_key(start)};
    std::deque<int> frontier{0};
    std::vector<size_t> depth{0};

    while (!frontier.empty() && nodes.size() < cap) {
        int cur = frontier.front();
        frontier.pop_front();
        if (depth[static_cast<size_t>(cur)] + 1 >= depth_bound) continue;
        for (const ActionCommand& cmd : candidates) {
            if (!preconditions(nodes[cur].graph, cmd, cfg).ok()) continue;
            SceneGraph next;
            try {
                next = transition(nodes[cur].graph, cmd, cfg);
            } catch (const Error&) {
                continue;
            }
            if (!visited.insert(relational_key(next)).second) continue;
            nodes.push_back({std::move(next), cur, cmd});
            depth.push_back(depth[static_cast<size_t>(cur)] + 1);
            int idx = static_cast<int>(nodes.size()) - 1;
            if (reached(nodes[idx].graph)) {
                int at = idx;
                while (nodes[at].parent != 0) at = nodes[at].parent;
                return {nodes[at].action, depth[static_cast<size_t>(idx)], true};
            }
            frontier.push_back(idx);
        }
    }
    return {};
}

}  // namespace

ActionCommand OraclePlanner::next_action(const SceneGraph& observed) const {
    std::vector<GoalFact> facts = expand_goal(goal_, observed);

    std::set<size_t> start_sat;
    for (size_t i = 0; i < facts.size(); ++i)
        if (fact_holds(observed, facts[i])) start_sat.insert(i);
    if (start_sat.size() == facts.size()) return command(Verb::End);

    // greedy per-fact search: the nearest achievable fact wins, ties broken
    // by fact order (facts expand in lexicographic node order); the best
    // length so far bounds every later search
    FactPlan best;
    for (size_t i = 0; i < facts.size(); ++i) {
        if (start_sat.count(i)) continue;
        size_t bound = best.found ? best.length : expansion_cap_;
        FactPlan p = plan_for_fact(observed, facts[i], facts, start_sat, cfg_, expansion_cap_, bound);
        if (p.found && (!best.found || p.length < best.length)) best = p;
        if (best.found && best.length == 1) break;
    }
    if (best.found) return best.first;
    return command(Verb::End);  // no plan within the cap; graded as wrong termination
}

PolicyResponse OracleAgent::act(const PolicyQuery& query) {
    SceneGraph observed;
    try {
        observed = parse_scene_graph(query.observation);
    } catch (const Error& e) {
        return {"end", std::string("unparseable observation: ") + e.what(), false, ""};
    }
    ActionCommand next = planner_.next_action(observed);
    return {format_command(next), "", false, ""};
}

// ---------------------------------------------------------------------------
// remote agent
// ---------------------------------------------------------------------------

std::string policy_request_body(const PolicyQuery& query) {
    ordered_json body;
    body["prompt"] = format_prompt(query);
    try {
        body["scene_graph"] = json::parse(query.observation);
    } catch (const json::parse_error&) {
        body["scene_graph"] = query.observation;
    }
    body["instruction"] = query.instruction;
    ordered_json hist = ordered_json::array();
    for (const auto& [cmd, ok] : query.history) hist.push_back({{"command", cmd}, {"success", ok}});
    body["history"] = hist;
    body["meta"] = {{"step", query.step}, {"budget", query.budget}};
    return body.dump();
}

RemoteAgent::RemoteAgent(std::string endpoint, RemoteOptions opts)
    : endpoint_(std::move(endpoint)), opts_(opts) {}

namespace {

// One shot over the subprocess transport: request line in, reply line out.
std::string run_cmd_transport(const std::string& cmdline, const std::string& request_line,
                              int timeout_ms);

std::string http_post(const std::string& url, const std::string& body, int timeout_ms);

}  // namespace

PolicyResponse RemoteAgent::act(const PolicyQuery& query) {
    std::string body = policy_request_body(query);
    std::string last_error;

    for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
        try {
            std::string reply;
            if (endpoint_.rfind("cmd:", 0) == 0)
                reply = run_cmd_transport(endpoint_.substr(4), body, opts_.timeout_ms);
            else
                reply = http_post(endpoint_, body, opts_.timeout_ms);

            json j;
            try {
                j = json::parse(reply);
            } catch (const json::parse_error& e) {
                throw TransportError(TransportError::Kind::MalformedReply,
                                     std::string("malformed reply: ") + e.what());
            }
            if (!j.is_object() || !j.contains("response_text") || !j["response_text"].is_string())
                throw TransportError(TransportError::Kind::MalformedReply,
                                     "reply lacks string 'response_text'");
            PolicyResponse r;
            r.text = j["response_text"].get<std::string>();
            if (j.contains("reasoning") && j["reasoning"].is_string())
                r.reasoning = j["reasoning"].get<std::string>();
            return r;
        } catch (const TransportError& e) {
            last_error = e.what();
        }
    }
    return {"", "", true, last_error};
}

}  // namespace gsr

// ---------------------------------------------------------------------------
// transport implementations (POSIX pipes + vendored httplib)
// ---------------------------------------------------------------------------

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

namespace gsr {
namespace {

std::string run_cmd_transport(const std::string& cmdline, const std::string& request_line,
                              int timeout_ms) {
    // a child that exits without draining stdin must not kill us
    signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];   // parent -> child
    int out_pipe[2];  // child -> parent
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw TransportError(TransportError::Kind::ConnectionRefused, "pipe() failed");

    pid_t pid = fork();
    if (pid < 0) throw TransportError(TransportError::Kind::ConnectionRefused, "fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", cmdline.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    std::string line = request_line;
    line.push_back('\n');
    ssize_t off = 0;
    while (off < static_cast<ssize_t>(line.size())) {
        ssize_t n = write(in_pipe[1], line.data() + off, line.size() - off);
        if (n <= 0) break;
        off += n;
    }
    close(in_pipe[1]);

    std::string reply;
    bool timed_out = false;
    for (;;) {
        struct pollfd pfd{out_pipe[0], POLLIN, 0};
        int pr = poll(&pfd, 1, timeout_ms);
        if (pr <= 0) {
            timed_out = true;
            break;
        }
        char buf[4096];
        ssize_t n = read(out_pipe[0], buf, sizeof(buf));
        if (n <= 0) break;
        reply.append(buf, static_cast<size_t>(n));
        if (reply.find('\n') != std::string::npos) break;
    }
    close(out_pipe[0]);
    if (timed_out) kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);

    if (timed_out) throw TransportError(TransportError::Kind::Timeout, "agent command timed out");
    size_t nl = reply.find('\n');
    if (nl != std::string::npos) reply.resize(nl);
    if (reply.empty())
        throw TransportError(TransportError::Kind::MalformedReply, "agent command produced no reply");
    return reply;
}

std::string http_post(const std::string& url, const std::string& body, int timeout_ms) {
    // split scheme://host:port and path
    size_t scheme = url.find("://");
    if (scheme == std::string::npos)
        throw TransportError(TransportError::Kind::ConnectionRefused, "bad endpoint url: " + url);
    size_t path_at = url.find('/', scheme + 3);
    std::string base = path_at == std::string::npos ? url : url.substr(0, path_at);
    std::string path = path_at == std::string::npos ? "/" : url.substr(path_at);

    httplib::Client client(base);
    client.set_connection_timeout(0, timeout_ms * 1000LL);
    client.set_read_timeout(0, timeout_ms * 1000LL);
    client.set_write_timeout(0, timeout_ms * 1000LL);

    httplib::Result res = client.Post(path, body, "application/json");
    if (!res) {
        httplib::Error err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write)
            throw TransportError(TransportError::Kind::Timeout, "http timeout: " + httplib::to_string(err));
        throw TransportError(TransportError::Kind::ConnectionRefused,
                             "http connection failed: " + httplib::to_string(err));
    }
    if (res->status != 200)
        throw TransportError(TransportError::Kind::MalformedReply,
                             "http status " + std::to_string(res->status));
    return res->body;
}

}  // namespace
}  // namespace gsr
