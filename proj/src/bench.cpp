#include "gsr/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "gsr/assets.hpp"
#include "gsr/errors.hpp"
#include "gsr/graph_ops.hpp"
#include "gsr/serialize.hpp"

namespace gsr {

const char* suite_name(Suite s) {
    switch (s) {
        case Suite::SOD: return "SOD";
        case Suite::SAS: return "SAS";
        case Suite::GCG: return "GCG";
    }
    return "?";
}

const char* level_name(Level l) {
    switch (l) {
        case Level::Easy: return "easy";
        case Level::General: return "general";
        case Level::Complex: return "complex";
    }
    return "?";
}

std::optional<Suite> suite_from_name(const std::string& name) {
    std::string n;
    for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == "sod") return Suite::SOD;
    if (n == "sas") return Suite::SAS;
    if (n == "gcg") return Suite::GCG;
    return std::nullopt;
}

std::optional<Level> level_from_name(const std::string& name) {
    std::string n;
    for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == "easy" || n == "simple") return Level::Easy;
    if (n == "general" || n == "medium" || n == "med") return Level::General;
    if (n == "complex" || n == "hard" || n == "difficult") return Level::Complex;
    return std::nullopt;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::AgentEnd: return "agent_end";
        case Termination::BudgetExhausted: return "budget_exhausted";
        case Termination::AgentError: return "agent_error";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// task generation
// ---------------------------------------------------------------------------

namespace {

constexpr double kTableTop = 0.76;

// Seeded tabletop item grid: 9 columns x 2 rows in the middle band of the
// table, clear of the back row (boxes, cabinet, drawer slide zone) and of
// the front parking area.
struct ItemGrid {
    std::vector<std::pair<double, double>> free_cells;

    explicit ItemGrid(Rng& rng) {
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 9; ++c) free_cells.push_back({-0.36 + 0.12 * c, -0.18 + 0.12 * r});
        rng.shuffle(free_cells);
    }

    std::pair<double, double> take() {
        auto cell = free_cells.back();
        free_cells.pop_back();
        return cell;
    }
};

// Per-category id assignment, two-digit indices from 01.
struct IdMinter {
    std::map<std::string, int> next;
    std::string mint(const std::string& category) {
        int k = ++next[category];
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%s_%02d", category.c_str(), k);
        return buf;
    }
};

const AssetSpec& asset(const std::string& category) {
    const AssetSpec* a = find_asset(category);
    if (a == nullptr) throw Error("asset category missing from catalog: " + category);
    return *a;
}

const AssetSpec& colored_asset(const std::string& category, const std::string& color) {
    for (const AssetSpec& a : asset_catalog())
        if (a.category == category && a.color == color) return a;
    throw Error("no catalog entry for " + category + "/" + color);
}

// Interior placement grid for seeding container contents.
std::vector<std::pair<double, double>> interior_cells(const ObjectNode& container, int pitch_count) {
    double x0 = container.aabb.min.x + 0.02;
    double x1 = container.aabb.max.x - 0.02;
    double y0 = container.aabb.min.y + 0.02;
    double y1 = container.aabb.max.y - 0.02;
    std::vector<std::pair<double, double>> cells;
    double px = (x1 - x0) / pitch_count;
    double py = (y1 - y0) / pitch_count;
    for (int i = 0; i < pitch_count; ++i)
        for (int j = 0; j < pitch_count; ++j)
            cells.push_back({x0 + px * (i + 0.5), y0 + py * (j + 0.5)});
    return cells;
}

std::vector<std::string> small_item_categories() { return insertable_categories(); }

struct SceneBuild {
    std::vector<ObjectNode> objects;
    IdMinter ids;

    std::string add(const AssetSpec& spec, double x, double y, double z) {
        std::string id = ids.mint(spec.category);
        objects.push_back(make_object(spec, id, x, y, z));
        return id;
    }
    std::string add_box(const std::string& color, double x, double y, double z, bool open) {
        const AssetSpec& spec = asset(color + "_box");
        std::string id = ids.mint(spec.category);
        objects.push_back(make_lidded_box(spec, id, x, y, z, open));
        return id;
    }
};

// 5-8 small items spread over interior cells of a container. Takes the
// container by value: b.objects may reallocate while items are added.
std::vector<std::string> fill_container(SceneBuild& b, const ObjectNode container, int count,
                                        Rng& rng) {
    std::vector<std::string> cats = small_item_categories();
    std::vector<std::pair<double, double>> cells = interior_cells(container, 4);
    rng.shuffle(cells);
    std::vector<std::string> ids;
    double floor_z = container.aabb.min.z + 0.02;
    for (int i = 0; i < count; ++i) {
        const AssetSpec* spec = nullptr;
        std::string cat = cats[rng.below(cats.size())];
        if (cat == "cube") {
            const char* colors[] = {"red", "yellow", "blue", "green", "white"};
            spec = &colored_asset("cube", colors[rng.below(5)]);
        } else {
            spec = &asset(cat);
        }
        auto [x, y] = cells[i];
        ids.push_back(b.add(*spec, x, y, floor_z));
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

TaskSpec finish(Suite suite, Level level, uint64_t seed, SceneBuild& b, GoalSpec goal,
                const std::string& instruction) {
    TaskSpec task;
    task.suite = suite;
    task.level = level;
    task.seed = seed;
    task.instruction = instruction;
    goal.instruction = instruction;

    RobotState robot;
    task.initial = extract_relations(b.objects, robot);
    task.goal = goal;

    std::set<std::string> goal_objects;
    for (const GoalFact& f : expand_goal(goal, task.initial)) {
        if (const RelationEdge* e = std::get_if<RelationEdge>(&f))
            goal_objects.insert(e->subject);
        else
            goal_objects.insert(std::get<UnaryFact>(f).node);
    }
    task.step_budget = 3 * static_cast<int>(goal_objects.size()) + 10;
    return task;
}

TaskSpec generate_sod(Level level, uint64_t seed, Rng& rng) {
    SceneBuild b;
    b.objects.push_back(make_table("table_01"));
    ItemGrid grid(rng);

    const char* box_colors[] = {"red", "yellow", "blue"};
    std::string box_color = box_colors[rng.below(3)];
    std::string box_id = b.add_box(box_color, 0.14, 0.40, kTableTop, /*open=*/true);

    const char* cube_colors[] = {"red", "yellow", "blue", "green", "white"};
    int total = level == Level::Easy ? static_cast<int>(rng.uniform_int(7, 10))
                                     : static_cast<int>(rng.uniform_int(9, 12));
    int mugs = level == Level::Easy ? 0 : static_cast<int>(rng.uniform_int(2, 4));
    int cubes = total - mugs;

    for (int i = 0; i < cubes; ++i) {
        // the first two cubes always match the box color so the goal is never vacuous
        std::string color = i < 2 ? box_color : cube_colors[rng.below(5)];
        auto [x, y] = grid.take();
        b.add(colored_asset("cube", color), x, y, kTableTop);
    }
    const char* mug_colors[] = {"red", "yellow", "blue"};
    for (int i = 0; i < mugs; ++i) {
        auto [x, y] = grid.take();
        b.add(colored_asset("mug", mug_colors[rng.below(3)]), x, y, kTableTop);
    }
    if (level == Level::Complex) {
        std::vector<std::string> extras;
        for (const AssetSpec& a : asset_catalog()) {
            if (a.group == "hope" || a.group == "scanned" ||
                (a.group == "turbosquid" && !a.switchable))
                extras.push_back(a.category);
        }
        std::sort(extras.begin(), extras.end());
        extras.erase(std::unique(extras.begin(), extras.end()), extras.end());
        std::vector<size_t> chosen = rng.sample_indices(extras.size(), 3);
        for (size_t k : chosen) {
            auto [x, y] = grid.take();
            b.add(asset(extras[k]), x, y, kTableTop);
        }
    }

    GoalSpec goal;
    QuantifiedClause clause;
    clause.filter.category = "cube";
    clause.filter.color = box_color;
    clause.predicate = Predicate::Inside;
    clause.object = box_id;
    goal.clauses.push_back(clause);
    return finish(Suite::SOD, level, seed, b, goal,
                  "Pick up all cubes that have the same color as the box and put them inside the box.");
}

TaskSpec generate_sas(Level level, uint64_t seed, Rng& rng) {
    SceneBuild b;
    b.objects.push_back(make_table("table_01"));
    ItemGrid grid(rng);
    int count = static_cast<int>(rng.uniform_int(5, 8));

    if (level == Level::Easy) {
        std::string red = b.add_box("red", -0.06, 0.40, kTableTop, false);
        b.add_box("yellow", 0.34, 0.40, kTableTop, false);
        std::vector<std::string> contents = fill_container(b, b.objects[2], count, rng);
        GoalSpec goal;
        for (const std::string& id : contents)
            goal.predicates.push_back(edge(id, Predicate::Inside, red));
        return finish(Suite::SAS, level, seed, b, goal,
                      "Transfer all items from the yellow box to the red box.");
    }

    if (level == Level::General) {
        // red at the bottom, the other two stacked above in seeded order
        std::string red = b.add_box("red", 0.14, 0.40, kTableTop, false);
        bool yellow_mid = rng.coin();
        std::string mid_color = yellow_mid ? "yellow" : "blue";
        std::string top_color = yellow_mid ? "blue" : "yellow";
        b.add_box(mid_color, 0.14, 0.40, kTableTop + 0.20, false);
        b.add_box(top_color, 0.14, 0.40, kTableTop + 0.40, false);

        std::vector<std::string> items;
        std::vector<std::string> cats = small_item_categories();
        for (int i = 0; i < count; ++i) {
            std::string cat = cats[rng.below(cats.size())];
            auto [x, y] = grid.take();
            if (cat == "cube") {
                const char* colors[] = {"red", "yellow", "blue", "green", "white"};
                items.push_back(b.add(colored_asset("cube", colors[rng.below(5)]), x, y, kTableTop));
            } else {
                items.push_back(b.add(asset(cat), x, y, kTableTop));
            }
        }
        std::sort(items.begin(), items.end());
        GoalSpec goal;
        for (const std::string& id : items) goal.predicates.push_back(edge(id, Predicate::Inside, red));
        return finish(Suite::SAS, level, seed, b, goal,
                      "Move all objects on the table into the red box.");
    }

    // Complex: closed box of items, cabinet with the top drawer open; the
    // open top drawer obstructs the middle tier until it is pushed shut.
    b.add_box("yellow", 0.14, 0.40, kTableTop, false);
    std::vector<std::string> contents = fill_container(b, b.objects[1], count, rng);
    std::vector<ObjectNode> cab = make_cabinet(asset("cabinet"), b.ids.mint("cabinet"), 1, -0.50,
                                               0.40, kTableTop, /*top_drawer_open=*/true);
    for (int i = 0; i < 3; ++i) b.ids.mint("drawer");
    b.objects.insert(b.objects.end(), cab.begin(), cab.end());

    GoalSpec goal;
    for (const std::string& id : contents)
        goal.predicates.push_back(edge(id, Predicate::Inside, "drawer_02"));
    return finish(Suite::SAS, level, seed, b, goal,
                  "Transfer all objects from the box into the middle drawer.");
}

TaskSpec generate_gcg(Level level, uint64_t seed, Rng& rng) {
    SceneBuild b;
    b.objects.push_back(make_table("table_01"));
    ItemGrid grid(rng);

    // constant layout: cabinet, three closed boxes, cubes/mugs, milk,
    // popcorn, book
    std::vector<ObjectNode> cab = make_cabinet(asset("cabinet"), b.ids.mint("cabinet"), 1, -0.50,
                                               0.40, kTableTop, /*top_drawer_open=*/false);
    for (int i = 0; i < 3; ++i) b.ids.mint("drawer");
    b.objects.insert(b.objects.end(), cab.begin(), cab.end());

    std::vector<std::string> box_colors = {"red", "yellow", "blue"};
    rng.shuffle(box_colors);
    const std::pair<double, double> anchors[] = {{0.0, 0.40}, {0.40, 0.40}, {-0.62, -0.42}};
    std::map<std::string, std::string> box_of_color;
    for (int i = 0; i < 3; ++i)
        box_of_color[box_colors[i]] =
            b.add_box(box_colors[i], anchors[i].first, anchors[i].second, kTableTop, false);

    int n_items = static_cast<int>(rng.uniform_int(6, 10));
    const char* colors[] = {"red", "yellow", "blue"};
    std::vector<std::string> sortables;
    for (int i = 0; i < n_items; ++i) {
        std::string color = colors[i % 3];
        auto [x, y] = grid.take();
        if (rng.coin())
            sortables.push_back(b.add(colored_asset("cube", color), x, y, kTableTop));
        else
            sortables.push_back(b.add(colored_asset("mug", color), x, y, kTableTop));
    }
    auto [mx, my] = grid.take();
    std::string milk = b.add(asset("milk"), mx, my, kTableTop);
    auto [px, py] = grid.take();
    std::string popcorn = b.add(asset("popcorn"), px, py, kTableTop);
    auto [bx, by] = grid.take();
    std::string book = b.add(asset("book"), bx, by, kTableTop);

    GoalSpec goal;
    std::string instruction;
    if (level == Level::Easy) {
        std::vector<std::string> drawers = {"drawer_01", "drawer_02", "drawer_03"};
        rng.shuffle(drawers);
        goal.predicates.push_back(edge(milk, Predicate::Inside, drawers[0]));
        goal.predicates.push_back(edge(popcorn, Predicate::Inside, drawers[1]));
        goal.predicates.push_back(edge(book, Predicate::Inside, drawers[2]));
        instruction =
            "Place the milk, the popcorn, and the book into different drawer layers of the cabinet.";
    } else if (level == Level::General) {
        for (const char* color : colors) {
            for (const char* cat : {"cube", "mug"}) {
                QuantifiedClause c;
                c.filter.category = cat;
                c.filter.color = color;
                c.predicate = Predicate::Inside;
                c.object = box_of_color[color];
                goal.clauses.push_back(c);
            }
        }
        instruction = "Sort all cubes and mugs into the boxes of their corresponding colors.";
    } else {
        std::vector<std::string> drawers = {"drawer_01", "drawer_02", "drawer_03"};
        rng.shuffle(drawers);
        for (int i = 0; i < 3; ++i) {
            for (const char* cat : {"cube", "mug"}) {
                QuantifiedClause c;
                c.filter.category = cat;
                c.filter.color = colors[i];
                c.predicate = Predicate::Inside;
                c.object = drawers[i];
                goal.clauses.push_back(c);
            }
        }
        instruction = "Store the cubes and mugs into different drawer layers based on their colors.";
    }
    return finish(Suite::GCG, level, seed, b, goal, instruction);
}

}  // namespace

TaskSpec generate_task(Suite suite, Level level, uint64_t seed) {
    uint64_t stream = fnv1a(std::string(suite_name(suite)) + "/" + level_name(level));
    Rng rng(hash_combine(stream, seed));
    switch (suite) {
        case Suite::SOD: return generate_sod(level, seed, rng);
        case Suite::SAS: return generate_sas(level, seed, rng);
        case Suite::GCG: return generate_gcg(level, seed, rng);
    }
    throw Error("bad suite");
}

TaskSpec generate_validated_task(Suite suite, Level level, uint64_t seed, const EngineConfig& cfg) {
    TaskSpec task = generate_task(suite, level, seed);
    OracleAgent oracle(task.goal, cfg);
    Rng rng(hash_combine(fnv1a("validate"), seed));
    EpisodeOptions opts;
    opts.engine = cfg;
    EpisodeResult r = run_episode(task, oracle, rng, opts);
    if (!r.success)
        throw Error(std::string("generated task is not oracle-solvable: ") + suite_name(suite) +
                    "/" + level_name(level) + "/" + std::to_string(seed));
    return task;
}

nlohmann::ordered_json task_to_json(const TaskSpec& task) {
    nlohmann::ordered_json j;
    j["suite"] = suite_name(task.suite);
    j["level"] = level_name(task.level);
    j["seed"] = task.seed;
    j["instruction"] = task.instruction;
    j["step_budget"] = task.step_budget;
    j["initial_scene"] = scene_graph_to_json(task.initial);
    j["goal"] = goal_to_json(task.goal);
    return j;
}

double task_progress(const SceneGraph& final_graph, const GoalSpec& goal) {
    std::vector<GoalFact> facts = expand_goal(goal, final_graph);
    if (facts.empty()) return 1.0;
    size_t sat = 0;
    for (const GoalFact& f : facts)
        if (fact_holds(final_graph, f)) ++sat;
    return static_cast<double>(sat) / static_cast<double>(facts.size());
}

SceneGraph perturb(const SceneGraph& sg, double noise_ratio, Rng& rng, FlipMode mode) {
    std::vector<RelationEdge> spatial;
    for (const RelationEdge& e : sg.edges)
        if (e.predicate != Predicate::Holding) spatial.push_back(e);

    size_t k = static_cast<size_t>(std::ceil(noise_ratio * static_cast<double>(spatial.size())));
    if (k == 0) return sg;

    SceneGraph out = sg;
    for (size_t idx : rng.sample_indices(spatial.size(), k)) {
        const RelationEdge& victim = spatial[idx];
        out.edges.erase(victim);
        if (rng.coin()) continue;  // dropped
        if (mode == FlipMode::DirectionReversal) {
            out.edges.insert(edge(victim.object, victim.predicate, victim.subject));
        } else {
            Predicate options[2];
            int n = 0;
            for (Predicate p : {Predicate::Ontop, Predicate::Inside, Predicate::Beside})
                if (p != victim.predicate) options[n++] = p;
            out.edges.insert(edge(victim.subject, options[rng.below(2)], victim.object));
        }
    }
    return normalize(out);
}

EpisodeResult run_episode(const TaskSpec& task, Agent& agent, Rng& rng, const EpisodeOptions& opts) {
    EpisodeResult result;
    result.suite = task.suite;
    result.level = task.level;
    result.seed = task.seed;
    result.noise_ratio = opts.noise_ratio;
    result.agent_id = agent.id();

    SceneGraph g = task.initial;
    std::vector<std::pair<std::string, bool>> history;
    Trajectory traj;
    traj.id = std::string(suite_name(task.suite)) + "-" + level_name(task.level) + "-" +
              std::to_string(task.seed);
    traj.instruction = task.instruction;
    traj.provenance = "engine";

    uint64_t episode_noise_seed = rng.next_u64();
    result.termination = Termination::BudgetExhausted;

    for (int step = 0; step < task.step_budget; ++step) {
        SceneGraph observed = g;
        if (opts.noise_ratio > 0.0) {
            if (opts.noise_per_episode) {
                Rng fixed(episode_noise_seed);
                observed = perturb(g, opts.noise_ratio, fixed, opts.flip_mode);
            } else {
                observed = perturb(g, opts.noise_ratio, rng, opts.flip_mode);
            }
        }

        PolicyQuery query;
        query.observation = serialize(observed);
        query.instruction = task.instruction;
        query.history = history;
        query.step = step;
        query.budget = task.step_budget;

        PolicyResponse response = agent.act(query);
        if (response.transport_failure) {
            result.termination = Termination::AgentError;
            break;
        }

        StepRecord record;
        record.raw_response = response.text;
        std::vector<ActionCommand> parsed = scan_commands(response.text);
        if (parsed.empty()) {
            record.parsed = false;
            record.exec.graph = g;
            result.steps.push_back(std::move(record));
            history.push_back({"", false});
            ++result.steps_used;
            continue;
        }
        record.parsed = true;
        record.cmd = parsed.front();

        if (record.cmd.verb == Verb::End) {
            record.exec = execute(g, record.cmd, opts.engine);
            result.steps.push_back(std::move(record));
            ++result.steps_used;
            result.termination = Termination::AgentEnd;
            if (opts.record_trajectory) traj.steps.push_back({g, command(Verb::End)});
            break;
        }

        ExecutionResult exec = execute(g, record.cmd, opts.engine);
        if (opts.record_trajectory && exec.success) traj.steps.push_back({g, record.cmd});
        g = exec.graph;
        history.push_back({format_command(record.cmd), exec.success});
        record.exec = std::move(exec);
        result.steps.push_back(std::move(record));
        ++result.steps_used;
    }

    result.progress = task_progress(g, task.goal);
    result.success = satisfied(g, task.goal);
    if (opts.record_trajectory) {
        traj.final_graph = g;
        result.trajectory = std::move(traj);
    }
    return result;
}

}  // namespace gsr
