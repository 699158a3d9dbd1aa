// gsr: benchmark runs, dataset generation, offline grading, trajectory
// replay and report aggregation over the scene-graph engine.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "gsr/bench.hpp"
#include "gsr/data_engine.hpp"
#include "gsr/errors.hpp"
#include "gsr/graph_ops.hpp"
#include "gsr/rewards.hpp"
#include "gsr/serialize.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string suite = "all";
    std::string level = "all";
    std::string seeds = "20";  // count, or comma list of explicit seeds
    int trials = 10;
    std::string noise = "0";
    std::string agent = "oracle";
    int timeout_ms = 10000;
    int retries = 2;
    std::string weights = "1,1,1";
    double alpha = 0.5;
    double beta = 1.0;
    double tau = 0.5;
    double overlap = 0.25;
    double beside = 0.15;
    double contact_tol = 0.01;
    double gripper_tau = 0.5;
    double joint_tau = -1.0;  // <0: keep per-node thresholds
    std::string out = "gsr_run";
    uint64_t seed = 0;
    int parallel = 0;  // 0: hardware concurrency
    bool noise_per_episode = false;
    std::string flip_mode = "substitute";
    bool validate_tasks = true;
    std::string in;
    std::string trajectories_out;
    std::string horizons = "1";
    std::string synonyms = "data/synonyms.json";
    std::string rephrase_cmd;
};

// Config file (JSON object, keys = flag names) merged under CLI flags.
void apply_config_file(const std::string& path, RunConfig& cfg, CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) throw gsr::Error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw gsr::Error(std::string("bad config file: ") + e.what());
    }
    if (!j.is_object()) throw gsr::Error("config file must hold a JSON object");

    auto overridden = [&](const std::string& flag) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + flag);
        return opt != nullptr && opt->count() > 0;
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        if (overridden(key)) continue;
        if (key == "suite") cfg.suite = v.get<std::string>();
        else if (key == "level") cfg.level = v.get<std::string>();
        else if (key == "seeds") cfg.seeds = v.is_string() ? v.get<std::string>() : std::to_string(v.get<uint64_t>());
        else if (key == "trials") cfg.trials = v.get<int>();
        else if (key == "noise") cfg.noise = v.is_string() ? v.get<std::string>() : std::to_string(v.get<double>());
        else if (key == "agent") cfg.agent = v.get<std::string>();
        else if (key == "timeout-ms") cfg.timeout_ms = v.get<int>();
        else if (key == "retries") cfg.retries = v.get<int>();
        else if (key == "weights") cfg.weights = v.get<std::string>();
        else if (key == "alpha") cfg.alpha = v.get<double>();
        else if (key == "beta") cfg.beta = v.get<double>();
        else if (key == "tau") cfg.tau = v.get<double>();
        else if (key == "overlap") cfg.overlap = v.get<double>();
        else if (key == "beside") cfg.beside = v.get<double>();
        else if (key == "contact-tol") cfg.contact_tol = v.get<double>();
        else if (key == "gripper-tau") cfg.gripper_tau = v.get<double>();
        else if (key == "joint-tau") cfg.joint_tau = v.get<double>();
        else if (key == "out") cfg.out = v.get<std::string>();
        else if (key == "seed") cfg.seed = v.get<uint64_t>();
        else if (key == "parallel") cfg.parallel = v.get<int>();
        else if (key == "noise-per-episode") cfg.noise_per_episode = v.get<bool>();
        else if (key == "flip-mode") cfg.flip_mode = v.get<std::string>();
        else if (key == "validate-tasks") cfg.validate_tasks = v.get<bool>();
        else if (key == "in") cfg.in = v.get<std::string>();
        else if (key == "trajectories-out") cfg.trajectories_out = v.get<std::string>();
        else if (key == "horizons") cfg.horizons = v.get<std::string>();
        else if (key == "synonyms") cfg.synonyms = v.get<std::string>();
        else if (key == "rephrase-cmd") cfg.rephrase_cmd = v.get<std::string>();
        else throw gsr::Error("unknown config key: " + key);
    }
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream is(text);
    while (std::getline(is, token, ',')) {
        if (!token.empty()) out.push_back(std::stod(token));
    }
    return out;
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
    std::vector<uint64_t> out;
    if (text.find(',') == std::string::npos) {
        uint64_t count = std::stoull(text);
        for (uint64_t s = 0; s < count; ++s) out.push_back(s);
        return out;
    }
    std::string token;
    std::istringstream is(text);
    while (std::getline(is, token, ',')) {
        if (!token.empty()) out.push_back(std::stoull(token));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string token;
    std::istringstream is(text);
    while (std::getline(is, token, ',')) {
        if (!token.empty()) out.push_back(std::stoi(token));
    }
    return out;
}

std::vector<gsr::Suite> selected_suites(const std::string& spec) {
    if (spec == "all") return {gsr::Suite::SOD, gsr::Suite::SAS, gsr::Suite::GCG};
    std::vector<gsr::Suite> out;
    std::string token;
    std::istringstream is(spec);
    while (std::getline(is, token, ',')) {
        auto s = gsr::suite_from_name(token);
        if (!s) throw gsr::Error("unknown suite: " + token);
        out.push_back(*s);
    }
    return out;
}

std::vector<gsr::Level> selected_levels(const std::string& spec) {
    if (spec == "all") return {gsr::Level::Easy, gsr::Level::General, gsr::Level::Complex};
    std::vector<gsr::Level> out;
    std::string token;
    std::istringstream is(spec);
    while (std::getline(is, token, ',')) {
        auto l = gsr::level_from_name(token);
        if (!l) throw gsr::Error("unknown level: " + token);
        out.push_back(*l);
    }
    return out;
}

gsr::EngineConfig engine_config(const RunConfig& cfg) {
    gsr::EngineConfig e;
    e.extraction.ioa_threshold = cfg.tau;
    e.extraction.horizontal_overlap_min = cfg.overlap;
    e.extraction.beside_max_center_dist = cfg.beside;
    e.extraction.contact_tolerance = cfg.contact_tol;
    return e;
}

ordered_json config_echo(const RunConfig& cfg) {
    ordered_json j;
    j["suite"] = cfg.suite;
    j["level"] = cfg.level;
    j["seeds"] = cfg.seeds;
    j["trials"] = cfg.trials;
    j["noise"] = cfg.noise;
    j["agent"] = cfg.agent;
    j["timeout-ms"] = cfg.timeout_ms;
    j["retries"] = cfg.retries;
    j["weights"] = cfg.weights;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["tau"] = cfg.tau;
    j["overlap"] = cfg.overlap;
    j["beside"] = cfg.beside;
    j["contact-tol"] = cfg.contact_tol;
    j["gripper-tau"] = cfg.gripper_tau;
    j["joint-tau"] = cfg.joint_tau;
    j["seed"] = cfg.seed;
    j["parallel"] = cfg.parallel;
    j["noise-per-episode"] = cfg.noise_per_episode;
    j["flip-mode"] = cfg.flip_mode;
    j["validate-tasks"] = cfg.validate_tasks;
    return j;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct EpisodeJob {
    gsr::Suite suite;
    gsr::Level level;
    uint64_t seed;
    int trial;
    double noise;
};

ordered_json episode_record(const gsr::EpisodeResult& r) {
    ordered_json j;
    j["suite"] = gsr::suite_name(r.suite);
    j["level"] = gsr::level_name(r.level);
    j["seed"] = r.seed;
    j["trial"] = r.trial;
    j["noise_ratio"] = r.noise_ratio;
    j["agent_id"] = r.agent_id;
    j["success"] = r.success;
    j["task_progress"] = r.progress;
    j["steps_used"] = r.steps_used;
    j["termination"] = gsr::termination_name(r.termination);
    ordered_json actions = ordered_json::array();
    for (const gsr::StepRecord& s : r.steps) {
        ordered_json a;
        a["command"] = s.parsed ? gsr::format_command(s.cmd) : s.raw_response;
        a["sigma"] = s.parsed ? static_cast<int>(s.exec.success) : 0;
        ordered_json verdicts = ordered_json::array();
        for (const gsr::StageVerdict& v : s.exec.log)
            verdicts.push_back({{"stage", v.stage}, {"pass", v.pass}, {"message", v.message}});
        a["verdicts"] = verdicts;
        actions.push_back(a);
    }
    j["actions"] = actions;
    return j;
}

struct CellStats {
    int episodes = 0;
    int successes = 0;
    double tp_sum = 0.0;
    double steps_sum = 0.0;
};

int cmd_bench(const RunConfig& cfg) {
    std::vector<gsr::Suite> suites = selected_suites(cfg.suite);
    std::vector<gsr::Level> levels = selected_levels(cfg.level);
    std::vector<uint64_t> seeds = parse_seed_list(cfg.seeds);
    std::vector<double> noise_levels = parse_double_list(cfg.noise);
    if (noise_levels.empty()) noise_levels.push_back(0.0);
    gsr::EngineConfig engine = engine_config(cfg);

    std::vector<EpisodeJob> jobs;
    for (gsr::Suite s : suites)
        for (gsr::Level l : levels)
            for (uint64_t seed : seeds)
                for (double noise : noise_levels)
                    for (int trial = 0; trial < cfg.trials; ++trial)
                        jobs.push_back({s, l, seed, trial, noise});

    // task cache: one generation per (suite, level, seed)
    std::map<std::tuple<int, int, uint64_t>, gsr::TaskSpec> tasks;
    bool generation_failed = false;
    for (gsr::Suite s : suites)
        for (gsr::Level l : levels)
            for (uint64_t seed : seeds) {
                try {
                    tasks[{static_cast<int>(s), static_cast<int>(l), seed}] =
                        cfg.validate_tasks ? gsr::generate_validated_task(s, l, seed, engine)
                                           : gsr::generate_task(s, l, seed);
                } catch (const gsr::Error& e) {
                    std::fprintf(stderr, "task generation failed: %s\n", e.what());
                    generation_failed = true;
                }
            }
    if (generation_failed) return 2;

    std::string episodes_path = cfg.out + ".episodes.jsonl";
    std::ofstream episodes_out(episodes_path);
    if (!episodes_out) {
        std::fprintf(stderr, "cannot write %s\n", episodes_path.c_str());
        return 2;
    }
    std::ofstream traj_out;
    if (!cfg.trajectories_out.empty()) {
        traj_out.open(cfg.trajectories_out);
        if (!traj_out) {
            std::fprintf(stderr, "cannot write %s\n", cfg.trajectories_out.c_str());
            return 2;
        }
    }

    unsigned workers = cfg.parallel > 0 ? static_cast<unsigned>(cfg.parallel)
                                        : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<size_t>(jobs.size(), 1));

    std::vector<std::string> episode_lines(jobs.size());
    std::vector<std::string> traj_lines(jobs.size());
    std::vector<char> job_done(jobs.size(), 0);
    std::vector<gsr::EpisodeResult> results(jobs.size());
    std::atomic<size_t> next_job{0};
    std::atomic<bool> transport_trouble{false};
    std::mutex mu;
    std::condition_variable cv;

    auto run_job = [&](size_t i) {
        const EpisodeJob& job = jobs[i];
        const gsr::TaskSpec& task =
            tasks.at({static_cast<int>(job.suite), static_cast<int>(job.level), job.seed});

        std::unique_ptr<gsr::Agent> agent;
        if (cfg.agent == "oracle") {
            agent = std::make_unique<gsr::OracleAgent>(task.goal, engine);
        } else if (cfg.agent.rfind("remote:", 0) == 0) {
            agent = std::make_unique<gsr::RemoteAgent>(
                cfg.agent.substr(7), gsr::RemoteOptions{cfg.timeout_ms, cfg.retries});
        } else {
            throw gsr::Error("unknown agent spec: " + cfg.agent);
        }

        uint64_t stream = gsr::fnv1a(std::string(gsr::suite_name(job.suite)) + "/" +
                                     gsr::level_name(job.level));
        stream = gsr::hash_combine(stream, job.seed);
        stream = gsr::hash_combine(stream, static_cast<uint64_t>(job.trial));
        uint64_t noise_bits;
        static_assert(sizeof(noise_bits) == sizeof(job.noise));
        std::memcpy(&noise_bits, &job.noise, sizeof(noise_bits));
        stream = gsr::hash_combine(stream, noise_bits);
        gsr::Rng rng(gsr::hash_combine(stream, cfg.seed));

        gsr::EpisodeOptions opts;
        opts.noise_ratio = job.noise;
        opts.noise_per_episode = cfg.noise_per_episode;
        opts.flip_mode = cfg.flip_mode == "reverse" ? gsr::FlipMode::DirectionReversal
                                                    : gsr::FlipMode::PredicateSubstitution;
        opts.engine = engine;
        opts.record_trajectory = !cfg.trajectories_out.empty();

        gsr::EpisodeResult r = gsr::run_episode(task, *agent, rng, opts);
        r.trial = job.trial;
        if (r.termination == gsr::Termination::AgentError) transport_trouble = true;

        std::string line = episode_record(r).dump();
        std::string traj_line;
        if (opts.record_trajectory && r.trajectory) {
            gsr::Trajectory t = *r.trajectory;
            t.id += "-t" + std::to_string(job.trial);
            if (job.noise > 0) {
                char n[24];
                std::snprintf(n, sizeof(n), "-n%g", job.noise);
                t.id += n;
            }
            traj_line = gsr::trajectory_to_json(t).dump();
        }
        r.trajectory.reset();
        {
            std::lock_guard<std::mutex> lock(mu);
            episode_lines[i] = std::move(line);
            traj_lines[i] = std::move(traj_line);
            results[i] = std::move(r);
            job_done[i] = 1;
        }
        cv.notify_all();
    };

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next_job.fetch_add(1);
                if (i >= jobs.size()) return;
                run_job(i);
            }
        });

    // ordered, per-episode flush: a killed run loses at most in-flight work
    {
        std::unique_lock<std::mutex> lock(mu);
        for (size_t i = 0; i < jobs.size(); ++i) {
            cv.wait(lock, [&] { return job_done[i] == 1; });
            episodes_out << episode_lines[i] << '\n';
            episodes_out.flush();
            if (traj_out.is_open() && !traj_lines[i].empty()) {
                traj_out << traj_lines[i] << '\n';
                traj_out.flush();
            }
            episode_lines[i].clear();
            traj_lines[i].clear();
        }
    }
    for (std::thread& t : pool) t.join();

    // per-cell summary
    std::map<std::tuple<int, int, std::string>, CellStats> cells;
    char noise_buf[32];
    for (const gsr::EpisodeResult& r : results) {
        std::snprintf(noise_buf, sizeof(noise_buf), "%g", r.noise_ratio);
        CellStats& c = cells[{static_cast<int>(r.suite), static_cast<int>(r.level), noise_buf}];
        ++c.episodes;
        c.successes += r.success ? 1 : 0;
        c.tp_sum += r.progress;
        c.steps_sum += r.steps_used;
    }

    ordered_json summary;
    summary["config"] = config_echo(cfg);
    ordered_json rows = ordered_json::array();
    std::printf("%-6s %-8s %-6s %9s %9s %9s %9s\n", "suite", "level", "noise", "episodes",
                "mean_tp", "success", "steps");
    for (const auto& [key, c] : cells) {
        auto [s, l, noise] = key;
        double mean_tp = c.tp_sum / c.episodes;
        double success_rate = static_cast<double>(c.successes) / c.episodes;
        double mean_steps = c.steps_sum / c.episodes;
        std::printf("%-6s %-8s %-6s %9d %9.3f %9.3f %9.2f\n",
                    gsr::suite_name(static_cast<gsr::Suite>(s)),
                    gsr::level_name(static_cast<gsr::Level>(l)), noise.c_str(), c.episodes, mean_tp,
                    success_rate, mean_steps);
        rows.push_back({{"suite", gsr::suite_name(static_cast<gsr::Suite>(s))},
                        {"level", gsr::level_name(static_cast<gsr::Level>(l))},
                        {"noise", noise},
                        {"episodes", c.episodes},
                        {"mean_tp", mean_tp},
                        {"success_rate", success_rate},
                        {"mean_steps", mean_steps}});
    }
    summary["cells"] = rows;

    std::ofstream summary_out(cfg.out + ".summary.json");
    summary_out << summary.dump(2) << '\n';

    std::printf("episodes: %zu -> %s\n", jobs.size(), episodes_path.c_str());
    if (transport_trouble) {
        std::fprintf(stderr, "remote agent transport failures occurred; partial results kept\n");
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// datagen
// ---------------------------------------------------------------------------

std::vector<gsr::Trajectory> load_trajectories(const std::string& path, double joint_tau) {
    std::ifstream in(path);
    if (!in) throw gsr::Error("cannot open " + path);
    std::vector<gsr::Trajectory> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            gsr::Trajectory t = gsr::trajectory_from_json(json::parse(line));
            if (joint_tau >= 0) {
                auto apply = [&](gsr::SceneGraph& g) {
                    for (auto& [id, node] : g.nodes)
                        if (node.articulation) node.articulation->open_threshold = joint_tau;
                };
                for (gsr::TrajectoryStep& s : t.steps) apply(s.graph);
                apply(t.final_graph);
            }
            out.push_back(std::move(t));
        } catch (const std::exception& e) {
            throw gsr::Error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<gsr::Trajectory> oracle_trajectories(const RunConfig& cfg) {
    std::vector<gsr::Trajectory> out;
    gsr::EngineConfig engine = engine_config(cfg);
    for (gsr::Suite s : selected_suites(cfg.suite)) {
        for (gsr::Level l : selected_levels(cfg.level)) {
            for (uint64_t seed : parse_seed_list(cfg.seeds)) {
                gsr::TaskSpec task = gsr::generate_task(s, l, seed);
                gsr::OracleAgent oracle(task.goal, engine);
                gsr::Rng rng(gsr::hash_combine(cfg.seed, seed));
                gsr::EpisodeOptions opts;
                opts.engine = engine;
                opts.record_trajectory = true;
                gsr::EpisodeResult r = gsr::run_episode(task, oracle, rng, opts);
                if (r.success && r.trajectory) out.push_back(std::move(*r.trajectory));
                else
                    std::fprintf(stderr, "skipping unsolved task %s/%s/%llu\n", gsr::suite_name(s),
                                 gsr::level_name(l), static_cast<unsigned long long>(seed));
            }
        }
    }
    return out;
}

int cmd_datagen(const RunConfig& cfg) {
    std::vector<gsr::Trajectory> trajectories =
        cfg.in.empty() ? oracle_trajectories(cfg) : load_trajectories(cfg.in, cfg.joint_tau);
    if (trajectories.empty()) {
        std::fprintf(stderr, "no trajectories to process\n");
        return 2;
    }

    std::vector<int> horizons = parse_int_list(cfg.horizons);
    if (horizons.empty()) horizons.push_back(1);
    bool single_step = horizons.size() == 1 && horizons[0] == 1;

    std::vector<gsr::DataRecord> base;
    for (const gsr::Trajectory& t : trajectories) {
        std::vector<gsr::DataRecord> records;
        if (single_step) {
            records = gsr::planning_family_samples(t);
        } else {
            records = gsr::world_modeling_samples(t);
            std::vector<gsr::DataRecord> fr = gsr::forward_reasoning_samples(t, horizons);
            std::vector<gsr::DataRecord> gp = gsr::goal_planning_samples(t);
            records.insert(records.end(), fr.begin(), fr.end());
            records.insert(records.end(), gp.begin(), gp.end());
        }
        std::vector<gsr::DataRecord> gr = gsr::grounding_samples(t);
        records.insert(records.end(), gr.begin(), gr.end());
        records.push_back(gsr::goal_interpretation_sample(t));
        base.insert(base.end(), std::make_move_iterator(records.begin()),
                    std::make_move_iterator(records.end()));
    }

    gsr::AugmentationPlan plan;
    plan.seed = cfg.seed;
    try {
        plan.synonyms = gsr::load_synonyms(cfg.synonyms);
    } catch (const gsr::Error& e) {
        std::fprintf(stderr, "%s; proceeding with the built-in cup/mug pair\n", e.what());
        plan.synonyms.mapping = {{"cup", "mug"}, {"mug", "cup"}};
    }
    if (!cfg.rephrase_cmd.empty()) {
        std::string cmdline = cfg.rephrase_cmd;
        plan.rephraser = [cmdline](const std::string& text, int variant) {
            gsr::RemoteAgent shim("cmd:" + cmdline, {30000, 0});
            gsr::PolicyQuery q;
            q.observation = "{\"nodes\":[],\"edges\":[]}";
            q.instruction = text;
            q.step = variant;
            gsr::PolicyResponse r = shim.act(q);
            return r.transport_failure || r.text.empty() ? gsr::template_rephrase(text, variant)
                                                         : r.text;
        };
    }

    std::map<gsr::Modality, std::ofstream> files;
    for (gsr::Modality m :
         {gsr::Modality::Grounding, gsr::Modality::WorldModeling, gsr::Modality::ForwardReasoning,
          gsr::Modality::GoalPlanning, gsr::Modality::GoalInterpretation}) {
        std::string path = cfg.out + "." + gsr::modality_name(m) + ".jsonl";
        files[m].open(path);
        if (!files[m]) {
            std::fprintf(stderr, "cannot write %s\n", path.c_str());
            return 2;
        }
    }

    std::vector<gsr::AuditRow> rows = gsr::augment(base, plan, [&](const gsr::DataRecord& r) {
        files[r.modality] << gsr::record_to_json(r).dump() << '\n';
    });

    std::string audit = gsr::render_audit(rows);
    std::ofstream audit_out(cfg.out + ".audit.txt");
    audit_out << audit;
    std::fputs(audit.c_str(), stdout);
    return 0;
}

// ---------------------------------------------------------------------------
// grade
// ---------------------------------------------------------------------------

int cmd_grade(const RunConfig& cfg) {
    if (cfg.in.empty()) throw gsr::Error("grade requires --in");
    std::ifstream in(cfg.in);
    if (!in) throw gsr::Error("cannot open " + cfg.in);
    std::string out_path = cfg.out + ".graded.jsonl";
    std::ofstream out(out_path);
    if (!out) throw gsr::Error("cannot write " + out_path);

    std::vector<double> lambdas = parse_double_list(cfg.weights);
    gsr::RewardWeights weights;
    if (lambdas.size() == 3) {
        weights.lambda_step = lambdas[0];
        weights.lambda_grounding = lambdas[1];
        weights.lambda_term = lambdas[2];
    }
    weights.alpha = cfg.alpha;
    weights.beta = cfg.beta;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json record;
        try {
            record = ordered_json::parse(line);
            gsr::SceneGraph sg =
                record.at("scene_graph").is_string()
                    ? gsr::parse_scene_graph(record.at("scene_graph").get<std::string>())
                    : gsr::scene_graph_from_json(record.at("scene_graph"));
            sg = gsr::normalize(sg);
            gsr::GoalSpec goal = gsr::goal_from_json(record.at("goal"));

            gsr::RewardWeights w = weights;
            if (record.contains("weights")) {
                const json& jw = record["weights"];
                w.lambda_step = jw.value("lambda1", w.lambda_step);
                w.lambda_grounding = jw.value("lambda2", w.lambda_grounding);
                w.lambda_term = jw.value("lambda3", w.lambda_term);
                w.alpha = jw.value("alpha", w.alpha);
                w.beta = jw.value("beta", w.beta);
            }

            gsr::GradedResponse g = gsr::grade(record.at("response").get<std::string>(), sg, goal, w);
            record["r_s"] = g.r_step;
            record["r_g"] = g.r_grounding;
            record["r_t"] = g.r_termination;
            record["r_total"] = g.r_total;
            record["N"] = g.action_count;
            record["diagnostics"] = g.diagnostics;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "%s:%d: %s\n", cfg.in.c_str(), lineno, e.what());
            return 2;
        }
        out << record.dump() << '\n';
    }
    std::printf("graded -> %s\n", out_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

int cmd_replay(const RunConfig& cfg) {
    if (cfg.in.empty()) throw gsr::Error("replay requires --in");
    std::vector<gsr::Trajectory> trajectories = load_trajectories(cfg.in, cfg.joint_tau);
    gsr::EngineConfig engine = engine_config(cfg);

    int divergences = 0;
    for (const gsr::Trajectory& t : trajectories) {
        int first_bad = -1;
        std::string why;
        for (size_t i = 0; i < t.steps.size(); ++i) {
            try {
                gsr::SceneGraph next = gsr::transition(t.steps[i].graph, t.steps[i].action, engine);
                const gsr::SceneGraph& recorded =
                    i + 1 < t.steps.size() ? t.steps[i + 1].graph : t.final_graph;
                if (!gsr::relationally_equal(next, recorded)) {
                    first_bad = static_cast<int>(i);
                    why = "transition result differs from the recorded graph";
                    break;
                }
                std::vector<gsr::ObjectNode> objs;
                for (const auto& [id, node] : next.nodes) objs.push_back(node);
                gsr::SceneGraph re = gsr::extract_relations(objs, next.robot, engine.extraction);
                if (re.edges != next.edges) {
                    first_bad = static_cast<int>(i);
                    why = "edge set is not geometrically consistent";
                    break;
                }
            } catch (const gsr::Error& e) {
                first_bad = static_cast<int>(i);
                why = e.what();
                break;
            }
        }
        if (first_bad >= 0) {
            ++divergences;
            std::printf("%-24s DIVERGED at step %d: %s\n", t.id.c_str(), first_bad, why.c_str());
        } else {
            std::printf("%-24s ok (%zu steps)\n", t.id.c_str(), t.steps.size());
        }
    }
    std::printf("%d/%zu trajectories diverged\n", divergences, trajectories.size());
    return divergences == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& inputs) {
    std::map<std::tuple<std::string, std::string, double>, CellStats> cells;
    std::set<std::string> suites, levels;
    std::set<double> noises;

    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw gsr::Error("cannot open " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                std::fprintf(stderr, "%s:%d: %s\n", path.c_str(), lineno, e.what());
                return 2;
            }
            std::string s = j.value("suite", "?");
            std::string l = j.value("level", "?");
            double noise = j.value("noise_ratio", 0.0);
            CellStats& c = cells[{s, l, noise}];
            ++c.episodes;
            c.successes += j.value("success", false) ? 1 : 0;
            c.tp_sum += j.value("task_progress", 0.0);
            c.steps_sum += j.value("steps_used", 0);
            suites.insert(s);
            levels.insert(l);
            noises.insert(noise);
        }
    }
    if (cells.empty()) {
        std::fprintf(stderr, "no episode records found\n");
        return 2;
    }

    std::printf("%-6s %-8s %-6s %9s %9s %9s\n", "suite", "level", "noise", "episodes", "mean_tp",
                "success");
    for (const auto& [key, c] : cells) {
        const auto& [s, l, noise] = key;
        std::printf("%-6s %-8s %-6g %9d %9.3f %9.3f\n", s.c_str(), l.c_str(), noise, c.episodes,
                    c.tp_sum / c.episodes, static_cast<double>(c.successes) / c.episodes);
    }

    // plot-ready matrix: tp[suite][level][noise]
    ordered_json matrix;
    matrix["suites"] = std::vector<std::string>(suites.begin(), suites.end());
    matrix["levels"] = std::vector<std::string>(levels.begin(), levels.end());
    matrix["noise"] = std::vector<double>(noises.begin(), noises.end());
    ordered_json tp = ordered_json::array();
    ordered_json sr = ordered_json::array();
    for (const std::string& s : suites) {
        ordered_json tp_l = ordered_json::array();
        ordered_json sr_l = ordered_json::array();
        for (const std::string& l : levels) {
            ordered_json tp_n = ordered_json::array();
            ordered_json sr_n = ordered_json::array();
            for (double noise : noises) {
                auto it = cells.find({s, l, noise});
                if (it == cells.end()) {
                    tp_n.push_back(nullptr);
                    sr_n.push_back(nullptr);
                } else {
                    tp_n.push_back(it->second.tp_sum / it->second.episodes);
                    sr_n.push_back(static_cast<double>(it->second.successes) / it->second.episodes);
                }
            }
            tp_l.push_back(tp_n);
            sr_l.push_back(sr_n);
        }
        tp.push_back(tp_l);
        sr.push_back(sr_l);
    }
    matrix["mean_tp"] = tp;
    matrix["success_rate"] = sr;

    std::string out_path = cfg.out + ".report.json";
    std::ofstream out(out_path);
    out << matrix.dump(2) << '\n';
    std::printf("matrix -> %s\n", out_path.c_str());
    return 0;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_option("--suite", cfg.suite, "sod|sas|gcg|all or comma list");
    cmd->add_option("--level", cfg.level, "easy|general|complex|all or comma list");
    cmd->add_option("--seeds", cfg.seeds, "seed count, or comma list of seeds");
    cmd->add_option("--trials", cfg.trials, "trials per task");
    cmd->add_option("--noise", cfg.noise, "comma list of noise ratios");
    cmd->add_option("--agent", cfg.agent, "oracle | remote:<url> | remote:cmd:<command>");
    cmd->add_option("--timeout-ms", cfg.timeout_ms, "remote agent timeout");
    cmd->add_option("--retries", cfg.retries, "remote agent retries");
    cmd->add_option("--weights", cfg.weights, "lambda1,lambda2,lambda3");
    cmd->add_option("--alpha", cfg.alpha, "multi-step penalty magnitude");
    cmd->add_option("--beta", cfg.beta, "wrong-termination penalty magnitude");
    cmd->add_option("--tau", cfg.tau, "IoA containment threshold");
    cmd->add_option("--overlap", cfg.overlap, "horizontal overlap ratio for ontop");
    cmd->add_option("--beside", cfg.beside, "beside center-distance threshold (m)");
    cmd->add_option("--contact-tol", cfg.contact_tol, "resting-contact tolerance (m)");
    cmd->add_option("--gripper-tau", cfg.gripper_tau, "gripper grasp threshold");
    cmd->add_option("--joint-tau", cfg.joint_tau, "override per-node joint thresholds on import");
    cmd->add_option("--out", cfg.out, "output path prefix");
    cmd->add_option("--seed", cfg.seed, "global seed");
    cmd->add_option("--parallel", cfg.parallel, "worker count (0 = cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grounded scene-graph reasoning workbench"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::vector<std::string> report_inputs;

    CLI::App* bench = app.add_subcommand("bench", "run benchmark episodes");
    add_common_flags(bench, cfg, config_path);
    bench->add_flag("--noise-per-episode", cfg.noise_per_episode,
                    "freeze the noise pattern per episode instead of per step");
    bench->add_option("--flip-mode", cfg.flip_mode, "substitute|reverse");
    bench->add_flag("!--no-validate", cfg.validate_tasks, "skip oracle solvability validation");
    bench->add_option("--trajectories-out", cfg.trajectories_out,
                      "also record successful-episode trajectories to this file");

    CLI::App* datagen = app.add_subcommand("datagen", "build the training corpus");
    add_common_flags(datagen, cfg, config_path);
    datagen->add_option("--in", cfg.in, "trajectory jsonl (default: oracle-generated)");
    datagen->add_option("--horizons", cfg.horizons, "forward-reasoning horizons (0 = full)");
    datagen->add_option("--synonyms", cfg.synonyms, "synonym table json");
    datagen->add_option("--rephrase-cmd", cfg.rephrase_cmd,
                        "external rephraser command (line in, line out)");

    CLI::App* grade = app.add_subcommand("grade", "offline-grade logged responses");
    add_common_flags(grade, cfg, config_path);
    grade->add_option("--in", cfg.in, "jsonl of {response, scene_graph, goal, weights?}");

    CLI::App* replay = app.add_subcommand("replay", "re-execute recorded trajectories");
    add_common_flags(replay, cfg, config_path);
    replay->add_option("--in", cfg.in, "trajectory jsonl");

    CLI::App* report = app.add_subcommand("report", "aggregate episode files");
    add_common_flags(report, cfg, config_path);
    report->add_option("inputs", report_inputs, "episode jsonl files");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (config_path.empty()) {
            const char* env = std::getenv("GSR_CONFIG");
            if (env != nullptr && *env != '\0') config_path = env;
        }
        if (!config_path.empty()) apply_config_file(config_path, cfg, sub);

        if (sub == bench) return cmd_bench(cfg);
        if (sub == datagen) return cmd_datagen(cfg);
        if (sub == grade) return cmd_grade(cfg);
        if (sub == replay) return cmd_replay(cfg);
        if (sub == report) return cmd_report(cfg, report_inputs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
