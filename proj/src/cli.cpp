#include "arena/cli.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "arena/errors.hpp"
#include "arena/harness.hpp"
#include "arena/plot.hpp"

namespace fs = std::filesystem;

namespace arena::cli {

namespace {

struct RunOptions {
    std::string env;
    bool slippery = false;
    std::string agent = "qlearning";
    long steps = 100000;
    std::uint64_t seed = 1;
    long limit = 0;
    std::string out = ".";
    std::string batch;
    bool dump_agent_state = false;

    agents::QLearningConfig q;
    agents::MiniNarsConfig nars;
    std::string bridge_command;
    int bridge_deadline_ms = 100;
    std::string bridge_exec_pattern = std::string(narsese::kDefaultExecPattern);
    std::string bridge_babble_line;
    std::vector<std::string> bridge_ops;
    envs::FlappyConfig flappy;
};

void attach_run_options(CLI::App& app, RunOptions& o) {
    app.add_option("--env", o.env, "task: cliffwalking, taxi, frozenlake4x4, frozenlake8x8, flappybird");
    app.add_flag("--slippery", o.slippery, "slippery frozenlake dynamics");
    app.add_option("--agent", o.agent, "agent: qlearning, mininars, bridge, random");
    app.add_option("--steps", o.steps, "total environment time steps");
    app.add_option("--seed", o.seed, "experiment seed");
    app.add_option("--limit", o.limit, "episode step limit (0: per-task default)");
    app.add_option("--out", o.out, "output directory")->envname("ARENA_OUT");
    app.add_option("--batch", o.batch, "directory of .cfg files to run as a batch");
    app.add_flag("--dump-agent-state", o.dump_agent_state,
                 "also write the learned table (qtable.csv / links.csv)");

    app.add_option("--q.alpha", o.q.alpha, "learning rate");
    app.add_option("--q.gamma", o.q.gamma, "discount factor");
    app.add_option("--q.eps_max", o.q.eps_max, "initial exploration rate");
    app.add_option("--q.eps_min", o.q.eps_min, "final exploration rate");
    app.add_option("--q.decay", o.q.decay, "per-episode exploration decay");

    app.add_option("--nars.babble_chance", o.nars.babble_chance, "motor babbling chance");
    app.add_option("--nars.decision_threshold", o.nars.decision_threshold,
                   "expectation needed for a policy decision");
    app.add_option("--nars.window", o.nars.anticipation_window, "anticipation window (steps)");

    app.add_option("--bridge.command", o.bridge_command,
                   "external reasoner command line (whitespace separated)");
    app.add_option("--bridge.deadline_ms", o.bridge_deadline_ms, "per-step read deadline");
    app.add_option("--bridge.exec_pattern", o.bridge_exec_pattern,
                   "execution line pattern, %op% is the operation token");
    app.add_option("--bridge.babble_line", o.bridge_babble_line,
                   "config line sent to the reasoner at startup");
    app.add_option("--bridge.ops", o.bridge_ops, "operation names (default: per-task names)");

    app.add_option("--flappy.gravity", o.flappy.gravity, "units/tick^2");
    app.add_option("--flappy.max_fall_speed", o.flappy.max_fall_speed, "fall speed cap");
    app.add_option("--flappy.flap_speed", o.flappy.flap_speed, "velocity set by a flap");
    app.add_option("--flappy.pipe_speed", o.flappy.pipe_speed, "pipe units/tick");
    app.add_option("--flappy.pipe_spacing", o.flappy.pipe_spacing, "distance between pipes");
    app.add_option("--flappy.pipe_width", o.flappy.pipe_width, "pipe width");
    app.add_option("--flappy.gap_height", o.flappy.gap_height, "hole height");
    app.add_option("--flappy.hole_min", o.flappy.hole_min, "lowest hole center");
    app.add_option("--flappy.hole_max", o.flappy.hole_max, "highest hole center");
}

envs::EnvId parse_env_or_throw(const std::string& name, bool slippery) {
    if (name.empty()) throw UsageError("--env is required");
    const auto task = envs::parse_task(name);
    if (!task) throw UsageError("unknown environment: " + name);
    if (slippery && *task != envs::Task::FrozenLake4x4 && *task != envs::Task::FrozenLake8x8)
        throw ConfigError("--slippery applies to the frozenlake tasks only");
    return {*task, slippery};
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string word;
    while (in >> word) out.push_back(word);
    return out;
}

harness::ExperimentConfig to_experiment_config(const RunOptions& o, const std::string& out_dir) {
    harness::ExperimentConfig cfg;
    cfg.env = parse_env_or_throw(o.env, o.slippery);
    const auto kind = harness::parse_agent_kind(o.agent);
    if (!kind) throw UsageError("unknown agent: " + o.agent);
    cfg.agent = *kind;
    cfg.total_steps = o.steps;
    cfg.seed = o.seed;
    cfg.step_limit = o.limit;
    cfg.q = o.q;
    cfg.nars = o.nars;
    cfg.flappy = o.flappy;
    if (cfg.agent == harness::AgentKind::Bridge) {
        auto words = split_ws(o.bridge_command);
        if (words.empty()) throw ConfigError("--bridge.command is required for the bridge agent");
        cfg.bridge.command = words.front();
        cfg.bridge.args.assign(words.begin() + 1, words.end());
        cfg.bridge.deadline_ms = o.bridge_deadline_ms;
        cfg.bridge.exec_pattern = o.bridge_exec_pattern;
        cfg.bridge.babble_line = o.bridge_babble_line;
        cfg.bridge.ops = o.bridge_ops;
        cfg.bridge.transcript_path = (fs::path(out_dir) / "transcript.tsv").string();
    }
    return cfg;
}

void write_manifest(const RunOptions& o, const harness::ExperimentConfig& cfg,
                    std::uint64_t steps_hash, std::ostream& out) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(steps_hash));
    out << "version = " << kVersion << "\n";
    out << "env = " << envs::env_name(cfg.env) << "\n";
    out << "agent = " << harness::agent_kind_name(cfg.agent) << "\n";
    out << "steps = " << cfg.total_steps << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "limit = " << (cfg.step_limit > 0 ? cfg.step_limit : envs::default_step_limit(cfg.env))
        << "\n";
    out << "q.alpha = " << harness::format_real(cfg.q.alpha) << "\n";
    out << "q.gamma = " << harness::format_real(cfg.q.gamma) << "\n";
    out << "q.eps_max = " << harness::format_real(cfg.q.eps_max) << "\n";
    out << "q.eps_min = " << harness::format_real(cfg.q.eps_min) << "\n";
    out << "q.decay = " << harness::format_real(cfg.q.decay) << "\n";
    out << "nars.babble_chance = " << harness::format_real(cfg.nars.babble_chance) << "\n";
    out << "nars.decision_threshold = " << harness::format_real(cfg.nars.decision_threshold) << "\n";
    out << "nars.window = " << cfg.nars.anticipation_window << "\n";
    if (cfg.agent == harness::AgentKind::Bridge) {
        out << "bridge.command = " << o.bridge_command << "\n";
        out << "bridge.deadline_ms = " << cfg.bridge.deadline_ms << "\n";
        out << "bridge.exec_pattern = " << cfg.bridge.exec_pattern << "\n";
    }
    out << "steps_csv_fnv1a64 = " << hash << "\n";
}

// Runs one experiment and writes steps.csv, episodes.csv and manifest.txt
// (plus transcript.tsv for bridge runs and the learned table on request).
void execute_run(const RunOptions& o, const std::string& out_dir, std::ostream& console) {
    fs::create_directories(out_dir);
    harness::ExperimentConfig cfg = to_experiment_config(o, out_dir);

    harness::ExperimentResult result = harness::run_experiment_full(cfg);

    std::ostringstream steps_buf;
    harness::write_steps_csv(result.log, steps_buf);
    const std::string steps_bytes = steps_buf.str();

    {
        std::ofstream f(fs::path(out_dir) / "steps.csv");
        if (!f) throw std::runtime_error("cannot write " + out_dir + "/steps.csv");
        f << steps_bytes;
    }
    {
        std::ofstream f(fs::path(out_dir) / "episodes.csv");
        harness::write_episodes_csv(result.log, f);
    }
    {
        std::ofstream f(fs::path(out_dir) / "manifest.txt");
        write_manifest(o, cfg, harness::fnv1a64(steps_bytes), f);
    }
    if (o.dump_agent_state) {
        if (const auto* q = dynamic_cast<const agents::QLearningAgent*>(result.agent.get())) {
            std::ofstream f(fs::path(out_dir) / "qtable.csv");
            agents::write_qtable_csv(q->table(), f);
        } else if (const auto* n = dynamic_cast<const agents::MiniNarsAgent*>(result.agent.get())) {
            std::ofstream f(fs::path(out_dir) / "links.csv");
            agents::write_links_csv(n->links(), f);
        }
    }

    console << envs::env_name(cfg.env) << " " << harness::agent_kind_name(cfg.agent) << " steps="
            << cfg.total_steps << " episodes=" << result.log.episodes.size() << " -> " << out_dir
            << "\n";
}

int cmd_run(const RunOptions& o, std::ostream& out) {
    if (o.batch.empty()) {
        execute_run(o, o.out, out);
        return 0;
    }

    // Batch mode: every .cfg in the directory is an independent run; they
    // fan out across threads, one output subdirectory per file.
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.batch))
        if (entry.is_regular_file() && entry.path().extension() == ".cfg")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no .cfg files in " + o.batch);

    std::vector<std::string> reports(files.size());
    std::vector<int> codes(files.size(), 0);
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(files.size()));

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
            std::ostringstream local;
            try {
                RunOptions job;
                CLI::App app("batch job");
                attach_run_options(app, job);
                app.allow_config_extras(false);
                app.set_config("--config")->required();
                const std::string path = files[i].string();
                const char* argv[] = {"arena-batch", "--config", path.c_str()};
                app.parse(3, argv);
                const std::string sub = (fs::path(o.out) / files[i].stem()).string();
                execute_run(job, sub, local);
            } catch (const CLI::ParseError& e) {
                local << files[i].string() << ": " << e.what() << "\n";
                codes[i] = 2;
            } catch (const ConfigError& e) {
                local << files[i].string() << ": " << e.what() << "\n";
                codes[i] = 2;
            } catch (const std::exception& e) {
                local << files[i].string() << ": " << e.what() << "\n";
                codes[i] = 3;
            }
            reports[i] = local.str();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int rc = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        out << reports[i];
        rc = std::max(rc, codes[i]);
    }
    return rc;
}

int cmd_plot(const std::string& input, const std::string& family, const std::string& out_path,
             std::ostream& out) {
    if (family == "list") {
        for (const std::string& f : plot::family_names()) out << f << "\n";
        return 0;
    }
    if (input.empty()) throw UsageError("--in is required");
    if (out_path.empty()) throw UsageError("--out is required");
    if (family != "all" && !plot::is_family(family))
        throw UsageError("unknown figure family: " + family + " (use --family list)");

    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot read " + input);
    const harness::MetricsLog log = harness::read_steps_csv(in);

    if (family == "all") {
        fs::create_directories(out_path);
        for (const std::string& f : plot::family_names()) {
            std::ofstream svg(fs::path(out_path) / (f + ".svg"));
            svg << plot::render_svg(plot::build_family(log, f));
        }
        return 0;
    }
    std::ofstream svg(out_path);
    if (!svg) throw std::runtime_error("cannot write " + out_path);
    svg << plot::render_svg(plot::build_family(log, family));
    return 0;
}

int cmd_oracle(const std::string& env_name, bool slippery, double discount,
               const std::string& out_dir, std::ostream& out) {
    const envs::EnvId id = parse_env_or_throw(env_name, slippery);
    if (!envs::is_tabular(id)) throw UsageError("oracle supports the tabular tasks only");

    const envs::EnvModel model = envs::enumerate_model(id);
    const harness::OracleResult r = harness::value_iteration(model, discount);

    double start_value = 0.0;
    if (id.task == envs::Task::Taxi) {
        // Random starts: average over the legal initial states.
        long count = 0;
        for (int row = 0; row < 5; ++row)
            for (int col = 0; col < 5; ++col)
                for (int pass = 0; pass < 4; ++pass)
                    for (int dest = 0; dest < 4; ++dest) {
                        if (pass == dest) continue;
                        start_value += r.values[static_cast<std::size_t>(
                            envs::taxi_encode(row, col, pass, dest))];
                        ++count;
                    }
        start_value /= static_cast<double>(count);
    } else if (id.task == envs::Task::CliffWalking) {
        start_value = r.values[36];
    } else {
        start_value = r.values[0];
    }

    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "policy.csv");
        f << "state,action\n";
        for (std::size_t s = 0; s < r.policy.size(); ++s) f << s << ',' << r.policy[s] << '\n';
    }
    {
        std::ofstream f(fs::path(out_dir) / "model.csv");
        envs::write_model_csv(model, f);
    }

    out << "env = " << envs::env_name(id) << "\n";
    out << "discount = " << harness::format_real(discount) << "\n";
    out << "sweeps = " << r.sweeps << "\n";
    out << "optimal start value = " << harness::format_real(start_value) << "\n";
    return 0;
}

int cmd_list_envs(std::ostream& out) {
    const envs::EnvId all[] = {
        {envs::Task::CliffWalking, false}, {envs::Task::Taxi, false},
        {envs::Task::FrozenLake4x4, false}, {envs::Task::FrozenLake8x8, false},
        {envs::Task::FlappyBird, false},
    };
    out << "name            actions  observations\n";
    for (const envs::EnvId& id : all) {
        const std::int64_t n = envs::observation_count(id);
        char line[80];
        std::snprintf(line, sizeof line, "%-15s %7d  %s\n", envs::env_name(id).c_str(),
                      envs::action_count(id), n > 0 ? std::to_string(n).c_str() : "unbounded");
        out << line;
        if (id.task == envs::Task::FrozenLake4x4 || id.task == envs::Task::FrozenLake8x8) {
            std::snprintf(line, sizeof line, "%-15s %7d  %s\n",
                          envs::env_name({id.task, true}).c_str(), envs::action_count(id),
                          std::to_string(n).c_str());
            out << line;
        }
    }
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"arena: deterministic control-task benchmark runner"};
    app.require_subcommand(1);

    RunOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "run one experiment (or a --batch of them)");
    attach_run_options(*run, run_opts);
    run->allow_config_extras(false);
    run->set_config("--config", "", "key = value config file; flags override it");

    std::string plot_in, plot_family, plot_out;
    CLI::App* plot_cmd = app.add_subcommand("plot", "render a learning-curve family as SVG");
    plot_cmd->add_option("--in", plot_in, "steps.csv produced by run");
    plot_cmd->add_option("--family", plot_family, "family name, 'all' or 'list'")->required();
    plot_cmd->add_option("--out", plot_out, "output file (directory for --family all)");

    std::string oracle_env, oracle_out = ".";
    bool oracle_slippery = false;
    double oracle_discount = 1.0;
    CLI::App* oracle = app.add_subcommand("oracle", "value-iteration solution of a tabular task");
    oracle->add_option("--env", oracle_env, "tabular task name");
    oracle->add_flag("--slippery", oracle_slippery, "slippery frozenlake dynamics");
    oracle->add_option("--discount", oracle_discount, "discount factor in (0, 1]");
    oracle->add_option("--out", oracle_out, "output directory")->envname("ARENA_OUT");

    CLI::App* list_cmd = app.add_subcommand("list-envs", "list the available tasks");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_opts, out);
        if (plot_cmd->parsed()) return cmd_plot(plot_in, plot_family, plot_out, out);
        if (oracle->parsed()) return cmd_oracle(oracle_env, oracle_slippery, oracle_discount,
                                                oracle_out, out);
        if (list_cmd->parsed()) return cmd_list_envs(out);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::FileError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ContractViolation& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace arena::cli
