#include "arena/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "arena/errors.hpp"
#include "arena/narsese.hpp"

namespace arena::harness {

const char* agent_kind_name(AgentKind k) {
    switch (k) {
        case AgentKind::QLearning: return "qlearning";
        case AgentKind::MiniNars: return "mininars";
        case AgentKind::Bridge: return "bridge";
        case AgentKind::Random: return "random";
    }
    return "?";
}

std::optional<AgentKind> parse_agent_kind(std::string_view name) {
    if (name == "qlearning") return AgentKind::QLearning;
    if (name == "mininars") return AgentKind::MiniNars;
    if (name == "bridge") return AgentKind::Bridge;
    if (name == "random") return AgentKind::Random;
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
    if (env.slippery && env.task != envs::Task::FrozenLake4x4 &&
        env.task != envs::Task::FrozenLake8x8)
        throw ConfigError("slippery applies to the frozenlake tasks only");
    try {
        q.validate();
        nars.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    if (agent == AgentKind::Bridge) {
        bridge::BridgeConfig b = bridge;
        if (b.ops.empty()) return;  // defaulted from the env at run time
        if (static_cast<int>(b.ops.size()) != envs::action_count(env))
            throw ConfigError("bridge op list size does not match the action space");
    }
}

namespace {

// Canonical operation names per task, used for the reasoner protocol.
std::vector<std::string> default_ops(const envs::EnvId& id) {
    switch (id.task) {
        case envs::Task::CliffWalking: return {"up", "right", "down", "left"};
        case envs::Task::Taxi: return {"south", "north", "east", "west", "pickup", "dropoff"};
        case envs::Task::FrozenLake4x4:
        case envs::Task::FrozenLake8x8: return {"left", "down", "right", "up"};
        case envs::Task::FlappyBird: return {"noop", "flap"};
    }
    return {};
}

// First-seen-order interning of FlappyBird tokens into link-table keys.
class TokenInterner {
public:
    std::int64_t id(const std::string& token) {
        auto it = ids_.find(token);
        if (it != ids_.end()) return it->second;
        const std::int64_t id = static_cast<std::int64_t>(ids_.size());
        ids_.emplace(token, id);
        return id;
    }

private:
    std::unordered_map<std::string, std::int64_t> ids_;
};

std::unique_ptr<agents::Agent> make_agent(const ExperimentConfig& cfg, int n_actions) {
    switch (cfg.agent) {
        case AgentKind::QLearning: {
            const std::int64_t n_states =
                envs::is_tabular(cfg.env) ? envs::observation_count(cfg.env) : -1;
            return std::make_unique<agents::QLearningAgent>(cfg.q, n_states, n_actions);
        }
        case AgentKind::MiniNars:
            return std::make_unique<agents::MiniNarsAgent>(cfg.nars, n_actions);
        case AgentKind::Bridge: {
            bridge::BridgeConfig b = cfg.bridge;
            if (b.ops.empty()) b.ops = default_ops(cfg.env);
            if (static_cast<int>(b.ops.size()) != n_actions)
                throw ConfigError("bridge op list size does not match the action space");
            return std::make_unique<bridge::BridgeAgent>(b);
        }
        case AgentKind::Random:
            return std::make_unique<agents::RandomAgent>(n_actions);
    }
    throw ConfigError("unknown agent kind");
}

}  // namespace

MetricsLog run_experiment(const ExperimentConfig& cfg) {
    return run_experiment_full(cfg).log;
}

ExperimentResult run_experiment_full(const ExperimentConfig& cfg) {
    cfg.validate();

    Rng env_rng = Rng::substream(cfg.seed, Rng::kEnv);
    Rng agent_rng = Rng::substream(cfg.seed, Rng::kAgent);
    Rng fallback_rng = Rng::substream(cfg.seed, Rng::kFallback);

    auto env = envs::make_env(cfg.env, cfg.step_limit, cfg.flappy);
    const int n_actions = env->action_count();
    auto agent = make_agent(cfg, n_actions);

    TokenInterner interner;
    const bool tabular = envs::is_tabular(cfg.env);
    const bool q_agent = cfg.agent == AgentKind::QLearning;

    // label: what goes into the CSV state column; key: the agent's table
    // index; token: the protocol form of the state.
    struct View {
        agents::AgentView v;
        std::string label;
    };
    auto view_of = [&](const envs::StepResult& r) {
        View view;
        if (tabular) {
            view.v.key = r.observation;
            view.label = std::to_string(r.observation);
            view.v.token = "s" + view.label;
        } else {
            view.v.token = narsese::flappy_token(r.o1, r.o2);
            if (q_agent) {
                view.v.key = narsese::flappy_qindex(r.o1, r.o2);
                view.label = std::to_string(view.v.key);
            } else {
                view.v.key = interner.id(view.v.token);
                view.label = view.v.token;
            }
        }
        return view;
    };

    MetricsLog log;
    log.steps.reserve(static_cast<std::size_t>(cfg.total_steps));

    long episode = 1;
    long completed = 0;
    agent->begin_episode(completed);
    View view = view_of(env->reset(env_rng));

    double ep_return = 0.0;
    long ep_length = 0;
    bool ep_success = false;
    std::optional<double> ep_eps = agent->epsilon();

    for (long t = 1; t <= cfg.total_steps; ++t) {
        agents::AgentDecision decision = agent->decide(view.v, agent_rng);
        int action;
        agents::Source source = decision.source;
        if (decision.source == agents::Source::Silent) {
            action = static_cast<int>(fallback_rng.uniform_below(static_cast<std::uint64_t>(n_actions)));
            source = agents::Source::Fallback;
        } else {
            action = *decision.action;
        }

        const envs::StepResult res = env->step(action, env_rng);
        View next = view_of(res);

        ep_return += res.reward;
        ep_length += 1;
        ep_success = ep_success || res.success;

        log.steps.push_back({t, episode, view.label, action, source, res.reward, res.terminated,
                             res.truncated, res.success, agent->epsilon()});
        agent->observe(view.v, action, source, res.reward, next.v, res.terminated, res.success);

        if (res.terminated || res.truncated) {
            log.episodes.push_back({episode, ep_length, ep_return, ep_success, ep_eps, true});
            agent->end_episode();
            ++completed;
            ++episode;
            agent->begin_episode(completed);
            view = view_of(env->reset(env_rng));
            ep_return = 0.0;
            ep_length = 0;
            ep_success = false;
            ep_eps = agent->epsilon();
        } else {
            view = std::move(next);
        }
    }
    // Trailing partial episode, so episode lengths always sum to the steps
    // recorded.
    if (ep_length > 0)
        log.episodes.push_back({episode, ep_length, ep_return, ep_success, ep_eps, false});

    agent->finish();
    return {std::move(log), std::move(agent)};
}

// --- CSV ----------------------------------------------------------------------

std::string format_real(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

void write_steps_csv(const MetricsLog& log, std::ostream& out) {
    out << "time_step,episode,state,action,source,reward,terminated,truncated,success,epsilon\n";
    for (const StepRecord& r : log.steps) {
        out << r.time_step << ',' << r.episode << ',' << r.state << ',' << r.action << ','
            << agents::source_name(r.source) << ',' << format_real(r.reward) << ','
            << (r.terminated ? 1 : 0) << ',' << (r.truncated ? 1 : 0) << ',' << (r.success ? 1 : 0)
            << ',';
        if (r.epsilon) out << format_real(*r.epsilon);
        out << '\n';
    }
}

void write_episodes_csv(const MetricsLog& log, std::ostream& out) {
    out << "episode,length,return,success,epsilon_at_start\n";
    for (const EpisodeSummary& e : log.episodes) {
        out << e.episode << ',' << e.length << ',' << format_real(e.ret) << ','
            << (e.success ? 1 : 0) << ',';
        if (e.epsilon_at_start) out << format_real(*e.epsilon_at_start);
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

agents::Source parse_source(const std::string& s) {
    if (s == "policy") return agents::Source::Policy;
    if (s == "explore") return agents::Source::Explore;
    if (s == "babble") return agents::Source::Babble;
    if (s == "fallback") return agents::Source::Fallback;
    throw ConfigError("unknown source in CSV: " + s);
}

}  // namespace

MetricsLog read_steps_csv(std::istream& in) {
    MetricsLog log;
    std::string line;
    if (!std::getline(in, line)) return log;
    if (line != "time_step,episode,state,action,source,reward,terminated,truncated,success,epsilon")
        throw ConfigError("unexpected steps CSV header");

    long ep = 0;
    double ep_return = 0.0;
    long ep_length = 0;
    bool ep_success = false;
    std::optional<double> ep_eps;
    bool ep_done = false;

    auto close_episode = [&](bool completed) {
        if (ep_length > 0)
            log.episodes.push_back({ep, ep_length, ep_return, ep_success, ep_eps, completed});
    };

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 10) throw ConfigError("bad steps CSV row: " + line);
        StepRecord r;
        r.time_step = std::stol(f[0]);
        r.episode = std::stol(f[1]);
        r.state = f[2];
        r.action = std::stoi(f[3]);
        r.source = parse_source(f[4]);
        r.reward = std::stod(f[5]);
        r.terminated = f[6] == "1";
        r.truncated = f[7] == "1";
        r.success = f[8] == "1";
        if (!f[9].empty()) r.epsilon = std::stod(f[9]);

        if (r.episode != ep) {
            close_episode(ep_done);
            ep = r.episode;
            ep_return = 0.0;
            ep_length = 0;
            ep_success = false;
            ep_eps = r.epsilon;
            ep_done = false;
        }
        ep_return += r.reward;
        ep_length += 1;
        ep_success = ep_success || r.success;
        ep_done = r.terminated || r.truncated;
        log.steps.push_back(std::move(r));
    }
    close_episode(ep_done);
    return log;
}

// --- oracle ----------------------------------------------------------------------

namespace {

// Every state must be able to reach some terminated transition; otherwise an
// undiscounted fixed point need not exist.
void check_termination_reachable(const envs::EnvModel& model) {
    const std::int64_t n = model.n_states;
    std::vector<char> can_reach(static_cast<std::size_t>(n), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::int64_t s = 0; s < n; ++s) {
            if (can_reach[static_cast<std::size_t>(s)]) continue;
            for (int a = 0; a < model.n_actions && !can_reach[static_cast<std::size_t>(s)]; ++a) {
                for (const envs::Outcome& o : model.at(s, a)) {
                    if (o.terminated || can_reach[static_cast<std::size_t>(o.next_state)]) {
                        can_reach[static_cast<std::size_t>(s)] = 1;
                        changed = true;
                        break;
                    }
                }
            }
        }
    }
    for (std::int64_t s = 0; s < n; ++s) {
        if (!can_reach[static_cast<std::size_t>(s)])
            throw OracleError("discount 1 rejected: state " + std::to_string(s) +
                              " cannot reach termination");
    }
}

}  // namespace

OracleResult value_iteration(const envs::EnvModel& model, double discount, double tol) {
    if (!(discount > 0.0 && discount <= 1.0)) throw ContractViolation("discount must be in (0, 1]");
    if (discount == 1.0) check_termination_reachable(model);

    const std::int64_t n = model.n_states;
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(values);
    constexpr long kMaxSweeps = 1000000;

    long sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double delta = 0.0;
        for (std::int64_t s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < model.n_actions; ++a) {
                double q = 0.0;
                for (const envs::Outcome& o : model.at(s, a)) {
                    const double p = static_cast<double>(o.prob_num) / o.prob_den;
                    double v = o.reward;
                    if (!o.terminated) v += discount * values[static_cast<std::size_t>(o.next_state)];
                    q += p * v;
                }
                best = std::max(best, q);
            }
            next[static_cast<std::size_t>(s)] = best;
            delta = std::max(delta, std::abs(best - values[static_cast<std::size_t>(s)]));
        }
        values.swap(next);
        if (delta < tol) break;
    }
    if (sweep >= kMaxSweeps) throw OracleError("value iteration did not converge");

    OracleResult r;
    r.values = values;
    r.sweeps = sweep + 1;
    r.policy.assign(static_cast<std::size_t>(n), 0);
    for (std::int64_t s = 0; s < n; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < model.n_actions; ++a) {
            double q = 0.0;
            for (const envs::Outcome& o : model.at(s, a)) {
                const double p = static_cast<double>(o.prob_num) / o.prob_den;
                double v = o.reward;
                if (!o.terminated) v += discount * values[static_cast<std::size_t>(o.next_state)];
                q += p * v;
            }
            if (q > best) {
                best = q;
                best_a = a;
            }
        }
        r.policy[static_cast<std::size_t>(s)] = best_a;
    }
    return r;
}

PolicyEvaluation evaluate_policy(const envs::EnvId& env_id, std::span<const int> policy,
                                 int episodes, std::uint64_t seed, long step_limit) {
    if (!envs::is_tabular(env_id))
        throw UnsupportedEnvironment("policy evaluation needs a tabular task");
    if (static_cast<std::int64_t>(policy.size()) != envs::observation_count(env_id))
        throw ContractViolation("policy must cover every state");

    Rng rng = Rng::substream(seed, Rng::kEnv);
    auto env = envs::make_env(env_id, step_limit);

    double total_return = 0.0;
    int successes = 0;
    for (int e = 0; e < episodes; ++e) {
        envs::StepResult r = env->reset(rng);
        while (true) {
            r = env->step(policy[static_cast<std::size_t>(r.observation)], rng);
            total_return += r.reward;
            if (r.success) ++successes;
            if (r.terminated || r.truncated) break;
        }
    }
    return {total_return / episodes, static_cast<double>(successes) / episodes};
}

}  // namespace arena::harness
