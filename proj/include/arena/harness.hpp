#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arena/agents.hpp"
#include "arena/bridge.hpp"
#include "arena/envs.hpp"
#include "arena/rng.hpp"

namespace arena::harness {

enum class AgentKind { QLearning, MiniNars, Bridge, Random };

const char* agent_kind_name(AgentKind k);
std::optional<AgentKind> parse_agent_kind(std::string_view name);

struct ExperimentConfig {
    envs::EnvId env;
    AgentKind agent = AgentKind::QLearning;
    long total_steps = 100000;
    std::uint64_t seed = 1;
    long step_limit = 0;  // 0: per-env default
    agents::QLearningConfig q;
    agents::MiniNarsConfig nars;
    bridge::BridgeConfig bridge;
    envs::FlappyConfig flappy;

    void validate() const;
};

struct StepRecord {
    long time_step = 0;  // 1-based, strictly increasing
    long episode = 0;    // 1-based, non-decreasing
    std::string state;   // agent-facing state label
    int action = 0;
    agents::Source source = agents::Source::Policy;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    bool success = false;
    std::optional<double> epsilon;  // blank for non-Q agents
};

struct EpisodeSummary {
    long episode = 0;
    long length = 0;
    double ret = 0.0;
    bool success = false;
    std::optional<double> epsilon_at_start;
    bool completed = true;  // false only for the trailing partial episode
};

// Full experiment trace. Every learning-curve family is a pure function of
// this log.
struct MetricsLog {
    std::vector<StepRecord> steps;
    std::vector<EpisodeSummary> episodes;
};

// Runs the step loop: agent decision (uniform fallback action from a
// dedicated stream when the agent is silent), environment step, learning
// signal, episode bookkeeping with the exploration schedule advanced just
// before each new episode.
MetricsLog run_experiment(const ExperimentConfig& cfg);

// Same run, but also hands back the trained agent (for table export).
struct ExperimentResult {
    MetricsLog log;
    std::unique_ptr<agents::Agent> agent;
};
ExperimentResult run_experiment_full(const ExperimentConfig& cfg);

// CSV header: time_step,episode,state,action,source,reward,terminated,truncated,success,epsilon
void write_steps_csv(const MetricsLog& log, std::ostream& out);
// CSV header: episode,length,return,success,epsilon_at_start
void write_episodes_csv(const MetricsLog& log, std::ostream& out);
// Rebuilds a log (including episode summaries) from a steps CSV.
MetricsLog read_steps_csv(std::istream& in);

// --- oracle -----------------------------------------------------------------

struct OracleResult {
    std::vector<double> values;
    std::vector<int> policy;  // greedy, lowest action index on ties
    long sweeps = 0;
};

// Jacobi value iteration over an enumerated model. discount = 1 is accepted
// only when a terminal transition is reachable from every state; throws
// OracleError when the sweep cap (1e6) is hit.
OracleResult value_iteration(const envs::EnvModel& model, double discount, double tol = 1e-10);

struct PolicyEvaluation {
    double mean_return = 0.0;
    double success_rate = 0.0;
};

// Greedy rollouts of a fixed policy, no learning, per-env step limits.
PolicyEvaluation evaluate_policy(const envs::EnvId& env, std::span<const int> policy, int episodes,
                                 std::uint64_t seed, long step_limit = 0);

// --- small shared plumbing ----------------------------------------------------

// Shortest decimal that round-trips to the same double. Used for every CSV
// real so identical runs serialize to identical bytes.
std::string format_real(double v);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace arena::harness
