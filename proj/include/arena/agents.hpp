#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "arena/rng.hpp"

namespace arena::agents {

// Where a decision came from. Explore/babble/fallback count as random in the
// metrics; policy counts as non-random. Silent means the agent proposes
// nothing and the harness substitutes a fallback action.
enum class Source { Policy, Explore, Babble, Silent, Fallback };

const char* source_name(Source s);
bool source_is_random(Source s);

struct AgentDecision {
    std::optional<int> action;  // empty iff source == Silent
    Source source = Source::Silent;
};

// --- tabular Q-learning -----------------------------------------------------

struct QLearningConfig {
    double alpha = 0.7;
    double gamma = 0.618;
    double eps_max = 1.0;
    double eps_min = 0.01;
    double decay = 0.01;

    void validate() const;
};

// eps_min + (eps_max - eps_min) * exp(-decay * episode); episode counts
// completed episodes, so the schedule is constant within an episode.
double epsilon_at(const QLearningConfig& cfg, long episode);

// Dense state x action value table, or a growable keyed table when the state
// space has no fixed size (the FlappyBird index mapping is unbounded).
// Absent rows read as zero.
class QTable {
public:
    QTable(std::int64_t n_states, int n_actions);  // dense, zero-initialized
    explicit QTable(int n_actions);                // growable

    int n_actions() const { return n_actions_; }
    bool dense() const { return n_states_ >= 0; }
    std::int64_t n_states() const { return n_states_; }

    double get(std::int64_t state, int action) const;
    void set(std::int64_t state, int action, double value);

    // Greedy action with ties broken by the lowest action index.
    int argmax(std::int64_t state) const;

    // States that have a materialized row, in ascending order.
    std::vector<std::int64_t> known_states() const;

private:
    void check(std::int64_t state, int action) const;

    std::int64_t n_states_ = -1;  // -1: growable
    int n_actions_ = 0;
    std::vector<double> dense_;
    std::unordered_map<std::int64_t, std::vector<double>> rows_;
};

// Watkins update; returns the new Q(s,a). The bootstrap term is dropped when
// the transition was terminal.
double q_update(QTable& table, std::int64_t s, int a, double reward, std::int64_t s_next,
                bool terminal, const QLearningConfig& cfg);

// Epsilon-greedy: explore with probability eps, otherwise the greedy action.
AgentDecision select_action_q(const QTable& table, std::int64_t s, double eps, Rng& rng);

// CSV: state,action,value (materialized rows only, ascending state).
void write_qtable_csv(const QTable& table, std::ostream& out);
void read_qtable_csv(QTable& table, std::istream& in);

// --- evidence-based mini reasoner --------------------------------------------

// Two-component truth value derived from positive/negative evidence counts.
struct Truth {
    double frequency = 0.0;
    double confidence = 0.0;
};

// f = w+/w, c = w/(w+1) with w = w+ + w-. Throws NoEvidenceError when w = 0.
Truth truth_from_evidence(long w_plus, long w_minus);

// Decision quantity c*(f - 0.5) + 0.5, in (0,1); 0.5 means total ignorance.
double expectation(const Truth& t);

// Evidence that executing `action` in `state` leads to the goal.
struct TemporalLink {
    std::int64_t state = 0;
    int action = 0;
    long w_plus = 0;
    long w_minus = 0;
};

struct MiniNarsConfig {
    double babble_chance = 0.2;
    double decision_threshold = 0.501;
    int anticipation_window = 10;

    void validate() const;
};

// One link per (state, action); links exist once they carry evidence.
class LinkTable {
public:
    explicit LinkTable(int n_actions);

    int n_actions() const { return n_actions_; }
    // nullptr when the pair carries no evidence yet.
    const TemporalLink* find(std::int64_t state, int action) const;
    TemporalLink& evidence(std::int64_t state, int action);

    std::vector<TemporalLink> sorted() const;

private:
    int n_actions_ = 0;
    std::unordered_map<std::int64_t, std::vector<TemporalLink>> rows_;
};

// CSV: state,action,w_plus,w_minus (ascending state, action).
void write_links_csv(const LinkTable& links, std::ostream& out);

// Expectation-based choice: the argmax action when its expectation exceeds
// the threshold (absent links count 0.5), otherwise babble with the
// configured chance, otherwise silent.
AgentDecision nars_decide(const LinkTable& links, std::int64_t s, const MiniNarsConfig& cfg,
                          Rng& rng);

struct HistoryEntry {
    std::int64_t state = 0;
    int action = 0;
    Source source = Source::Policy;
    bool goal_seen = false;
};

// Ring of the most recent anticipation_window steps of the current episode.
class EpisodeHistory {
public:
    explicit EpisodeHistory(int window) : window_(window) {}

    void push(std::int64_t state, int action, Source source);
    void clear() { entries_.clear(); }
    const std::deque<HistoryEntry>& entries() const { return entries_; }
    void mark_goal_seen();
    // Entry whose anticipation window just elapsed, if the ring overflowed.
    std::optional<HistoryEntry> take_expired();

private:
    int window_ = 10;
    std::deque<HistoryEntry> entries_;
    std::optional<HistoryEntry> expired_;
};

// Applies one step of evidence. Call after pushing the step onto `history`:
// a goal event gives every held (state, action) one positive evidence; an
// entry leaving the window unfulfilled costs its link one negative evidence
// when it was policy-sourced.
void nars_learn(LinkTable& links, EpisodeHistory& history, bool goal_event);

// --- harness-facing agents ----------------------------------------------------

// Agent-facing view of a state: a table key plus the token used on the
// reasoner protocol ("s14" for tabular states, "138_-4" for FlappyBird).
struct AgentView {
    std::int64_t key = 0;
    std::string token;
};

class Agent {
public:
    virtual ~Agent() = default;

    virtual AgentDecision decide(const AgentView& state, Rng& rng) = 0;
    virtual void observe(const AgentView& state, int action, Source source, double reward,
                         const AgentView& next, bool terminated, bool success) = 0;
    virtual void begin_episode(long completed_episodes) { (void)completed_episodes; }
    virtual void end_episode() {}
    // Called once after the last step of a run.
    virtual void finish() {}
    virtual std::optional<double> epsilon() const { return std::nullopt; }
};

class QLearningAgent final : public Agent {
public:
    // n_states < 0 selects the growable table.
    QLearningAgent(QLearningConfig cfg, std::int64_t n_states, int n_actions);

    AgentDecision decide(const AgentView& state, Rng& rng) override;
    void observe(const AgentView& state, int action, Source source, double reward,
                 const AgentView& next, bool terminated, bool success) override;
    void begin_episode(long completed_episodes) override;
    std::optional<double> epsilon() const override { return eps_; }

    const QTable& table() const { return table_; }

private:
    QLearningConfig cfg_;
    QTable table_;
    double eps_;
};

class MiniNarsAgent final : public Agent {
public:
    MiniNarsAgent(MiniNarsConfig cfg, int n_actions);

    AgentDecision decide(const AgentView& state, Rng& rng) override;
    void observe(const AgentView& state, int action, Source source, double reward,
                 const AgentView& next, bool terminated, bool success) override;
    void end_episode() override;

    const LinkTable& links() const { return links_; }

private:
    MiniNarsConfig cfg_;
    LinkTable links_;
    EpisodeHistory history_;
};

class RandomAgent final : public Agent {
public:
    explicit RandomAgent(int n_actions) : n_actions_(n_actions) {}

    AgentDecision decide(const AgentView&, Rng& rng) override;
    void observe(const AgentView&, int, Source, double, const AgentView&, bool, bool) override {}

private:
    int n_actions_ = 0;
};

}  // namespace arena::agents
