#include "arena/agents.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "arena/errors.hpp"

namespace arena::agents {

const char* source_name(Source s) {
    switch (s) {
        case Source::Policy: return "policy";
        case Source::Explore: return "explore";
        case Source::Babble: return "babble";
        case Source::Silent: return "silent";
        case Source::Fallback: return "fallback";
    }
    return "?";
}

bool source_is_random(Source s) {
    return s == Source::Explore || s == Source::Babble || s == Source::Fallback;
}

void QLearningConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ContractViolation("alpha must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractViolation("gamma must be in [0, 1)");
    if (!(eps_min >= 0.0 && eps_min <= eps_max && eps_max <= 1.0))
        throw ContractViolation("need 0 <= eps_min <= eps_max <= 1");
    if (!(decay >= 0.0)) throw ContractViolation("decay must be >= 0");
}

double epsilon_at(const QLearningConfig& cfg, long episode) {
    return cfg.eps_min + (cfg.eps_max - cfg.eps_min) * std::exp(-cfg.decay * static_cast<double>(episode));
}

QTable::QTable(std::int64_t n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions) {
    if (n_states < 0 || n_actions <= 0) throw ContractViolation("bad QTable dimensions");
    dense_.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
}

QTable::QTable(int n_actions) : n_states_(-1), n_actions_(n_actions) {
    if (n_actions <= 0) throw ContractViolation("bad QTable dimensions");
}

void QTable::check(std::int64_t state, int action) const {
    if (action < 0 || action >= n_actions_) throw ContractViolation("action index out of range");
    if (dense() && (state < 0 || state >= n_states_))
        throw ContractViolation("state index out of range");
}

double QTable::get(std::int64_t state, int action) const {
    check(state, action);
    if (dense()) return dense_[static_cast<std::size_t>(state) * n_actions_ + action];
    auto it = rows_.find(state);
    return it == rows_.end() ? 0.0 : it->second[static_cast<std::size_t>(action)];
}

void QTable::set(std::int64_t state, int action, double value) {
    check(state, action);
    if (!std::isfinite(value)) throw ContractViolation("non-finite Q value");
    if (dense()) {
        dense_[static_cast<std::size_t>(state) * n_actions_ + action] = value;
    } else {
        auto it = rows_.find(state);
        if (it == rows_.end()) it = rows_.emplace(state, std::vector<double>(n_actions_, 0.0)).first;
        it->second[static_cast<std::size_t>(action)] = value;
    }
}

int QTable::argmax(std::int64_t state) const {
    int best = 0;
    double best_v = get(state, 0);
    for (int a = 1; a < n_actions_; ++a) {
        const double v = get(state, a);
        if (v > best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

std::vector<std::int64_t> QTable::known_states() const {
    std::vector<std::int64_t> keys;
    if (dense()) {
        keys.resize(static_cast<std::size_t>(n_states_));
        for (std::int64_t s = 0; s < n_states_; ++s) keys[static_cast<std::size_t>(s)] = s;
    } else {
        keys.reserve(rows_.size());
        for (const auto& [s, _] : rows_) keys.push_back(s);
        std::sort(keys.begin(), keys.end());
    }
    return keys;
}

double q_update(QTable& table, std::int64_t s, int a, double reward, std::int64_t s_next,
                bool terminal, const QLearningConfig& cfg) {
    if (!std::isfinite(reward)) throw ContractViolation("non-finite reward");
    double target = reward;
    if (!terminal) {
        double best_next = table.get(s_next, 0);
        for (int an = 1; an < table.n_actions(); ++an)
            best_next = std::max(best_next, table.get(s_next, an));
        target += cfg.gamma * best_next;
    }
    const double updated = table.get(s, a) + cfg.alpha * (target - table.get(s, a));
    table.set(s, a, updated);
    return updated;
}

AgentDecision select_action_q(const QTable& table, std::int64_t s, double eps, Rng& rng) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ContractViolation("eps must be in [0, 1]");
    if (rng.uniform_real() < eps) {
        return {static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(table.n_actions()))),
                Source::Explore};
    }
    return {table.argmax(s), Source::Policy};
}

void write_qtable_csv(const QTable& table, std::ostream& out) {
    out << "state,action,value\n";
    std::ostringstream val;
    val.precision(17);
    for (std::int64_t s : table.known_states()) {
        for (int a = 0; a < table.n_actions(); ++a) {
            val.str("");
            val << table.get(s, a);
            out << s << ',' << a << ',' << val.str() << '\n';
        }
    }
}

void read_qtable_csv(QTable& table, std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "state,action,value")
        throw ConfigError("bad q-table CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::int64_t s;
        int a;
        double v;
        char c1, c2;
        std::istringstream row(line);
        if (!(row >> s >> c1 >> a >> c2 >> v) || c1 != ',' || c2 != ',')
            throw ConfigError("bad q-table CSV row: " + line);
        table.set(s, a, v);
    }
}

// --- truth / links -----------------------------------------------------------

Truth truth_from_evidence(long w_plus, long w_minus) {
    if (w_plus < 0 || w_minus < 0) throw ContractViolation("negative evidence count");
    const double w = static_cast<double>(w_plus + w_minus);
    if (w_plus + w_minus < 1) throw NoEvidenceError("no evidence for link");
    return {static_cast<double>(w_plus) / w, w / (w + 1.0)};
}

double expectation(const Truth& t) { return t.confidence * (t.frequency - 0.5) + 0.5; }

void MiniNarsConfig::validate() const {
    if (!(babble_chance >= 0.0 && babble_chance <= 1.0))
        throw ContractViolation("babble_chance must be in [0, 1]");
    if (!(decision_threshold > 0.5 && decision_threshold < 1.0))
        throw ContractViolation("decision_threshold must be in (0.5, 1)");
    if (anticipation_window < 1) throw ContractViolation("anticipation_window must be >= 1");
}

LinkTable::LinkTable(int n_actions) : n_actions_(n_actions) {
    if (n_actions <= 0) throw ContractViolation("bad LinkTable dimensions");
}

const TemporalLink* LinkTable::find(std::int64_t state, int action) const {
    if (action < 0 || action >= n_actions_) throw ContractViolation("action index out of range");
    auto it = rows_.find(state);
    if (it == rows_.end()) return nullptr;
    const TemporalLink& l = it->second[static_cast<std::size_t>(action)];
    return (l.w_plus + l.w_minus) > 0 ? &l : nullptr;
}

TemporalLink& LinkTable::evidence(std::int64_t state, int action) {
    if (action < 0 || action >= n_actions_) throw ContractViolation("action index out of range");
    auto it = rows_.find(state);
    if (it == rows_.end()) {
        std::vector<TemporalLink> row(static_cast<std::size_t>(n_actions_));
        for (int a = 0; a < n_actions_; ++a) {
            row[static_cast<std::size_t>(a)].state = state;
            row[static_cast<std::size_t>(a)].action = a;
        }
        it = rows_.emplace(state, std::move(row)).first;
    }
    return it->second[static_cast<std::size_t>(action)];
}

std::vector<TemporalLink> LinkTable::sorted() const {
    std::vector<TemporalLink> all;
    for (const auto& [_, row] : rows_)
        for (const TemporalLink& l : row)
            if (l.w_plus + l.w_minus > 0) all.push_back(l);
    std::sort(all.begin(), all.end(), [](const TemporalLink& a, const TemporalLink& b) {
        return a.state != b.state ? a.state < b.state : a.action < b.action;
    });
    return all;
}

void write_links_csv(const LinkTable& links, std::ostream& out) {
    out << "state,action,w_plus,w_minus\n";
    for (const TemporalLink& l : links.sorted())
        out << l.state << ',' << l.action << ',' << l.w_plus << ',' << l.w_minus << '\n';
}

AgentDecision nars_decide(const LinkTable& links, std::int64_t s, const MiniNarsConfig& cfg,
                          Rng& rng) {
    int best = 0;
    double best_e = -1.0;
    for (int a = 0; a < links.n_actions(); ++a) {
        const TemporalLink* l = links.find(s, a);
        const double e = l ? expectation(truth_from_evidence(l->w_plus, l->w_minus)) : 0.5;
        if (e > best_e) {
            best_e = e;
            best = a;
        }
    }
    if (best_e > cfg.decision_threshold) return {best, Source::Policy};
    if (rng.uniform_real() < cfg.babble_chance) {
        return {static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(links.n_actions()))),
                Source::Babble};
    }
    return {std::nullopt, Source::Silent};
}

void EpisodeHistory::push(std::int64_t state, int action, Source source) {
    entries_.push_back({state, action, source, false});
    if (static_cast<int>(entries_.size()) > window_) {
        expired_ = entries_.front();
        entries_.pop_front();
    }
}

void EpisodeHistory::mark_goal_seen() {
    for (HistoryEntry& e : entries_) e.goal_seen = true;
}

std::optional<HistoryEntry> EpisodeHistory::take_expired() {
    auto e = expired_;
    expired_.reset();
    return e;
}

void nars_learn(LinkTable& links, EpisodeHistory& history, bool goal_event) {
    if (goal_event) {
        for (const HistoryEntry& e : history.entries())
            links.evidence(e.state, e.action).w_plus += 1;
        history.mark_goal_seen();
    }
    if (auto expired = history.take_expired()) {
        // Anticipation failure: a policy-chosen action ran its window down
        // without the goal appearing.
        if (expired->source == Source::Policy && !expired->goal_seen)
            links.evidence(expired->state, expired->action).w_minus += 1;
    }
}

// --- harness-facing agents ------------------------------------------------------

QLearningAgent::QLearningAgent(QLearningConfig cfg, std::int64_t n_states, int n_actions)
    : cfg_(cfg),
      table_(n_states < 0 ? QTable(n_actions) : QTable(n_states, n_actions)),
      eps_(epsilon_at(cfg, 0)) {
    cfg_.validate();
}

AgentDecision QLearningAgent::decide(const AgentView& state, Rng& rng) {
    return select_action_q(table_, state.key, eps_, rng);
}

void QLearningAgent::observe(const AgentView& state, int action, Source, double reward,
                             const AgentView& next, bool terminated, bool) {
    q_update(table_, state.key, action, reward, next.key, terminated, cfg_);
}

void QLearningAgent::begin_episode(long completed_episodes) {
    eps_ = epsilon_at(cfg_, completed_episodes);
}

MiniNarsAgent::MiniNarsAgent(MiniNarsConfig cfg, int n_actions)
    : cfg_(cfg), links_(n_actions), history_(cfg.anticipation_window) {
    cfg_.validate();
}

AgentDecision MiniNarsAgent::decide(const AgentView& state, Rng& rng) {
    return nars_decide(links_, state.key, cfg_, rng);
}

void MiniNarsAgent::observe(const AgentView& state, int action, Source source, double,
                            const AgentView&, bool, bool success) {
    // Only the goal event carries information; rewards are never consumed.
    history_.push(state.key, action, source);
    nars_learn(links_, history_, success);
}

void MiniNarsAgent::end_episode() { history_.clear(); }

AgentDecision RandomAgent::decide(const AgentView&, Rng& rng) {
    return {static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_actions_))),
            Source::Explore};
}

}  // namespace arena::agents
