#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "arena/agents.hpp"
#include "arena/narsese.hpp"

namespace arena::bridge {

// Launch-time description of the external reasoner process.
struct BridgeConfig {
    std::string command;             // executable path or name on PATH
    std::vector<std::string> args;
    int deadline_ms = 100;           // per-step read deadline
    std::string exec_pattern = std::string(narsese::kDefaultExecPattern);
    std::vector<std::string> ops;    // action names, registered in order
    std::string babble_line;         // optional config line sent at startup
    std::string transcript_path;     // flushed on shutdown when non-empty

    void validate() const;
};

struct TranscriptRow {
    bool sent = false;  // SENT vs RECV
    long step = 0;
    std::string line;
};

// One external reasoner process driven over stdin/stdout, one line-oriented
// exchange per environment step. Single-owner; not shareable across
// experiments.
class BridgeSession {
public:
    static BridgeSession spawn(const BridgeConfig& cfg);

    BridgeSession(BridgeSession&&) noexcept;
    BridgeSession& operator=(BridgeSession&&) noexcept;
    BridgeSession(const BridgeSession&) = delete;
    BridgeSession& operator=(const BridgeSession&) = delete;
    ~BridgeSession();

    // Sends, in order: the achievement belief when goal_achieved, the state
    // event, the standing goal. Then reads until the deadline and returns
    // the first reported execution (source=policy, 0-based action), or a
    // silent decision when none arrived. Stale output from earlier steps is
    // drained and logged before sending.
    agents::AgentDecision step_exchange(std::string_view state_token, bool goal_achieved);

    // Terminates the child, flushes the transcript to the configured path
    // and returns it. Safe to call when the child already exited.
    std::vector<TranscriptRow> shutdown();

    const std::vector<TranscriptRow>& transcript() const { return transcript_; }
    long deadline_misses() const { return deadline_misses_; }
    long steps() const { return step_; }
    bool alive();

private:
    BridgeSession() = default;

    void send_line(const std::string& line);
    void drain_pending();
    // Reads one text line within the remaining deadline; false on timeout.
    bool read_line(std::string& line, long deadline_ms);

    BridgeConfig cfg_;
    std::vector<narsese::OpName> registered_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::vector<TranscriptRow> transcript_;
    long step_ = 0;
    long deadline_misses_ = 0;
    bool reaped_ = false;
};

// Transcript file format: `<SENT|RECV>\t<step>\t<line>` per row.
void write_transcript(const std::vector<TranscriptRow>& rows, std::ostream& out);

// Harness-facing wrapper. The goal event observed on one step is delivered
// at the start of the next exchange.
class BridgeAgent final : public agents::Agent {
public:
    explicit BridgeAgent(const BridgeConfig& cfg);

    agents::AgentDecision decide(const agents::AgentView& state, Rng& rng) override;
    void observe(const agents::AgentView&, int, agents::Source, double, const agents::AgentView&,
                 bool, bool success) override;
    void finish() override;

    BridgeSession& session() { return session_; }

private:
    BridgeSession session_;
    bool pending_goal_ = false;
};

}  // namespace arena::bridge
