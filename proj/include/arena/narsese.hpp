#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arena::narsese {

// The protocol subset exchanged with a reasoner: timestamped belief events,
// the goal lines, operation registrations and execution reports.
enum class LineKind { BeliefEvent, GoalEvent, Execution, Config, Other };

LineKind classify_line(std::string_view line);

// `<token>. :|:` — the token must be non-empty and whitespace-free.
std::string encode_state_event(std::string_view token);

// Standing goal `G! :|:`, re-sent every step.
std::string encode_goal_event();

// Achievement belief `G. :|:`, sent when the task was completed.
std::string encode_goal_achieved();

// Registered operation: caret-prefixed token plus its 1-based index.
struct OpName {
    std::string token;  // includes the leading '^'
    int index = 0;

    bool operator==(const OpName&) const = default;
};

// `*setopname <i> ^<name_i>` lines, indices contiguous from 1. Names are
// passed without the caret. Throws EncodingError on an empty or oversized
// list and on duplicates.
std::vector<std::string> setop_commands(const std::vector<std::string>& ops);

// The OpName list the setop_commands registration implies.
std::vector<OpName> register_ops(const std::vector<std::string>& ops);

// Reasoner output is version-dependent, so the execution shape is
// configuration; %op% stands for the caret-prefixed operation token.
inline constexpr std::string_view kDefaultExecPattern = "%op% executed";

// Scans one output line for an operation execution. Returns the registered
// op when the instantiated pattern occurs in the line; throws UnknownOpError
// when the line reports an execution of an unregistered op; nullopt
// otherwise.
std::optional<OpName> parse_execution(std::string_view line, const std::vector<OpName>& registered,
                                      std::string_view pattern = kDefaultExecPattern);

// FlappyBird observation token `round(100*o1)_round(1000*o2)`, with
// round-half-away-from-zero. Injective on the rounded pair.
std::string flappy_token(double o1, double o2);

// Q-table row index |round(100*o1)| + |round(1000*o2)|. Collapses signs, so
// distinct tokens can share an index.
std::int64_t flappy_qindex(double o1, double o2);

}  // namespace arena::narsese
