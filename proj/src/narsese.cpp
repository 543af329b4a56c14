#include "arena/narsese.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "arena/errors.hpp"

namespace arena::narsese {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Caret-prefixed token: '^' followed by non-space characters.
std::string_view scan_op_token(std::string_view line, std::size_t caret) {
    std::size_t end = caret + 1;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    return line.substr(caret, end - caret);
}

}  // namespace

LineKind classify_line(std::string_view line) {
    if (ends_with(line, ". :|:")) return LineKind::BeliefEvent;
    if (ends_with(line, "! :|:")) return LineKind::GoalEvent;
    if (!line.empty() && line.front() == '*') return LineKind::Config;
    if (line.find('^') != std::string_view::npos && line.find("executed") != std::string_view::npos)
        return LineKind::Execution;
    return LineKind::Other;
}

std::string encode_state_event(std::string_view token) {
    if (token.empty()) throw EncodingError("empty state token");
    for (char c : token) {
        if (std::isspace(static_cast<unsigned char>(c)))
            throw EncodingError("state token contains whitespace");
    }
    return std::string(token) + ". :|:";
}

std::string encode_goal_event() { return "G! :|:"; }

std::string encode_goal_achieved() { return "G. :|:"; }

std::vector<std::string> setop_commands(const std::vector<std::string>& ops) {
    if (ops.empty() || ops.size() > 10)
        throw EncodingError("operation list must have 1..10 entries");
    std::set<std::string> seen;
    std::vector<std::string> lines;
    int index = 1;
    for (const std::string& op : ops) {
        if (op.empty()) throw EncodingError("empty operation name");
        if (!seen.insert(op).second) throw EncodingError("duplicate operation name: " + op);
        lines.push_back("*setopname " + std::to_string(index) + " ^" + op);
        ++index;
    }
    return lines;
}

std::vector<OpName> register_ops(const std::vector<std::string>& ops) {
    setop_commands(ops);  // validates
    std::vector<OpName> out;
    int index = 1;
    for (const std::string& op : ops) out.push_back({"^" + op, index++});
    return out;
}

std::optional<OpName> parse_execution(std::string_view line, const std::vector<OpName>& registered,
                                      std::string_view pattern) {
    const std::size_t hole = pattern.find("%op%");
    if (hole == std::string_view::npos)
        throw EncodingError("execution pattern must contain %op%");
    const std::string_view before = pattern.substr(0, hole);
    const std::string_view after = pattern.substr(hole + 4);

    for (const OpName& op : registered) {
        std::string needle;
        needle.reserve(before.size() + op.token.size() + after.size());
        needle.append(before).append(op.token).append(after);
        if (line.find(needle) != std::string_view::npos) return op;
    }

    // Detect an execution report for an op nobody registered: any caret
    // token that sits inside an instance of the pattern.
    std::size_t caret = line.find('^');
    while (caret != std::string_view::npos) {
        const std::string_view token = scan_op_token(line, caret);
        std::string needle;
        needle.append(before).append(token).append(after);
        if (line.find(needle) != std::string_view::npos)
            throw UnknownOpError("unregistered operation in execution line: " + std::string(token));
        caret = line.find('^', caret + 1);
    }
    return std::nullopt;
}

namespace {

long long round_away(double x) {
    // llround rounds half away from zero.
    return std::llround(x);
}

}  // namespace

std::string flappy_token(double o1, double o2) {
    return std::to_string(round_away(100.0 * o1)) + "_" + std::to_string(round_away(1000.0 * o2));
}

std::int64_t flappy_qindex(double o1, double o2) {
    return std::llabs(round_away(100.0 * o1)) + std::llabs(round_away(1000.0 * o2));
}

}  // namespace arena::narsese
