#include "arena/bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <ostream>
#include <thread>

#include "arena/errors.hpp"

namespace arena::bridge {

namespace {

using Clock = std::chrono::steady_clock;

long elapsed_ms(Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

bool executable(const std::string& path) { return ::access(path.c_str(), X_OK) == 0; }

// Resolve like the shell would: explicit paths as-is, bare names via PATH.
bool resolvable(const std::string& command) {
    if (command.find('/') != std::string::npos) return executable(command);
    const char* path = std::getenv("PATH");
    if (path == nullptr) return false;
    std::string dirs(path);
    std::size_t pos = 0;
    while (pos <= dirs.size()) {
        const std::size_t colon = dirs.find(':', pos);
        const std::string dir = dirs.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
        if (!dir.empty() && executable(dir + "/" + command)) return true;
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    return false;
}

}  // namespace

void BridgeConfig::validate() const {
    if (command.empty()) throw ConfigError("bridge command is empty");
    if (deadline_ms <= 0) throw ConfigError("bridge deadline must be positive");
    if (ops.empty()) throw ConfigError("bridge op list is empty");
}

BridgeSession BridgeSession::spawn(const BridgeConfig& cfg) {
    cfg.validate();
    if (!resolvable(cfg.command)) throw SpawnError("cannot resolve command: " + cfg.command);

    // Writing to a dead child must surface as an error, not a signal.
    ::signal(SIGPIPE, SIG_IGN);

    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw SpawnError("pipe: " + std::string(std::strerror(errno)));
    if (::pipe(from_child) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw SpawnError("pipe: " + std::string(std::strerror(errno)));
    }

    const int pid = ::fork();
    if (pid < 0) throw SpawnError("fork: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(cfg.command.c_str()));
        for (const std::string& a : cfg.args) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        ::execvp(cfg.command.c_str(), argv.data());
        ::_exit(127);
    }

    BridgeSession s;
    s.cfg_ = cfg;
    s.pid_ = pid;
    s.to_child_ = to_child[1];
    s.from_child_ = from_child[0];
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(s.from_child_, F_SETFL, O_NONBLOCK);

    s.registered_ = narsese::register_ops(cfg.ops);
    for (const std::string& line : narsese::setop_commands(cfg.ops)) s.send_line(line);
    if (!cfg.babble_line.empty()) s.send_line(cfg.babble_line);
    return s;
}

BridgeSession::BridgeSession(BridgeSession&& other) noexcept { *this = std::move(other); }

BridgeSession& BridgeSession::operator=(BridgeSession&& other) noexcept {
    if (this != &other) {
        cfg_ = std::move(other.cfg_);
        registered_ = std::move(other.registered_);
        pid_ = other.pid_;
        to_child_ = other.to_child_;
        from_child_ = other.from_child_;
        buffer_ = std::move(other.buffer_);
        transcript_ = std::move(other.transcript_);
        step_ = other.step_;
        deadline_misses_ = other.deadline_misses_;
        reaped_ = other.reaped_;
        other.pid_ = -1;
        other.to_child_ = -1;
        other.from_child_ = -1;
    }
    return *this;
}

BridgeSession::~BridgeSession() {
    if (pid_ >= 0) {
        try {
            shutdown();
        } catch (...) {
        }
    }
}

bool BridgeSession::alive() {
    if (pid_ < 0 || reaped_) return false;
    if (::waitpid(pid_, nullptr, WNOHANG) == 0) return true;
    reaped_ = true;
    return false;
}

void BridgeSession::send_line(const std::string& line) {
    if (to_child_ < 0) throw BrokenSessionError("session already shut down");
    std::string out = line + "\n";
    std::size_t off = 0;
    while (off < out.size()) {
        const ssize_t n = ::write(to_child_, out.data() + off, out.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw BrokenSessionError("write to reasoner failed: " + std::string(std::strerror(errno)));
        }
        off += static_cast<std::size_t>(n);
    }
    transcript_.push_back({true, step_, line});
}

void BridgeSession::drain_pending() {
    char chunk[4096];
    while (true) {
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n > 0) {
            buffer_.append(chunk, static_cast<std::size_t>(n));
            continue;
        }
        break;  // EAGAIN, EOF or error; EOF is detected on the next blocking read
    }
    // Anything buffered now predates this step's send and must not become a
    // decision; log it and move on.
    std::size_t nl;
    while ((nl = buffer_.find('\n')) != std::string::npos) {
        transcript_.push_back({false, step_, buffer_.substr(0, nl)});
        buffer_.erase(0, nl + 1);
    }
}

bool BridgeSession::read_line(std::string& line, long deadline_ms) {
    const auto start = Clock::now();
    while (true) {
        const std::size_t nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return true;
        }
        const long remaining = deadline_ms - elapsed_ms(start);
        if (remaining <= 0) return false;
        struct pollfd pfd{from_child_, POLLIN, 0};
        const int pr = ::poll(&pfd, 1, static_cast<int>(remaining));
        if (pr < 0) {
            if (errno == EINTR) continue;
            throw BrokenSessionError("poll failed: " + std::string(std::strerror(errno)));
        }
        if (pr == 0) return false;
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n > 0) {
            buffer_.append(chunk, static_cast<std::size_t>(n));
        } else if (n == 0) {
            throw BrokenSessionError("reasoner process exited");
        } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
            throw BrokenSessionError("read failed: " + std::string(std::strerror(errno)));
        }
    }
}

agents::AgentDecision BridgeSession::step_exchange(std::string_view state_token,
                                                   bool goal_achieved) {
    if (pid_ < 0) throw BrokenSessionError("session already shut down");
    ++step_;
    drain_pending();

    if (goal_achieved) send_line(narsese::encode_goal_achieved());
    send_line(narsese::encode_state_event(state_token));
    send_line(narsese::encode_goal_event());

    const auto start = Clock::now();
    std::string line;
    while (true) {
        const long remaining = cfg_.deadline_ms - elapsed_ms(start);
        if (remaining <= 0 || !read_line(line, remaining)) {
            ++deadline_misses_;
            return {std::nullopt, agents::Source::Silent};
        }
        transcript_.push_back({false, step_, line});
        try {
            if (auto op = narsese::parse_execution(line, registered_, cfg_.exec_pattern))
                return {op->index - 1, agents::Source::Policy};
        } catch (const UnknownOpError&) {
            // Logged above; treated as garbage.
        }
    }
}

std::vector<TranscriptRow> BridgeSession::shutdown() {
    if (to_child_ >= 0) {
        ::close(to_child_);
        to_child_ = -1;
    }
    if (pid_ >= 0 && reaped_) pid_ = -1;
    if (pid_ >= 0) {
        // Give the child a moment to exit on EOF, then escalate.
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) != 0) {
                pid_ = -1;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (pid_ >= 0) {
            ::kill(pid_, SIGTERM);
            for (int i = 0; i < 50 && ::waitpid(pid_, &status, WNOHANG) == 0; ++i)
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            if (pid_ >= 0 && ::waitpid(pid_, &status, WNOHANG) == 0) {
                ::kill(pid_, SIGKILL);
                ::waitpid(pid_, &status, 0);
            }
            pid_ = -1;
        }
    }
    if (from_child_ >= 0) {
        ::close(from_child_);
        from_child_ = -1;
    }
    if (!cfg_.transcript_path.empty()) {
        std::ofstream out(cfg_.transcript_path);
        if (out) write_transcript(transcript_, out);
    }
    return transcript_;
}

void write_transcript(const std::vector<TranscriptRow>& rows, std::ostream& out) {
    for (const TranscriptRow& r : rows)
        out << (r.sent ? "SENT" : "RECV") << '\t' << r.step << '\t' << r.line << '\n';
}

BridgeAgent::BridgeAgent(const BridgeConfig& cfg) : session_(BridgeSession::spawn(cfg)) {}

agents::AgentDecision BridgeAgent::decide(const agents::AgentView& state, Rng&) {
    const bool goal = pending_goal_;
    pending_goal_ = false;
    return session_.step_exchange(state.token, goal);
}

void BridgeAgent::observe(const agents::AgentView&, int, agents::Source, double,
                          const agents::AgentView&, bool, bool success) {
    if (success) pending_goal_ = true;
}

void BridgeAgent::finish() { session_.shutdown(); }

}  // namespace arena::bridge
