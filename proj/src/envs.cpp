#include "arena/envs.hpp"

#include <algorithm>
#include <ostream>

#include "arena/errors.hpp"

namespace arena::envs {

namespace {

// CliffWalking: 4x12 board, flattened row*12+col.
// Start [3,0]=36, goal [3,11]=47, cliff [3,1..10]=37..46.
// Actions 0 up, 1 right, 2 down, 3 left.
constexpr int kCliffRows = 4;
constexpr int kCliffCols = 12;
constexpr std::int64_t kCliffStart = 36;
constexpr std::int64_t kCliffGoal = 47;

bool cliff_cell(int row, int col) { return row == 3 && col >= 1 && col <= 10; }

// Taxi: canonical 5x5 map. Landmarks R,G,Y,B; walls block east/west moves.
//
//   +---------+
//   |R: | : :G|
//   | : | : : |
//   | : : : : |
//   | | : | : |
//   |Y| : |B: |
//   +---------+
constexpr std::array<const char*, 5> kTaxiMap = {
    "|R: | : :G|",
    "| : | : : |",
    "| : : : : |",
    "| | : | : |",
    "|Y| : |B: |",
};
constexpr std::array<std::pair<int, int>, 4> kTaxiLandmarks = {{{0, 0}, {0, 4}, {4, 0}, {4, 3}}};

bool taxi_open_east(int row, int col) { return kTaxiMap[row][2 * col + 2] == ':'; }
bool taxi_open_west(int row, int col) { return kTaxiMap[row][2 * col] == ':'; }

// FrozenLake preloaded maps. Actions 0 LEFT, 1 DOWN, 2 RIGHT, 3 UP.
constexpr std::array<const char*, 4> kLake4 = {
    "SFFF",
    "FHFH",
    "FFFH",
    "HFFG",
};
constexpr std::array<const char*, 8> kLake8 = {
    "SFFFFFFF",
    "FFFFFFFF",
    "FFFHFFFF",
    "FFFFFHFF",
    "FFFHFFFF",
    "FHHFFFHF",
    "FHFFHFHF",
    "FFFHFFFG",
};

char lake_cell(bool eight, std::int64_t s) {
    const int n = eight ? 8 : 4;
    return eight ? kLake8[s / n][s % n] : kLake4[s / n][s % n];
}

// dir: 0 LEFT, 1 DOWN, 2 RIGHT, 3 UP, clamped at the border.
std::int64_t lake_move(bool eight, std::int64_t s, int dir) {
    const int n = eight ? 8 : 4;
    int row = static_cast<int>(s / n);
    int col = static_cast<int>(s % n);
    switch (dir) {
        case 0: col = std::max(col - 1, 0); break;
        case 1: row = std::min(row + 1, n - 1); break;
        case 2: col = std::min(col + 1, n - 1); break;
        case 3: row = std::max(row - 1, 0); break;
    }
    return grid_index(row, col, n);
}

Outcome lake_outcome(bool eight, std::int64_t s, int dir) {
    const std::int64_t next = lake_move(eight, s, dir);
    const char c = lake_cell(eight, next);
    Outcome o;
    o.next_state = next;
    o.reward = (c == 'G') ? 1.0 : 0.0;
    o.terminated = (c == 'G' || c == 'H');
    o.success = (c == 'G');
    return o;
}

Outcome cliff_outcome(std::int64_t s, int action) {
    int row = static_cast<int>(s / kCliffCols);
    int col = static_cast<int>(s % kCliffCols);
    switch (action) {
        case 0: row = std::max(row - 1, 0); break;
        case 1: col = std::min(col + 1, kCliffCols - 1); break;
        case 2: row = std::min(row + 1, kCliffRows - 1); break;
        case 3: col = std::max(col - 1, 0); break;
    }
    Outcome o;
    if (cliff_cell(row, col)) {
        // Falling off the cliff returns the agent to the start; the episode
        // continues.
        o.next_state = kCliffStart;
        o.reward = -100.0;
        return o;
    }
    o.next_state = grid_index(row, col, kCliffCols);
    o.reward = -1.0;
    o.terminated = (o.next_state == kCliffGoal);
    o.success = o.terminated;
    return o;
}

Outcome taxi_outcome(std::int64_t s, int action) {
    const TaxiState t = taxi_decode(s);
    int row = t.row, col = t.col, pass = t.passenger;
    double reward = -1.0;
    bool terminated = false;
    bool success = false;
    switch (action) {
        case 0: row = std::min(row + 1, 4); break;  // south
        case 1: row = std::max(row - 1, 0); break;  // north
        case 2:                                     // east
            if (taxi_open_east(row, col)) col = std::min(col + 1, 4);
            break;
        case 3:  // west
            if (taxi_open_west(row, col)) col = std::max(col - 1, 0);
            break;
        case 4:  // pickup
            if (pass < 4 && kTaxiLandmarks[pass] == std::pair{row, col}) {
                pass = 4;
            } else {
                reward = -10.0;
            }
            break;
        case 5:  // dropoff
            if (pass == 4 && kTaxiLandmarks[t.destination] == std::pair{row, col}) {
                pass = t.destination;
                reward = 20.0;
                terminated = true;
                success = true;
            } else if (pass == 4) {
                // Letting the passenger out at a wrong landmark is legal.
                bool at_landmark = false;
                for (int i = 0; i < 4; ++i) {
                    if (kTaxiLandmarks[i] == std::pair{row, col}) {
                        pass = i;
                        at_landmark = true;
                        break;
                    }
                }
                if (!at_landmark) reward = -10.0;
            } else {
                reward = -10.0;
            }
            break;
    }
    Outcome o;
    o.next_state = taxi_encode(row, col, pass, t.destination);
    o.reward = reward;
    o.terminated = terminated;
    o.success = success;
    return o;
}

StepResult result_from(const Outcome& o) {
    StepResult r;
    r.observation = o.next_state;
    r.reward = o.reward;
    r.terminated = o.terminated;
    r.success = o.success;
    return r;
}

void check_action(int action, int n) {
    if (action < 0 || action >= n)
        throw ContractViolation("action " + std::to_string(action) + " out of range [0, " +
                                std::to_string(n) + ")");
}

void check_live(bool done) {
    if (done) throw UsageError("episode is over; reset() before stepping again");
}

}  // namespace

int action_count(const EnvId& id) {
    switch (id.task) {
        case Task::CliffWalking: return 4;
        case Task::Taxi: return 6;
        case Task::FrozenLake4x4: return 4;
        case Task::FrozenLake8x8: return 4;
        case Task::FlappyBird: return 2;
    }
    return 0;
}

std::int64_t observation_count(const EnvId& id) {
    switch (id.task) {
        case Task::CliffWalking: return 48;
        case Task::Taxi: return 500;
        case Task::FrozenLake4x4: return 16;
        case Task::FrozenLake8x8: return 64;
        case Task::FlappyBird: return 0;
    }
    return 0;
}

bool is_tabular(const EnvId& id) { return id.task != Task::FlappyBird; }

std::string env_name(const EnvId& id) {
    std::string base;
    switch (id.task) {
        case Task::CliffWalking: base = "cliffwalking"; break;
        case Task::Taxi: base = "taxi"; break;
        case Task::FrozenLake4x4: base = "frozenlake4x4"; break;
        case Task::FrozenLake8x8: base = "frozenlake8x8"; break;
        case Task::FlappyBird: base = "flappybird"; break;
    }
    if (id.slippery) base += "-slippery";
    return base;
}

std::optional<Task> parse_task(std::string_view name) {
    if (name == "cliffwalking") return Task::CliffWalking;
    if (name == "taxi") return Task::Taxi;
    if (name == "frozenlake4x4") return Task::FrozenLake4x4;
    if (name == "frozenlake8x8") return Task::FrozenLake8x8;
    if (name == "flappybird") return Task::FlappyBird;
    return std::nullopt;
}

const std::vector<Outcome>& EnvModel::at(std::int64_t state, int action) const {
    if (state < 0 || state >= n_states || action < 0 || action >= n_actions)
        throw ContractViolation("model lookup out of range");
    return outcomes[static_cast<std::size_t>(state) * n_actions + action];
}

std::int64_t grid_index(int row, int col, int ncols) {
    if (row < 0 || col < 0 || col >= ncols) throw ContractViolation("grid_index out of range");
    return static_cast<std::int64_t>(row) * ncols + col;
}

std::int64_t taxi_encode(int taxi_row, int taxi_col, int passenger_location, int destination) {
    if (taxi_row < 0 || taxi_row > 4 || taxi_col < 0 || taxi_col > 4 || passenger_location < 0 ||
        passenger_location > 4 || destination < 0 || destination > 3)
        throw ContractViolation("taxi_encode component out of range");
    return ((static_cast<std::int64_t>(taxi_row) * 5 + taxi_col) * 5 + passenger_location) * 4 +
           destination;
}

TaxiState taxi_decode(std::int64_t state) {
    if (state < 0 || state >= 500) throw ContractViolation("taxi state out of range");
    TaxiState t;
    t.destination = static_cast<int>(state % 4);
    state /= 4;
    t.passenger = static_cast<int>(state % 5);
    state /= 5;
    t.col = static_cast<int>(state % 5);
    t.row = static_cast<int>(state / 5);
    return t;
}

// --- CliffWalking ---------------------------------------------------------

CliffWalkingEnv::CliffWalkingEnv(long step_limit) : limit_(step_limit) {}

StepResult CliffWalkingEnv::reset(Rng&) {
    state_ = kCliffStart;
    steps_ = 0;
    done_ = false;
    StepResult r;
    r.observation = state_;
    return r;
}

StepResult CliffWalkingEnv::step(int action, Rng&) {
    check_live(done_);
    check_action(action, 4);
    StepResult r = result_from(cliff_outcome(state_, action));
    state_ = r.observation;
    ++steps_;
    if (!r.terminated && limit_ > 0 && steps_ >= limit_) r.truncated = true;
    done_ = r.terminated || r.truncated;
    return r;
}

void CliffWalkingEnv::set_state(std::int64_t s) {
    if (s < 0 || s >= 48) throw ContractViolation("cliffwalking state out of range");
    state_ = s;
    steps_ = 0;
    done_ = false;
}

// --- Taxi -------------------------------------------------------------------

TaxiEnv::TaxiEnv(long step_limit) : limit_(step_limit) {}

StepResult TaxiEnv::reset(Rng& rng) {
    const int row = static_cast<int>(rng.uniform_below(5));
    const int col = static_cast<int>(rng.uniform_below(5));
    const int pass = static_cast<int>(rng.uniform_below(4));
    // Draw the destination from the three landmarks other than the
    // passenger's, so the task never starts already solved.
    int dest = static_cast<int>(rng.uniform_below(3));
    if (dest >= pass) ++dest;
    state_ = taxi_encode(row, col, pass, dest);
    steps_ = 0;
    done_ = false;
    StepResult r;
    r.observation = state_;
    return r;
}

StepResult TaxiEnv::step(int action, Rng&) {
    check_live(done_);
    check_action(action, 6);
    StepResult r = result_from(taxi_outcome(state_, action));
    state_ = r.observation;
    ++steps_;
    if (!r.terminated && limit_ > 0 && steps_ >= limit_) r.truncated = true;
    done_ = r.terminated || r.truncated;
    return r;
}

void TaxiEnv::set_state(std::int64_t s) {
    if (s < 0 || s >= 500) throw ContractViolation("taxi state out of range");
    state_ = s;
    steps_ = 0;
    done_ = false;
}

// --- FrozenLake --------------------------------------------------------------

FrozenLakeEnv::FrozenLakeEnv(bool eight_by_eight, bool slippery, long step_limit)
    : eight_(eight_by_eight), slippery_(slippery), limit_(step_limit) {
    if (limit_ <= 0) limit_ = eight_ ? 200 : 100;
}

StepResult FrozenLakeEnv::reset(Rng&) {
    state_ = 0;
    steps_ = 0;
    done_ = false;
    StepResult r;
    r.observation = 0;
    return r;
}

StepResult FrozenLakeEnv::step(int action, Rng& rng) {
    check_live(done_);
    check_action(action, 4);
    int dir = action;
    if (slippery_) {
        // Intended direction or either perpendicular, 1/3 each; never the
        // opposite direction.
        const int k = static_cast<int>(rng.uniform_below(3));
        dir = (action + 3 + k) % 4;
    }
    StepResult r = result_from(lake_outcome(eight_, state_, dir));
    state_ = r.observation;
    ++steps_;
    if (!r.terminated && limit_ > 0 && steps_ >= limit_) r.truncated = true;
    done_ = r.terminated || r.truncated;
    return r;
}

void FrozenLakeEnv::set_state(std::int64_t s) {
    const std::int64_t n = eight_ ? 64 : 16;
    if (s < 0 || s >= n) throw ContractViolation("frozenlake state out of range");
    state_ = s;
    steps_ = 0;
    done_ = false;
}

// --- factory / model ---------------------------------------------------------

long default_step_limit(const EnvId& id) {
    switch (id.task) {
        case Task::CliffWalking: return 10000;
        case Task::Taxi: return 200;
        case Task::FrozenLake4x4: return 100;
        case Task::FrozenLake8x8: return 200;
        case Task::FlappyBird: return 10000;
    }
    return 0;
}

std::unique_ptr<Environment> make_env(const EnvId& id, long step_limit, const FlappyConfig& flappy) {
    const long limit = step_limit > 0 ? step_limit : default_step_limit(id);
    switch (id.task) {
        case Task::CliffWalking: return std::make_unique<CliffWalkingEnv>(limit);
        case Task::Taxi: return std::make_unique<TaxiEnv>(limit);
        case Task::FrozenLake4x4: return std::make_unique<FrozenLakeEnv>(false, id.slippery, limit);
        case Task::FrozenLake8x8: return std::make_unique<FrozenLakeEnv>(true, id.slippery, limit);
        case Task::FlappyBird: return std::make_unique<FlappyBirdEnv>(flappy, limit);
    }
    throw ConfigError("unknown task");
}

EnvModel enumerate_model(const EnvId& id) {
    if (!is_tabular(id)) throw UnsupportedEnvironment("no exhaustive model for flappybird");
    EnvModel m;
    m.n_states = observation_count(id);
    m.n_actions = action_count(id);
    m.outcomes.resize(static_cast<std::size_t>(m.n_states) * m.n_actions);

    const bool eight = id.task == Task::FrozenLake8x8;
    for (std::int64_t s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            auto& list = m.outcomes[static_cast<std::size_t>(s) * m.n_actions + a];
            switch (id.task) {
                case Task::CliffWalking:
                    list.push_back(cliff_outcome(s, a));
                    break;
                case Task::Taxi:
                    list.push_back(taxi_outcome(s, a));
                    break;
                case Task::FrozenLake4x4:
                case Task::FrozenLake8x8: {
                    const char c = lake_cell(eight, s);
                    if (c == 'H' || c == 'G') {
                        // Absorbing row for a terminal cell.
                        Outcome o;
                        o.next_state = s;
                        o.terminated = true;
                        list.push_back(o);
                    } else if (id.slippery) {
                        for (int k = 0; k < 3; ++k) {
                            Outcome o = lake_outcome(eight, s, (a + 3 + k) % 4);
                            o.prob_num = 1;
                            o.prob_den = 3;
                            list.push_back(o);
                        }
                    } else {
                        list.push_back(lake_outcome(eight, s, a));
                    }
                    break;
                }
                case Task::FlappyBird:
                    break;
            }
        }
    }
    return m;
}

void write_model_csv(const EnvModel& model, std::ostream& out) {
    out << "state,action,next_state,prob_num,prob_den,reward,terminated,success\n";
    for (std::int64_t s = 0; s < model.n_states; ++s) {
        for (int a = 0; a < model.n_actions; ++a) {
            for (const Outcome& o : model.at(s, a)) {
                out << s << ',' << a << ',' << o.next_state << ',' << o.prob_num << ','
                    << o.prob_den << ',' << o.reward << ',' << (o.terminated ? 1 : 0) << ','
                    << (o.success ? 1 : 0) << '\n';
            }
        }
    }
}

}  // namespace arena::envs
