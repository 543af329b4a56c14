#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/rng.hpp"

namespace arena::envs {

enum class Task { CliffWalking, Taxi, FrozenLake4x4, FrozenLake8x8, FlappyBird };

// Identifies one of the five benchmark tasks. `slippery` applies to the
// FrozenLake variants only.
struct EnvId {
    Task task = Task::CliffWalking;
    bool slippery = false;

    bool operator==(const EnvId&) const = default;
};

int action_count(const EnvId& id);
// Size of the discrete observation space; 0 for FlappyBird (unbounded).
std::int64_t observation_count(const EnvId& id);
bool is_tabular(const EnvId& id);
std::string env_name(const EnvId& id);
std::optional<Task> parse_task(std::string_view name);

// One environment transition.
//
// Tabular tasks report `observation`; FlappyBird reports the raw pair
// (o1, o2) and leaves `observation` at 0. For the tabular tasks success
// implies terminated; FlappyBird emits a non-terminating success each time
// a pipe is passed (the task has no completion state).
struct StepResult {
    std::int64_t observation = 0;
    double o1 = 0.0;
    double o2 = 0.0;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    bool success = false;
};

// One entry of the exhaustive transition table. Probabilities are exact
// rationals; the tabular tasks only ever need denominators 1 and 3.
struct Outcome {
    std::int64_t next_state = 0;
    int prob_num = 1;
    int prob_den = 1;
    double reward = 0.0;
    bool terminated = false;
    bool success = false;
};

// Exhaustive (state, action) -> outcome list for a tabular task.
struct EnvModel {
    std::int64_t n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<Outcome>> outcomes;  // indexed s * n_actions + a

    const std::vector<Outcome>& at(std::int64_t state, int action) const;
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual EnvId id() const = 0;
    virtual int action_count() const = 0;

    // Starts a new episode and returns the initial observation
    // (reward 0, all flags false).
    virtual StepResult reset(Rng& rng) = 0;

    // Applies one action. Throws ContractViolation for an out-of-range
    // action and UsageError when the episode is already over.
    virtual StepResult step(int action, Rng& rng) = 0;
};

// Tabular tasks additionally expose their integer state, plus a jump
// used by the model-conformance and statistics tests.
class TabularEnv : public Environment {
public:
    virtual std::int64_t state() const = 0;
    // Jumps to `s` as if a fresh episode started there.
    virtual void set_state(std::int64_t s) = 0;
};

// --- state index helpers ------------------------------------------------

// Flattened grid index row*ncols + col.
std::int64_t grid_index(int row, int col, int ncols);

// ((taxi_row*5 + taxi_col)*5 + passenger_location)*4 + destination,
// bijective onto [0, 499].
std::int64_t taxi_encode(int taxi_row, int taxi_col, int passenger_location, int destination);

struct TaxiState {
    int row = 0;
    int col = 0;
    int passenger = 0;   // 0..3 landmark, 4 in taxi
    int destination = 0; // 0..3 landmark
};
TaxiState taxi_decode(std::int64_t state);

// --- concrete environments ----------------------------------------------

class CliffWalkingEnv final : public TabularEnv {
public:
    explicit CliffWalkingEnv(long step_limit = 10000);

    EnvId id() const override { return {Task::CliffWalking, false}; }
    int action_count() const override { return 4; }
    StepResult reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;
    std::int64_t state() const override { return state_; }
    void set_state(std::int64_t s) override;

private:
    std::int64_t state_ = 36;
    long steps_ = 0;
    long limit_ = 10000;
    bool done_ = true;
};

class TaxiEnv final : public TabularEnv {
public:
    explicit TaxiEnv(long step_limit = 200);

    EnvId id() const override { return {Task::Taxi, false}; }
    int action_count() const override { return 6; }
    StepResult reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;
    std::int64_t state() const override { return state_; }
    void set_state(std::int64_t s) override;

private:
    std::int64_t state_ = 0;
    long steps_ = 0;
    long limit_ = 200;
    bool done_ = true;
};

class FrozenLakeEnv final : public TabularEnv {
public:
    FrozenLakeEnv(bool eight_by_eight, bool slippery, long step_limit = 0);

    EnvId id() const override {
        return {eight_ ? Task::FrozenLake8x8 : Task::FrozenLake4x4, slippery_};
    }
    int action_count() const override { return 4; }
    StepResult reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;
    std::int64_t state() const override { return state_; }
    void set_state(std::int64_t s) override;

private:
    bool eight_ = false;
    bool slippery_ = false;
    std::int64_t state_ = 0;
    long steps_ = 0;
    long limit_ = 100;
    bool done_ = true;
};

// Physics constants for the FlappyBird stand-in. All values are plain
// configuration; the defaults describe a 288x512 playfield in abstract
// units with one tick per action.
struct FlappyConfig {
    double field_width = 288.0;
    double field_height = 512.0;
    double bird_x = 57.0;
    double bird_half_size = 12.0;  // 24x24 collision box
    double gravity = 1.0;          // units/tick^2
    double max_fall_speed = 10.0;
    double flap_speed = -9.0;      // velocity set by a flap
    double pipe_speed = 4.0;       // leftward units/tick
    double pipe_spacing = 144.0;
    double pipe_width = 52.0;
    double gap_height = 100.0;
    double hole_min = 150.0;       // hole-center range, drawn uniformly
    double hole_max = 350.0;
    double ceiling = 0.0;          // vertical band the box must stay inside
    double floor = 400.0;
    double start_y = 256.0;
};

struct Pipe {
    double x = 0.0;       // leading (left) edge
    double hole_y = 0.0;  // gap center
    bool passed = false;
};

struct FlappyState {
    double bird_y = 0.0;
    double bird_vy = 0.0;
    std::vector<Pipe> pipes;  // sorted by x ascending
    long tick = 0;
    long score = 0;           // pipes passed
};

struct FlappyObservation {
    double o1 = 0.0;  // normalized horizontal distance to the next pipe, >= 0
    double o2 = 0.0;  // normalized bird_y - hole_center_y
};

// The next pipe is the nearest one whose leading edge is still at or ahead
// of the bird, which keeps o1 nonnegative. Throws ContractViolation when the
// state has no pipe ahead.
FlappyObservation flappy_observe(const FlappyState& state, const FlappyConfig& cfg);

class FlappyBirdEnv final : public Environment {
public:
    explicit FlappyBirdEnv(FlappyConfig cfg = {}, long step_limit = 10000);

    EnvId id() const override { return {Task::FlappyBird, false}; }
    int action_count() const override { return 2; }  // 0 nothing, 1 flap
    StepResult reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;

    const FlappyState& state() const { return state_; }
    const FlappyConfig& config() const { return cfg_; }

private:
    void spawn_pipes(Rng& rng);

    FlappyConfig cfg_;
    FlappyState state_;
    long steps_ = 0;
    long limit_ = 10000;
    bool done_ = true;
};

// step_limit <= 0 selects the per-task default: CliffWalking 10000 (safety
// cap), Taxi 200, FrozenLake4x4 100, FrozenLake8x8 200, FlappyBird 10000.
long default_step_limit(const EnvId& id);
std::unique_ptr<Environment> make_env(const EnvId& id, long step_limit = 0,
                                      const FlappyConfig& flappy = {});

// Exhaustive outcome table for the four tabular tasks; throws
// UnsupportedEnvironment for FlappyBird.
EnvModel enumerate_model(const EnvId& id);

// CSV with header state,action,next_state,prob_num,prob_den,reward,terminated,success
void write_model_csv(const EnvModel& model, std::ostream& out);

}  // namespace arena::envs
