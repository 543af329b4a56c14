#include <algorithm>

#include "arena/envs.hpp"
#include "arena/errors.hpp"

namespace arena::envs {

namespace {

const Pipe* next_pipe(const FlappyState& s, const FlappyConfig& cfg) {
    for (const Pipe& p : s.pipes) {
        if (p.x >= cfg.bird_x) return &p;
    }
    return nullptr;
}

}  // namespace

FlappyObservation flappy_observe(const FlappyState& state, const FlappyConfig& cfg) {
    const Pipe* p = next_pipe(state, cfg);
    if (p == nullptr) throw ContractViolation("flappy state has no pipe ahead of the bird");
    FlappyObservation o;
    o.o1 = (p->x - cfg.bird_x) / cfg.field_width;
    o.o2 = (state.bird_y - p->hole_y) / cfg.field_height;
    return o;
}

FlappyBirdEnv::FlappyBirdEnv(FlappyConfig cfg, long step_limit) : cfg_(cfg), limit_(step_limit) {}

void FlappyBirdEnv::spawn_pipes(Rng& rng) {
    // Keep at least three pipes ahead of the bird so the observation always
    // has a next pipe.
    auto ahead = [&] {
        int n = 0;
        for (const Pipe& p : state_.pipes)
            if (p.x >= cfg_.bird_x) ++n;
        return n;
    };
    while (ahead() < 3) {
        Pipe p;
        p.x = state_.pipes.empty() ? cfg_.field_width
                                   : state_.pipes.back().x + cfg_.pipe_spacing;
        p.hole_y = cfg_.hole_min + rng.uniform_real() * (cfg_.hole_max - cfg_.hole_min);
        state_.pipes.push_back(p);
    }
}

StepResult FlappyBirdEnv::reset(Rng& rng) {
    state_ = FlappyState{};
    state_.bird_y = cfg_.start_y;
    spawn_pipes(rng);
    steps_ = 0;
    done_ = false;
    StepResult r;
    const FlappyObservation obs = flappy_observe(state_, cfg_);
    r.o1 = obs.o1;
    r.o2 = obs.o2;
    return r;
}

StepResult FlappyBirdEnv::step(int action, Rng& rng) {
    if (done_) throw UsageError("episode is over; reset() before stepping again");
    if (action < 0 || action >= 2) throw ContractViolation("flappybird action out of range");

    ++state_.tick;
    if (action == 1) {
        state_.bird_vy = cfg_.flap_speed;
    } else {
        state_.bird_vy = std::min(state_.bird_vy + cfg_.gravity, cfg_.max_fall_speed);
    }
    state_.bird_y += state_.bird_vy;

    for (Pipe& p : state_.pipes) p.x -= cfg_.pipe_speed;

    // A pipe is passed when it is entirely behind the bird's center.
    bool passed_now = false;
    for (Pipe& p : state_.pipes) {
        if (!p.passed && p.x + cfg_.pipe_width < cfg_.bird_x) {
            p.passed = true;
            ++state_.score;
            passed_now = true;
        }
    }
    std::erase_if(state_.pipes, [&](const Pipe& p) { return p.x + cfg_.pipe_width < -cfg_.pipe_width; });
    spawn_pipes(rng);

    const double top = state_.bird_y - cfg_.bird_half_size;
    const double bottom = state_.bird_y + cfg_.bird_half_size;
    bool hit = top < cfg_.ceiling || bottom > cfg_.floor;
    for (const Pipe& p : state_.pipes) {
        if (hit) break;
        const bool x_overlap =
            p.x <= cfg_.bird_x + cfg_.bird_half_size && p.x + cfg_.pipe_width >= cfg_.bird_x - cfg_.bird_half_size;
        if (!x_overlap) continue;
        const double gap_top = p.hole_y - cfg_.gap_height / 2.0;
        const double gap_bottom = p.hole_y + cfg_.gap_height / 2.0;
        if (top < gap_top || bottom > gap_bottom) hit = true;
    }

    StepResult r;
    r.reward = 1.0;  // every tick yields +1, including the final one
    r.terminated = hit;
    r.success = passed_now;  // non-terminating success per pipe passed
    ++steps_;
    if (!r.terminated && limit_ > 0 && steps_ >= limit_) r.truncated = true;
    done_ = r.terminated || r.truncated;

    const FlappyObservation obs = flappy_observe(state_, cfg_);
    r.o1 = obs.o1;
    r.o2 = obs.o2;
    return r;
}

}  // namespace arena::envs
