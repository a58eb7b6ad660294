#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fedrl/common.hpp"
#include "fedrl/rng.hpp"

namespace fedrl::envs {

using Vec2 = std::array<double, 2>;

enum class TaskId { kParamReach, kParamPush };

const char* task_name(TaskId id);
TaskId task_from_name(const std::string& name);

// Parameterization of one heterogeneous task instance. Two configs with equal
// fields step bit-identically under identical action sequences.
struct EnvConfig {
  TaskId task_id = TaskId::kParamReach;
  Vec2 goal{0.0, 0.0};
  double action_rotation = 0.0;  // radians
  double action_scale = 1.0;     // > 0
  double drag = 0.0;             // in [0, 1]
  std::uint64_t seed = 0;        // provenance tag; dynamics are seed-free
  int max_steps = 500;
  int grid_cell = -1;            // index into the task's parameter grid, -1 if hand-built

  void validate() const;
};

struct Observation {
  Vec2 agent_pos{0.0, 0.0};
  Vec2 agent_vel{0.0, 0.0};
  Vec2 goal_pos{0.0, 0.0};

  static constexpr int kFlatDim = 6;
  std::array<double, kFlatDim> flat() const {
    return {agent_pos[0], agent_pos[1], agent_vel[0], agent_vel[1], goal_pos[0], goal_pos[1]};
  }
};

struct Action {
  static constexpr int kDim = 2;
  Vec2 values{0.0, 0.0};
};

struct StepResult {
  Observation next_obs;
  double reward = 0.0;
  bool done = false;
  int step_index = 0;
};

// Shared task constants; every value is adjustable per run without touching
// the per-instance EnvConfig knobs.
struct DynamicsParams {
  double dt = 0.05;
  double goal_radius = 0.05;   // distance below which the goal bonus fires
  double goal_bonus = 10.0;
  double arena_halfwidth = 2.0;

  double reward_min() const;  // for positions clamped inside the arena
  double reward_max() const { return goal_bonus; }
};

// Damped point mass on a 2-D arena. Force is the rotated, scaled action;
// velocity decays by drag and integrates the force; reward is negative goal
// distance plus a bonus inside the goal radius. The episode terminates on
// goal contact or when max_steps is exhausted.
class PointMassEnv {
 public:
  explicit PointMassEnv(EnvConfig config, DynamicsParams params = {});

  Observation reset();
  StepResult step(const Action& action);

  const EnvConfig& config() const { return config_; }
  const DynamicsParams& params() const { return params_; }
  bool done() const { return done_; }
  int steps_taken() const { return step_count_; }

 private:
  EnvConfig config_;
  DynamicsParams params_;
  Vec2 pos_{0.0, 0.0};
  Vec2 vel_{0.0, 0.0};
  int step_count_ = 0;
  bool done_ = false;
  bool was_reset_ = false;
};

// Size of the discretized parameter grid for a task. Mirrors the 50 sampled
// variants each benchmark task exposes.
int grid_size(TaskId task);

// Deterministic cell -> config mapping (row-major over the task's parameter
// axes).
EnvConfig config_from_cell(TaskId task, int cell, int max_steps = 500);

// `count` distinct configs sampled without replacement from the task grid.
// Deterministic given rng_seed; throws CapacityError when count exceeds the
// grid.
std::vector<EnvConfig> sample_env_set(TaskId task, int count, std::uint64_t rng_seed,
                                      int max_steps = 500);

// Discounted return, gamma in [0, 1).
double episode_return(const std::vector<double>& rewards, double gamma);
// Plain reward sum; the reported episodic-return metric.
double undiscounted_return(const std::vector<double>& rewards);

}  // namespace fedrl::envs
