#include "fedrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fedrl::envs {

namespace {
constexpr double kPi = std::numbers::pi;

double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

const char* task_name(TaskId id) {
  switch (id) {
    case TaskId::kParamReach: return "ParamReach";
    case TaskId::kParamPush: return "ParamPush";
  }
  return "?";
}

TaskId task_from_name(const std::string& name) {
  if (name == "ParamReach") return TaskId::kParamReach;
  if (name == "ParamPush") return TaskId::kParamPush;
  throw ValidationError("unknown task: " + name);
}

void EnvConfig::validate() const {
  if (!(action_scale > 0.0)) throw ValidationError("EnvConfig: action_scale must be > 0");
  if (!(drag >= 0.0 && drag <= 1.0)) throw ValidationError("EnvConfig: drag must be in [0,1]");
  if (max_steps < 1) throw ValidationError("EnvConfig: max_steps must be >= 1");
  if (!std::isfinite(goal[0]) || !std::isfinite(goal[1]) || !std::isfinite(action_rotation))
    throw ValidationError("EnvConfig: non-finite fields");
}

double DynamicsParams::reward_min() const {
  // Largest possible goal distance with both points inside the arena.
  return -std::hypot(2.0 * arena_halfwidth, 2.0 * arena_halfwidth);
}

PointMassEnv::PointMassEnv(EnvConfig config, DynamicsParams params)
    : config_(config), params_(params) {
  config_.validate();
}

Observation PointMassEnv::reset() {
  pos_ = {0.0, 0.0};
  vel_ = {0.0, 0.0};
  step_count_ = 0;
  done_ = false;
  was_reset_ = true;
  return Observation{pos_, vel_, config_.goal};
}

StepResult PointMassEnv::step(const Action& action) {
  if (!was_reset_) throw ProtocolError("PointMassEnv: step before reset");
  if (done_) throw ProtocolError("PointMassEnv: step after episode end");
  if (!std::isfinite(action.values[0]) || !std::isfinite(action.values[1]))
    throw NumericError("PointMassEnv: non-finite action");

  const double ax = clip(action.values[0], -1.0, 1.0);
  const double ay = clip(action.values[1], -1.0, 1.0);
  const double c = std::cos(config_.action_rotation);
  const double s = std::sin(config_.action_rotation);
  const double fx = config_.action_scale * (c * ax - s * ay);
  const double fy = config_.action_scale * (s * ax + c * ay);

  vel_[0] = (1.0 - config_.drag) * vel_[0] + params_.dt * fx;
  vel_[1] = (1.0 - config_.drag) * vel_[1] + params_.dt * fy;
  pos_[0] = clip(pos_[0] + params_.dt * vel_[0], -params_.arena_halfwidth, params_.arena_halfwidth);
  pos_[1] = clip(pos_[1] + params_.dt * vel_[1], -params_.arena_halfwidth, params_.arena_halfwidth);

  ++step_count_;
  const double dist = std::hypot(pos_[0] - config_.goal[0], pos_[1] - config_.goal[1]);
  const bool reached = dist < params_.goal_radius;
  const double reward = -dist + (reached ? params_.goal_bonus : 0.0);
  done_ = reached || step_count_ >= config_.max_steps;

  return StepResult{Observation{pos_, vel_, config_.goal}, reward, done_, step_count_};
}

int grid_size(TaskId) { return 50; }

EnvConfig config_from_cell(TaskId task, int cell, int max_steps) {
  if (cell < 0 || cell >= grid_size(task))
    throw CapacityError("config_from_cell: cell out of range");

  EnvConfig cfg;
  cfg.task_id = task;
  cfg.max_steps = max_steps;
  cfg.grid_cell = cell;
  cfg.seed = derive_seed({static_cast<std::uint64_t>(task), static_cast<std::uint64_t>(cell)});

  if (task == TaskId::kParamReach) {
    // 10 goal headings x 5 action rotations; unit-radius goals.
    static constexpr double kRotations[5] = {-kPi / 6.0, -kPi / 12.0, 0.0, kPi / 12.0, kPi / 6.0};
    const int goal_idx = cell / 5;
    const int rot_idx = cell % 5;
    const double ang = 2.0 * kPi * goal_idx / 10.0;
    cfg.goal = {std::cos(ang), std::sin(ang)};
    cfg.action_rotation = kRotations[rot_idx];
    cfg.action_scale = 1.0;
    cfg.drag = 0.05;
  } else {
    // 5 goal headings x 5 drags x 2 scales; pushing through heavier damping.
    static constexpr double kDrags[5] = {0.05, 0.10, 0.15, 0.20, 0.25};
    static constexpr double kScales[2] = {1.0, 1.5};
    const int goal_idx = cell / 10;
    const int drag_idx = (cell / 2) % 5;
    const int scale_idx = cell % 2;
    const double ang = 2.0 * kPi * goal_idx / 5.0 + kPi / 5.0;
    cfg.goal = {0.8 * std::cos(ang), 0.8 * std::sin(ang)};
    cfg.action_rotation = 0.0;
    cfg.drag = kDrags[drag_idx];
    cfg.action_scale = kScales[scale_idx];
  }
  return cfg;
}

std::vector<EnvConfig> sample_env_set(TaskId task, int count, std::uint64_t rng_seed,
                                      int max_steps) {
  if (count < 1) throw ValidationError("sample_env_set: count must be >= 1");
  const int n = grid_size(task);
  if (count > n)
    throw CapacityError("sample_env_set: requested " + std::to_string(count) +
                        " configs from a grid of " + std::to_string(n));

  // Partial Fisher-Yates over the cell indices.
  std::vector<int> cells(n);
  for (int i = 0; i < n; ++i) cells[i] = i;
  RngStream rng = derive_stream(rng_seed, {stream_label("env_set"), static_cast<std::uint64_t>(task)});
  std::vector<EnvConfig> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int j = i + rng.uniform_int(n - i);
    std::swap(cells[i], cells[j]);
    out.push_back(config_from_cell(task, cells[i], max_steps));
  }
  return out;
}

double episode_return(const std::vector<double>& rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ValidationError("episode_return: gamma must be in [0,1)");
  double acc = 0.0;
  double g = 1.0;
  for (double r : rewards) {
    acc += g * r;
    g *= gamma;
  }
  return acc;
}

double undiscounted_return(const std::vector<double>& rewards) {
  double acc = 0.0;
  for (double r : rewards) acc += r;
  return acc;
}

}  // namespace fedrl::envs
