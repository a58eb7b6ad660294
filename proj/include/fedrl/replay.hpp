#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fedrl/bundle.hpp"
#include "fedrl/env.hpp"
#include "fedrl/rng.hpp"
#include "fedrl/tensor.hpp"

namespace fedrl::sac {

struct Transition {
  std::array<double, envs::Observation::kFlatDim> obs;
  std::array<double, envs::Action::kDim> action;
  double reward = 0.0;
  std::array<double, envs::Observation::kFlatDim> next_obs;
  bool done = false;
};

struct Batch {
  Tensor obs;       // B x 6
  Tensor action;    // B x 2
  Tensor reward;    // B x 1
  Tensor next_obs;  // B x 6
  Tensor done;      // B x 1, 0.0 or 1.0
  int size() const { return obs.rows; }
};

// Uniform-with-replacement ring buffer with FIFO eviction. Values are
// quantized to f32 on insertion so the stored data is exactly representable
// in the checkpoint wire format.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000,
                        double reward_min = -1e30, double reward_max = 1e30);

  void push(const Transition& t);
  Batch sample(int batch_size, RngStream& rng) const;
  Transition get(std::size_t index) const;  // 0 = oldest surviving transition

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  TensorBundle to_bundle() const;
  void load_bundle(const TensorBundle& b);

 private:
  std::size_t slot(std::size_t logical) const;

  std::size_t capacity_;
  double reward_min_, reward_max_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next write position
  std::vector<double> obs_, act_, rew_, next_, done_;
};

}  // namespace fedrl::sac
