#include "fedrl/replay.hpp"

#include <cmath>

namespace fedrl::sac {

namespace {
constexpr int kObsDim = envs::Observation::kFlatDim;
constexpr int kActDim = envs::Action::kDim;

double f32(double v) { return static_cast<double>(static_cast<float>(v)); }
}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, double reward_min, double reward_max)
    : capacity_(capacity), reward_min_(reward_min), reward_max_(reward_max) {
  if (capacity_ < 1) throw ValidationError("ReplayBuffer: capacity must be >= 1");
  obs_.resize(capacity_ * kObsDim);
  act_.resize(capacity_ * kActDim);
  rew_.resize(capacity_);
  next_.resize(capacity_ * kObsDim);
  done_.resize(capacity_);
}

void ReplayBuffer::push(const Transition& t) {
  for (double v : t.obs)
    if (!std::isfinite(v)) throw NumericError("ReplayBuffer: non-finite observation");
  for (double v : t.action)
    if (!std::isfinite(v)) throw NumericError("ReplayBuffer: non-finite action");
  for (double v : t.next_obs)
    if (!std::isfinite(v)) throw NumericError("ReplayBuffer: non-finite next observation");
  if (!std::isfinite(t.reward) || t.reward < reward_min_ || t.reward > reward_max_)
    throw NumericError("ReplayBuffer: reward outside environment bound");

  for (int k = 0; k < kObsDim; ++k) obs_[head_ * kObsDim + k] = f32(t.obs[k]);
  for (int k = 0; k < kActDim; ++k) act_[head_ * kActDim + k] = f32(t.action[k]);
  rew_[head_] = f32(t.reward);
  for (int k = 0; k < kObsDim; ++k) next_[head_ * kObsDim + k] = f32(t.next_obs[k]);
  done_[head_] = t.done ? 1.0 : 0.0;

  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::size_t ReplayBuffer::slot(std::size_t logical) const {
  // Oldest surviving transition sits at head_ once the ring has wrapped.
  const std::size_t base = size_ < capacity_ ? 0 : head_;
  return (base + logical) % capacity_;
}

Transition ReplayBuffer::get(std::size_t index) const {
  if (index >= size_) throw CapacityError("ReplayBuffer: index out of range");
  const std::size_t s = slot(index);
  Transition t;
  for (int k = 0; k < kObsDim; ++k) t.obs[k] = obs_[s * kObsDim + k];
  for (int k = 0; k < kActDim; ++k) t.action[k] = act_[s * kActDim + k];
  t.reward = rew_[s];
  for (int k = 0; k < kObsDim; ++k) t.next_obs[k] = next_[s * kObsDim + k];
  t.done = done_[s] != 0.0;
  return t;
}

Batch ReplayBuffer::sample(int batch_size, RngStream& rng) const {
  if (batch_size < 1) throw ValidationError("ReplayBuffer: batch_size must be >= 1");
  if (size_ == 0) throw CapacityError("ReplayBuffer: sampling from an empty buffer");
  Batch b{Tensor(batch_size, kObsDim), Tensor(batch_size, kActDim), Tensor(batch_size, 1),
          Tensor(batch_size, kObsDim), Tensor(batch_size, 1)};
  for (int i = 0; i < batch_size; ++i) {
    // Index logically so a buffer restored from a checkpoint (laid out from
    // slot 0) samples the same transitions as the uninterrupted ring.
    const std::size_t s = slot(static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size_))));
    for (int k = 0; k < kObsDim; ++k) b.obs.at(i, k) = obs_[s * kObsDim + k];
    for (int k = 0; k < kActDim; ++k) b.action.at(i, k) = act_[s * kActDim + k];
    b.reward.at(i, 0) = rew_[s];
    for (int k = 0; k < kObsDim; ++k) b.next_obs.at(i, k) = next_[s * kObsDim + k];
    b.done.at(i, 0) = done_[s];
  }
  return b;
}

TensorBundle ReplayBuffer::to_bundle() const {
  TensorBundle b;
  const auto n = static_cast<std::uint32_t>(size_);
  std::vector<double> obs(size_ * kObsDim), act(size_ * kActDim), rew(size_), next(size_ * kObsDim),
      done(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t s = slot(i);
    for (int k = 0; k < kObsDim; ++k) obs[i * kObsDim + k] = obs_[s * kObsDim + k];
    for (int k = 0; k < kActDim; ++k) act[i * kActDim + k] = act_[s * kActDim + k];
    rew[i] = rew_[s];
    for (int k = 0; k < kObsDim; ++k) next[i * kObsDim + k] = next_[s * kObsDim + k];
    done[i] = done_[s];
  }
  b.add("obs", {n, kObsDim}, std::move(obs));
  b.add("act", {n, kActDim}, std::move(act));
  b.add("rew", {n}, std::move(rew));
  b.add("next", {n, kObsDim}, std::move(next));
  b.add("done", {n}, std::move(done));
  return b;
}

void ReplayBuffer::load_bundle(const TensorBundle& b) {
  const auto& obs = b.at("obs");
  const auto& act = b.at("act");
  const auto& rew = b.at("rew");
  const auto& next = b.at("next");
  const auto& done = b.at("done");
  const std::size_t n = rew.data.size();
  if (n > capacity_) throw CapacityError("ReplayBuffer: checkpoint larger than capacity");
  if (obs.data.size() != n * kObsDim || act.data.size() != n * kActDim ||
      next.data.size() != n * kObsDim || done.data.size() != n)
    throw CompatibilityError("ReplayBuffer: inconsistent checkpoint bundle");

  size_ = n;
  head_ = n % capacity_;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < kObsDim; ++k) obs_[i * kObsDim + k] = obs.data[i * kObsDim + k];
    for (int k = 0; k < kActDim; ++k) act_[i * kActDim + k] = act.data[i * kActDim + k];
    rew_[i] = rew.data[i];
    for (int k = 0; k < kObsDim; ++k) next_[i * kObsDim + k] = next.data[i * kObsDim + k];
    done_[i] = done.data[i];
  }
}

}  // namespace fedrl::sac
