#pragma once

#include <string>
#include <vector>

#include "fedrl/mlp.hpp"

namespace fedrl {

struct PolicySpec {
  std::vector<int> trunk_sizes;  // {obs_dim, h1, ...}; ReLU after every trunk layer
  int action_dim = 0;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  void validate() const;
};

// Squashed-Gaussian policy: the trunk feeds two linear heads predicting mean
// and log-std of a diagonal Gaussian, and actions are tanh(u), u ~ N(mean,
// std). Sampling is reparameterized (u = mean + std * eps) so gradients reach
// mean and log-std, and the log-density carries the tanh change-of-variables
// correction with eps = 1e-6 inside the log.
class GaussianPolicy {
 public:
  GaussianPolicy(std::string name, PolicySpec spec, RngStream& init);

  struct SampleNodes {
    ValueId action;    // (B x A), components in (-1, 1)
    ValueId log_prob;  // (B x 1)
    ValueId mean;      // pre-squash Gaussian mean
    ValueId log_std;   // clamped log standard deviation
  };

  // noise must be a (B x A) tensor of standard normal draws supplied by the
  // caller; passing it explicitly keeps loss evaluations replayable for
  // finite-difference checks.
  SampleNodes sample(Tape& t, ValueId obs, const Tensor& noise, bool train_params = true);

  // Deterministic evaluation action: tanh(mean).
  Tensor mean_action(const Tensor& obs);
  // Single-step stochastic rollout action.
  Tensor sample_action(const Tensor& obs, RngStream& rng);

  const PolicySpec& spec() const { return spec_; }
  std::vector<Parameter*> parameters();
  std::vector<Tensor*> state_tensors();
  TensorBundle bundle() const;
  void load(const TensorBundle& b);

  static constexpr double kLogProbEps = 1e-6;

 private:
  PolicySpec spec_;
  Mlp trunk_;
  Parameter mean_w_, mean_b_, log_std_w_, log_std_b_;
};

}  // namespace fedrl
