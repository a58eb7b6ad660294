#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedrl/autodiff.hpp"
#include "fedrl/bundle.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

// Forward-pass mode shared by every network module.
//  kTrain        - batch statistics, running stats updated (the critic's own
//                  optimization pass)
//  kTrainNoStats - batch statistics, no side effects (policy-loss pass,
//                  gradient checks)
//  kEval         - running statistics (targets, frozen encoders, rollouts)
enum class NetMode { kTrain, kTrainNoStats, kEval };

struct MlpSpec {
  // Full width stack including input and output: {in, h1, ..., out}.
  std::vector<int> layer_sizes;
  // Batch norm on hidden layers only; the final layer is always plain linear.
  bool batch_norm = false;

  int in_dim() const { return layer_sizes.front(); }
  int out_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  void validate() const;
};

// Feed-forward ReLU stack with optional batch norm. Weights initialize with
// uniform fan-in scaling.
class Mlp {
 public:
  Mlp(std::string name, MlpSpec spec, RngStream& init);

  ValueId forward(Tape& t, ValueId x, NetMode mode, bool train_params = true);

  const MlpSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }

  std::vector<Parameter*> parameters();
  // Every tensor that belongs to the network's state, parameters and batch
  // norm running statistics alike, in a stable order. Soft target updates and
  // epoch-boundary quantization walk this list.
  std::vector<Tensor*> state_tensors();

  TensorBundle bundle() const;
  void load(const TensorBundle& b);
  void set_trainable(bool trainable);
  bool trainable() const { return trainable_; }
  std::size_t trainable_param_count() const;

  static constexpr double kBnMomentum = 0.1;
  static constexpr double kBnEps = 1e-5;

 private:
  struct BnState {
    Parameter gamma, beta;
    Tensor running_mean, running_var;
  };
  struct Layer {
    Parameter w, b;
    std::optional<BnState> bn;
  };

  std::string name_;
  MlpSpec spec_;
  std::vector<Layer> layers_;
  bool trainable_ = true;
};

// Uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor fan_in_init(int rows, int cols, int fan_in, RngStream& rng);

// Functional single-input forward through a parameter bundle: used by tests
// and tools that hold parameters as data rather than as a live module.
std::vector<double> mlp_forward(const TensorBundle& params, const MlpSpec& spec,
                                const std::vector<double>& input,
                                NetMode mode = NetMode::kEval);

}  // namespace fedrl
