#pragma once

#include <memory>
#include <string>

#include "fedrl/mlp.hpp"

namespace fedrl::fed {

// Pluggable state-action value function. The SAC loop is written against this
// interface so every federation strategy reuses one trainer.
class QFunction {
 public:
  virtual ~QFunction() = default;

  // obs: (B x obs_dim), act: (B x act_dim) -> (B x 1)
  virtual ValueId forward(Tape& t, ValueId obs, ValueId act, NetMode mode,
                          bool train_params) = 0;

  virtual std::vector<Parameter*> trainable_params() = 0;
  // Full persistable state (parameters, frozen copies, norm statistics) in a
  // stable order aligned across structurally equal instances. Soft target
  // updates and boundary quantization walk this list.
  virtual std::vector<Tensor*> state_tensors() = 0;
  virtual TensorBundle state_bundle() const = 0;
  virtual void load_state(const TensorBundle& b) = 0;
  // Fresh instance with identical structure (weights unspecified).
  virtual std::unique_ptr<QFunction> clone_structure() const = 0;
  virtual std::size_t trainable_param_count() const = 0;

  // Single state-action evaluation in inference mode.
  double value(const Tensor& obs_row, const Tensor& act_row);
};

// Deep copy: clone_structure + state transfer.
std::unique_ptr<QFunction> clone_with_state(const QFunction& src);

// target <- (1 - tau) * target + tau * live, elementwise over the aligned
// state (parameters and running statistics alike).
void soft_update(QFunction& target, QFunction& live, double tau);

// Plain MLP Q-network over concat(obs, act); the critic used by the
// parameter-averaging strategies and the non-federated baseline.
class MlpQNet : public QFunction {
 public:
  MlpQNet(std::string name, int obs_dim, int act_dim, std::vector<int> hidden, bool batch_norm,
          RngStream& init);

  ValueId forward(Tape& t, ValueId obs, ValueId act, NetMode mode, bool train_params) override;
  std::vector<Parameter*> trainable_params() override { return net_.parameters(); }
  std::vector<Tensor*> state_tensors() override { return net_.state_tensors(); }
  TensorBundle state_bundle() const override { return net_.bundle(); }
  void load_state(const TensorBundle& b) override { net_.load(b); }
  std::unique_ptr<QFunction> clone_structure() const override;
  std::size_t trainable_param_count() const override { return net_.trainable_param_count(); }

 private:
  std::string name_;
  int obs_dim_, act_dim_;
  std::vector<int> hidden_;
  bool batch_norm_;
  Mlp net_;
};

}  // namespace fedrl::fed
