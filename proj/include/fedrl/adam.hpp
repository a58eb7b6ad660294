#pragma once

#include <vector>

#include "fedrl/autodiff.hpp"
#include "fedrl/bundle.hpp"

namespace fedrl {

// Adaptive-moment optimizer, beta = (0.9, 0.999), eps = 1e-8. Moment buffers
// are part of an agent's persistable state.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void zero_grad();
  void step();

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  int steps_taken() const { return t_; }

  TensorBundle state_bundle() const;  // moments, keyed by slot index
  void load_state(const TensorBundle& b, int steps_taken);
  std::vector<Tensor*> state_tensors();

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
};

}  // namespace fedrl
