#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fedrl/tensor.hpp"

namespace fedrl {

// A named tensor with a gradient accumulator. Frozen parameters (trainable ==
// false) keep their grad buffer permanently zero: backward passes never write
// into it, which is what makes the federation's frozen-encoder guarantee exact
// rather than approximate.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor init, bool train = true)
      : name(std::move(n)), value(std::move(init)), grad(value.rows, value.cols), trainable(train) {}

  void zero_grad() { grad.fill(0.0); }
};

using ValueId = int;

// Append-only reverse-mode tape. Node creation order is a topological order,
// so backward() is a single reverse sweep. One tape instance is built per
// forward/backward pass and reset afterwards.
class Tape {
 public:
  // -- leaves ---------------------------------------------------------------
  ValueId constant(Tensor v);
  // Differentiable leaf for a parameter. When accumulate is false the pass is
  // read-only: gradients still flow through the value (e.g. to an upstream
  // action) but are not recorded on the parameter itself.
  ValueId param(Parameter& p, bool accumulate = true);

  // -- elementwise / broadcast ops -------------------------------------------
  ValueId add(ValueId a, ValueId b);
  ValueId sub(ValueId a, ValueId b);
  ValueId mul(ValueId a, ValueId b);
  ValueId affine(ValueId x, double scale, double shift);  // scale*x + shift
  ValueId neg(ValueId x) { return affine(x, -1.0, 0.0); }
  ValueId relu(ValueId x);
  ValueId tanh_(ValueId x);
  ValueId exp_(ValueId x);
  ValueId log_(ValueId x);
  ValueId square(ValueId x);
  ValueId clamp(ValueId x, double lo, double hi);
  ValueId min_elem(ValueId a, ValueId b);

  // -- shape ops --------------------------------------------------------------
  ValueId add_rowvec(ValueId x, ValueId row);    // (B x d) + (1 x d)
  ValueId broadcast_row(ValueId row, int rows);  // (1 x d) -> (B x d)
  ValueId hstack(std::span<const ValueId> parts);
  ValueId slice_cols(ValueId x, int c0, int c1);
  ValueId slice_rows(ValueId x, int r0, int r1);

  // -- linear algebra ----------------------------------------------------------
  ValueId matmul(ValueId a, ValueId b);
  ValueId rowdot(ValueId a, ValueId b);          // per-row dot -> (B x 1)
  ValueId mul_colvec(ValueId x, ValueId c);      // (B x d) * (B x 1) broadcast

  // -- reductions ---------------------------------------------------------------
  ValueId sum_cols(ValueId x);  // row sums -> (B x 1)
  ValueId sum_all(ValueId x);   // -> (1 x 1)
  ValueId mean_all(ValueId x);  // -> (1 x 1)

  // -- normalization ---------------------------------------------------------
  ValueId softmax_rows(ValueId x);
  ValueId layer_norm_rows(ValueId x, ValueId gamma, ValueId beta, double eps = 1e-5);

  // Batch norm over the batch (row) axis. Running statistics live outside the
  // tape; see nets/mlp for the module that owns them.
  enum class BnMode { kTrain, kTrainNoStatUpdate, kEval };
  ValueId batch_norm(ValueId x, ValueId gamma, ValueId beta, Tensor& running_mean,
                     Tensor& running_var, BnMode mode, double momentum, double eps);

  // -- engine ------------------------------------------------------------------
  void backward(ValueId root);

  const Tensor& value(ValueId id) const { return nodes_[id].value; }
  const Tensor& grad(ValueId id) const { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }
  void reset();

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    std::function<void(Tape&)> back;
  };

  ValueId push(Tensor value, std::function<void(Tape&)> back = nullptr);
  Tensor& ensure_grad(ValueId id);
  bool has_grad(ValueId id) const { return nodes_[id].grad.numel() != 0; }

  std::vector<Node> nodes_;
};

}  // namespace fedrl
