#pragma once

#include <string>

#include "fedrl/autodiff.hpp"
#include "fedrl/bundle.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

// Learned per-agent identity vectors plus the aggregate-token row fed to the
// transformer alongside the encoder outputs.
class EmbeddingTable {
 public:
  EmbeddingTable(std::string name, int num_ids, int dim, RngStream& init);

  // 1 x dim row for an agent id; gradients scatter into that row only.
  ValueId id_row(Tape& t, int id, bool train_params = true);
  ValueId cls_row(Tape& t, bool train_params = true);

  int num_ids() const { return rows_.value.rows; }
  int dim() const { return rows_.value.cols; }

  std::vector<Parameter*> parameters() { return {&rows_, &cls_}; }
  std::vector<Tensor*> state_tensors() { return {&rows_.value, &cls_.value}; }

  TensorBundle bundle() const;
  void load(const TensorBundle& b);
  std::size_t trainable_param_count() const {
    return static_cast<std::size_t>(rows_.value.numel()) + cls_.value.numel();
  }

 private:
  Parameter rows_;  // num_ids x dim
  Parameter cls_;   // 1 x dim
};

}  // namespace fedrl
