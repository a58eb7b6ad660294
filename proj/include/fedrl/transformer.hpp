#pragma once

#include <string>
#include <vector>

#include "fedrl/autodiff.hpp"
#include "fedrl/bundle.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

struct TransformerSpec {
  int layers = 2;
  int heads = 4;
  int model_dim = 0;
  int ff_dim = 0;  // 0 -> defaults to 2 * model_dim

  int head_dim() const { return model_dim / heads; }
  void validate() const;
};

// Post-norm transformer encoder over a *set* of embeddings: multi-head
// self-attention, residual + layer norm, position-wise feed-forward,
// residual + layer norm. No positional encoding is ever added; row identity
// comes from the id embeddings, so the block is permutation-equivariant.
//
// The input is a list of n rows, each a (batch x model_dim) node. Keeping the
// batch on the row axis of each entry turns every projection into one GEMM
// per row instead of a per-sample loop.
class TransformerEncoder {
 public:
  TransformerEncoder(std::string name, TransformerSpec spec, RngStream& init);

  std::vector<ValueId> forward(Tape& t, const std::vector<ValueId>& rows,
                               bool train_params = true);

  // Single-sample convenience: treats E (n x model_dim) as n rows of batch 1
  // and returns the transformed n x model_dim matrix.
  Tensor forward_single(const Tensor& embeddings);

  const TransformerSpec& spec() const { return spec_; }
  std::vector<Parameter*> parameters();
  std::vector<Tensor*> state_tensors();
  TensorBundle bundle() const;
  void load(const TensorBundle& b);
  std::size_t trainable_param_count() const;

 private:
  struct Layer {
    Parameter wq, bq, wk, bk, wv, bv, wo, bo;
    Parameter ln1_g, ln1_b;
    Parameter w1, b1, w2, b2;
    Parameter ln2_g, ln2_b;
  };

  std::string name_;
  TransformerSpec spec_;
  std::vector<Layer> layers_;
};

}  // namespace fedrl
