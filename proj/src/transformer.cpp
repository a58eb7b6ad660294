#include "fedrl/transformer.hpp"

#include <cmath>

#include "fedrl/mlp.hpp"

namespace fedrl {

void TransformerSpec::validate() const {
  if (layers < 1) throw DimensionError("TransformerSpec: layers must be >= 1");
  if (heads < 1) throw DimensionError("TransformerSpec: heads must be >= 1");
  if (model_dim < 1) throw DimensionError("TransformerSpec: model_dim must be >= 1");
  if (model_dim % heads != 0)
    throw DimensionError("TransformerSpec: model_dim must be divisible by heads");
}

TransformerEncoder::TransformerEncoder(std::string name, TransformerSpec spec, RngStream& init)
    : name_(std::move(name)), spec_(spec) {
  if (spec_.ff_dim == 0) spec_.ff_dim = 2 * spec_.model_dim;
  spec_.validate();
  const int d = spec_.model_dim;
  const int f = spec_.ff_dim;
  for (int i = 0; i < spec_.layers; ++i) {
    const std::string p = name_ + ".t" + std::to_string(i) + ".";
    layers_.push_back(Layer{
        Parameter(p + "wq", fan_in_init(d, d, d, init)), Parameter(p + "bq", fan_in_init(1, d, d, init)),
        Parameter(p + "wk", fan_in_init(d, d, d, init)), Parameter(p + "bk", fan_in_init(1, d, d, init)),
        Parameter(p + "wv", fan_in_init(d, d, d, init)), Parameter(p + "bv", fan_in_init(1, d, d, init)),
        Parameter(p + "wo", fan_in_init(d, d, d, init)), Parameter(p + "bo", fan_in_init(1, d, d, init)),
        Parameter(p + "ln1.g", Tensor::full(1, d, 1.0)), Parameter(p + "ln1.b", Tensor(1, d)),
        Parameter(p + "w1", fan_in_init(d, f, d, init)), Parameter(p + "b1", fan_in_init(1, f, d, init)),
        Parameter(p + "w2", fan_in_init(f, d, f, init)), Parameter(p + "b2", fan_in_init(1, d, f, init)),
        Parameter(p + "ln2.g", Tensor::full(1, d, 1.0)), Parameter(p + "ln2.b", Tensor(1, d))});
  }
}

std::vector<ValueId> TransformerEncoder::forward(Tape& t, const std::vector<ValueId>& rows,
                                                 bool train_params) {
  const int n = static_cast<int>(rows.size());
  if (n < 1) throw DimensionError(name_ + ": empty embedding set");
  for (ValueId r : rows) {
    if (t.value(r).cols != spec_.model_dim)
      throw DimensionError(name_ + ": embedding width does not match model_dim");
    if (!t.value(r).all_finite()) throw NumericError(name_ + ": non-finite attention input");
  }

  const int H = spec_.heads;
  const int dh = spec_.head_dim();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<ValueId> cur = rows;
  for (auto& l : layers_) {
    // Projections, one GEMM per row.
    std::vector<ValueId> q(n), k(n), v(n);
    for (int i = 0; i < n; ++i) {
      q[i] = t.add_rowvec(t.matmul(cur[i], t.param(l.wq, train_params)), t.param(l.bq, train_params));
      k[i] = t.add_rowvec(t.matmul(cur[i], t.param(l.wk, train_params)), t.param(l.bk, train_params));
      v[i] = t.add_rowvec(t.matmul(cur[i], t.param(l.wv, train_params)), t.param(l.bv, train_params));
    }
    // Per-head scaled dot-product attention over the row set.
    std::vector<std::vector<ValueId>> head_out(n);
    for (int h = 0; h < H; ++h) {
      const int c0 = h * dh, c1 = (h + 1) * dh;
      std::vector<ValueId> qh(n), kh(n), vh(n);
      for (int i = 0; i < n; ++i) {
        qh[i] = t.slice_cols(q[i], c0, c1);
        kh[i] = t.slice_cols(k[i], c0, c1);
        vh[i] = t.slice_cols(v[i], c0, c1);
      }
      for (int i = 0; i < n; ++i) {
        std::vector<ValueId> logits(n);
        for (int j = 0; j < n; ++j)
          logits[j] = t.affine(t.rowdot(qh[i], kh[j]), inv_sqrt_dh, 0.0);
        ValueId attn = t.softmax_rows(t.hstack(logits));  // (B x n), rows sum to 1
        ValueId mixed = t.mul_colvec(vh[0], t.slice_cols(attn, 0, 1));
        for (int j = 1; j < n; ++j)
          mixed = t.add(mixed, t.mul_colvec(vh[j], t.slice_cols(attn, j, j + 1)));
        head_out[i].push_back(mixed);
      }
    }
    // Concat heads, project, residual + LN, feed-forward, residual + LN.
    for (int i = 0; i < n; ++i) {
      ValueId concat = t.hstack(head_out[i]);
      ValueId proj = t.add_rowvec(t.matmul(concat, t.param(l.wo, train_params)),
                                  t.param(l.bo, train_params));
      ValueId r1 = t.layer_norm_rows(t.add(cur[i], proj), t.param(l.ln1_g, train_params),
                                     t.param(l.ln1_b, train_params));
      ValueId ff = t.add_rowvec(
          t.matmul(t.relu(t.add_rowvec(t.matmul(r1, t.param(l.w1, train_params)),
                                       t.param(l.b1, train_params))),
                   t.param(l.w2, train_params)),
          t.param(l.b2, train_params));
      cur[i] = t.layer_norm_rows(t.add(r1, ff), t.param(l.ln2_g, train_params),
                                 t.param(l.ln2_b, train_params));
    }
  }
  return cur;
}

Tensor TransformerEncoder::forward_single(const Tensor& embeddings) {
  if (embeddings.cols != spec_.model_dim)
    throw DimensionError(name_ + ": embedding width does not match model_dim");
  Tape t;
  std::vector<ValueId> rows;
  for (int i = 0; i < embeddings.rows; ++i) {
    Tensor row(1, embeddings.cols);
    for (int c = 0; c < embeddings.cols; ++c) row.data[c] = embeddings.at(i, c);
    rows.push_back(t.constant(std::move(row)));
  }
  std::vector<ValueId> out = forward(t, rows, false);
  Tensor result(embeddings.rows, embeddings.cols);
  for (int i = 0; i < embeddings.rows; ++i)
    for (int c = 0; c < embeddings.cols; ++c) result.at(i, c) = t.value(out[i]).data[c];
  return result;
}

std::vector<Parameter*> TransformerEncoder::parameters() {
  std::vector<Parameter*> ps;
  for (auto& l : layers_)
    for (Parameter* p : {&l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.ln1_g,
                         &l.ln1_b, &l.w1, &l.b1, &l.w2, &l.b2, &l.ln2_g, &l.ln2_b})
      ps.push_back(p);
  return ps;
}

std::vector<Tensor*> TransformerEncoder::state_tensors() {
  std::vector<Tensor*> ts;
  for (Parameter* p : parameters()) ts.push_back(&p->value);
  return ts;
}

TensorBundle TransformerEncoder::bundle() const {
  TensorBundle b;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::string p = "t" + std::to_string(i) + ".";
    b.add_matrix(p + "wq", l.wq.value);
    b.add_matrix(p + "bq", l.bq.value);
    b.add_matrix(p + "wk", l.wk.value);
    b.add_matrix(p + "bk", l.bk.value);
    b.add_matrix(p + "wv", l.wv.value);
    b.add_matrix(p + "bv", l.bv.value);
    b.add_matrix(p + "wo", l.wo.value);
    b.add_matrix(p + "bo", l.bo.value);
    b.add_matrix(p + "ln1.g", l.ln1_g.value);
    b.add_matrix(p + "ln1.b", l.ln1_b.value);
    b.add_matrix(p + "w1", l.w1.value);
    b.add_matrix(p + "b1", l.b1.value);
    b.add_matrix(p + "w2", l.w2.value);
    b.add_matrix(p + "b2", l.b2.value);
    b.add_matrix(p + "ln2.g", l.ln2_g.value);
    b.add_matrix(p + "ln2.b", l.ln2_b.value);
  }
  return b;
}

void TransformerEncoder::load(const TensorBundle& b) {
  TensorBundle current = bundle();
  if (!current.structural_match(b))
    throw CompatibilityError(name_ + ": bundle does not match transformer structure");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    const std::string p = "t" + std::to_string(i) + ".";
    l.wq.value = b.matrix(p + "wq");
    l.bq.value = b.matrix(p + "bq");
    l.wk.value = b.matrix(p + "wk");
    l.bk.value = b.matrix(p + "bk");
    l.wv.value = b.matrix(p + "wv");
    l.bv.value = b.matrix(p + "bv");
    l.wo.value = b.matrix(p + "wo");
    l.bo.value = b.matrix(p + "bo");
    l.ln1_g.value = b.matrix(p + "ln1.g");
    l.ln1_b.value = b.matrix(p + "ln1.b");
    l.w1.value = b.matrix(p + "w1");
    l.b1.value = b.matrix(p + "b1");
    l.w2.value = b.matrix(p + "w2");
    l.b2.value = b.matrix(p + "b2");
    l.ln2_g.value = b.matrix(p + "ln2.g");
    l.ln2_b.value = b.matrix(p + "ln2.b");
  }
}

std::size_t TransformerEncoder::trainable_param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_)
    for (const Parameter* p : {&l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.ln1_g,
                               &l.ln1_b, &l.w1, &l.b1, &l.w2, &l.b2, &l.ln2_g, &l.ln2_b})
      n += p->value.numel();
  return n;
}

}  // namespace fedrl
