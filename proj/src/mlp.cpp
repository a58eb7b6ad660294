#include "fedrl/mlp.hpp"

#include <cmath>

namespace fedrl {

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw DimensionError("MlpSpec: need at least an input and an output width");
  for (int s : layer_sizes)
    if (s < 1) throw DimensionError("MlpSpec: layer widths must be positive");
}

Tensor fan_in_init(int rows, int cols, int fan_in, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform(rows, cols, -bound, bound, rng);
}

Mlp::Mlp(std::string name, MlpSpec spec, RngStream& init) : name_(std::move(name)), spec_(std::move(spec)) {
  spec_.validate();
  const int n = spec_.num_layers();
  for (int i = 0; i < n; ++i) {
    const int in = spec_.layer_sizes[i];
    const int out = spec_.layer_sizes[i + 1];
    Layer layer{Parameter(name_ + ".l" + std::to_string(i) + ".w", fan_in_init(in, out, in, init)),
                Parameter(name_ + ".l" + std::to_string(i) + ".b", fan_in_init(1, out, in, init)),
                std::nullopt};
    const bool hidden = i + 1 < n;
    if (hidden && spec_.batch_norm) {
      layer.bn = BnState{Parameter(name_ + ".l" + std::to_string(i) + ".bn.gamma", Tensor::full(1, out, 1.0)),
                         Parameter(name_ + ".l" + std::to_string(i) + ".bn.beta", Tensor(1, out)),
                         Tensor(1, out), Tensor::full(1, out, 1.0)};
    }
    layers_.push_back(std::move(layer));
  }
}

ValueId Mlp::forward(Tape& t, ValueId x, NetMode mode, bool train_params) {
  if (t.value(x).cols != spec_.in_dim())
    throw DimensionError(name_ + ": input width " + std::to_string(t.value(x).cols) +
                         " does not match first layer width " + std::to_string(spec_.in_dim()));
  const bool accum = train_params && trainable_;
  // Frozen networks always run on their running statistics.
  if (!trainable_) mode = NetMode::kEval;
  ValueId h = x;
  const int n = static_cast<int>(layers_.size());
  for (int i = 0; i < n; ++i) {
    Layer& l = layers_[i];
    h = t.add_rowvec(t.matmul(h, t.param(l.w, accum)), t.param(l.b, accum));
    if (i + 1 < n) {
      if (l.bn) {
        const auto bn_mode = mode == NetMode::kTrain     ? Tape::BnMode::kTrain
                             : mode == NetMode::kEval    ? Tape::BnMode::kEval
                                                         : Tape::BnMode::kTrainNoStatUpdate;
        h = t.batch_norm(h, t.param(l.bn->gamma, accum), t.param(l.bn->beta, accum),
                         l.bn->running_mean, l.bn->running_var, bn_mode, kBnMomentum, kBnEps);
      }
      h = t.relu(h);
    }
  }
  return h;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> ps;
  for (auto& l : layers_) {
    ps.push_back(&l.w);
    ps.push_back(&l.b);
    if (l.bn) {
      ps.push_back(&l.bn->gamma);
      ps.push_back(&l.bn->beta);
    }
  }
  return ps;
}

std::vector<Tensor*> Mlp::state_tensors() {
  std::vector<Tensor*> ts;
  for (auto& l : layers_) {
    ts.push_back(&l.w.value);
    ts.push_back(&l.b.value);
    if (l.bn) {
      ts.push_back(&l.bn->gamma.value);
      ts.push_back(&l.bn->beta.value);
      ts.push_back(&l.bn->running_mean);
      ts.push_back(&l.bn->running_var);
    }
  }
  return ts;
}

TensorBundle Mlp::bundle() const {
  TensorBundle b;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::string p = "l" + std::to_string(i) + ".";
    b.add_matrix(p + "w", l.w.value);
    b.add_matrix(p + "b", l.b.value);
    if (l.bn) {
      b.add_matrix(p + "bn.gamma", l.bn->gamma.value);
      b.add_matrix(p + "bn.beta", l.bn->beta.value);
      b.add_matrix(p + "bn.mean", l.bn->running_mean);
      b.add_matrix(p + "bn.var", l.bn->running_var);
    }
  }
  return b;
}

void Mlp::load(const TensorBundle& b) {
  TensorBundle current = bundle();
  if (!current.structural_match(b))
    throw CompatibilityError(name_ + ": bundle does not match network structure");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    const std::string p = "l" + std::to_string(i) + ".";
    l.w.value = b.matrix(p + "w");
    l.b.value = b.matrix(p + "b");
    if (l.bn) {
      l.bn->gamma.value = b.matrix(p + "bn.gamma");
      l.bn->beta.value = b.matrix(p + "bn.beta");
      l.bn->running_mean = b.matrix(p + "bn.mean");
      l.bn->running_var = b.matrix(p + "bn.var");
    }
  }
}

void Mlp::set_trainable(bool trainable) {
  trainable_ = trainable;
  for (Parameter* p : parameters()) p->trainable = trainable;
}

std::size_t Mlp::trainable_param_count() const {
  if (!trainable_) return 0;
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.w.value.numel()) + l.b.value.numel();
    if (l.bn) n += static_cast<std::size_t>(l.bn->gamma.value.numel()) + l.bn->beta.value.numel();
  }
  return n;
}

std::vector<double> mlp_forward(const TensorBundle& params, const MlpSpec& spec,
                                const std::vector<double>& input, NetMode mode) {
  RngStream dummy(0);
  Mlp net("mlp_forward", spec, dummy);
  net.load(params);
  if (static_cast<int>(input.size()) != spec.in_dim())
    throw DimensionError("mlp_forward: input length does not match first layer");
  Tensor x(1, spec.in_dim());
  x.data = input;
  Tape t;
  ValueId out = net.forward(t, t.constant(std::move(x)), mode);
  return t.value(out).data;
}

}  // namespace fedrl
