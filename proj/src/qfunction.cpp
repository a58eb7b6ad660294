#include "fedrl/qfunction.hpp"

namespace fedrl::fed {

double QFunction::value(const Tensor& obs_row, const Tensor& act_row) {
  Tape t;
  ValueId q = forward(t, t.constant(obs_row), t.constant(act_row), NetMode::kEval, false);
  return t.value(q).item();
}

std::unique_ptr<QFunction> clone_with_state(const QFunction& src) {
  std::unique_ptr<QFunction> copy = src.clone_structure();
  copy->load_state(src.state_bundle());
  return copy;
}

void soft_update(QFunction& target, QFunction& live, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("soft_update: tau must be in (0, 1]");
  std::vector<Tensor*> tgt = target.state_tensors();
  std::vector<Tensor*> src = live.state_tensors();
  if (tgt.size() != src.size()) throw CompatibilityError("soft_update: misaligned state");
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    Tensor& a = *tgt[i];
    const Tensor& b = *src[i];
    if (!a.same_shape(b)) throw CompatibilityError("soft_update: state shape mismatch");
    for (int k = 0; k < a.numel(); ++k)
      a.data[k] = (1.0 - tau) * a.data[k] + tau * b.data[k];
  }
}

namespace {
MlpSpec q_spec(int obs_dim, int act_dim, const std::vector<int>& hidden, bool batch_norm) {
  MlpSpec s;
  s.layer_sizes.push_back(obs_dim + act_dim);
  for (int h : hidden) s.layer_sizes.push_back(h);
  s.layer_sizes.push_back(1);
  s.batch_norm = batch_norm;
  return s;
}
}  // namespace

MlpQNet::MlpQNet(std::string name, int obs_dim, int act_dim, std::vector<int> hidden,
                 bool batch_norm, RngStream& init)
    : name_(std::move(name)),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      hidden_(std::move(hidden)),
      batch_norm_(batch_norm),
      net_(name_, q_spec(obs_dim, act_dim, hidden_, batch_norm), init) {}

ValueId MlpQNet::forward(Tape& t, ValueId obs, ValueId act, NetMode mode, bool train_params) {
  const ValueId parts[] = {obs, act};
  return net_.forward(t, t.hstack(parts), mode, train_params);
}

std::unique_ptr<QFunction> MlpQNet::clone_structure() const {
  RngStream dummy(0);
  return std::make_unique<MlpQNet>(name_, obs_dim_, act_dim_, hidden_, batch_norm_, dummy);
}

}  // namespace fedrl::fed
