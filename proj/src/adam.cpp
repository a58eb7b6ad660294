#include "fedrl/adam.hpp"

#include <cmath>

namespace fedrl {

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int k = 0; k < p.value.numel(); ++k) {
      const double g = p.grad.data[k];
      m.data[k] = beta1_ * m.data[k] + (1.0 - beta1_) * g;
      v.data[k] = beta2_ * v.data[k] + (1.0 - beta2_) * g * g;
      p.value.data[k] -= lr_ * (m.data[k] / bc1) / (std::sqrt(v.data[k] / bc2) + eps_);
    }
  }
}

TensorBundle Adam::state_bundle() const {
  TensorBundle b;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    b.add_matrix("p" + std::to_string(i) + ".m", m_[i]);
    b.add_matrix("p" + std::to_string(i) + ".v", v_[i]);
  }
  return b;
}

void Adam::load_state(const TensorBundle& b, int steps_taken) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor m = b.matrix("p" + std::to_string(i) + ".m");
    Tensor v = b.matrix("p" + std::to_string(i) + ".v");
    if (!m.same_shape(m_[i]) || !v.same_shape(v_[i]))
      throw CompatibilityError("Adam: moment shape mismatch at slot " + std::to_string(i));
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
  t_ = steps_taken;
}

std::vector<Tensor*> Adam::state_tensors() {
  std::vector<Tensor*> ts;
  for (auto& m : m_) ts.push_back(&m);
  for (auto& v : v_) ts.push_back(&v);
  return ts;
}

}  // namespace fedrl
