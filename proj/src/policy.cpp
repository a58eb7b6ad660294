#include "fedrl/policy.hpp"

#include <cmath>
#include <numbers>

namespace fedrl {

void PolicySpec::validate() const {
  if (trunk_sizes.size() < 2) throw DimensionError("PolicySpec: trunk needs at least one layer");
  if (action_dim < 1) throw DimensionError("PolicySpec: action_dim must be positive");
  if (log_std_min >= log_std_max) throw DimensionError("PolicySpec: log_std bounds inverted");
}

namespace {
MlpSpec trunk_spec(const PolicySpec& s) {
  MlpSpec m;
  m.layer_sizes = s.trunk_sizes;
  m.batch_norm = false;
  return m;
}
}  // namespace

GaussianPolicy::GaussianPolicy(std::string name, PolicySpec spec, RngStream& init)
    : spec_(std::move(spec)),
      trunk_(name + ".trunk", trunk_spec(spec_), init),
      mean_w_(name + ".mean.w", fan_in_init(spec_.trunk_sizes.back(), spec_.action_dim,
                                            spec_.trunk_sizes.back(), init)),
      mean_b_(name + ".mean.b",
              fan_in_init(1, spec_.action_dim, spec_.trunk_sizes.back(), init)),
      log_std_w_(name + ".log_std.w", fan_in_init(spec_.trunk_sizes.back(), spec_.action_dim,
                                                  spec_.trunk_sizes.back(), init)),
      log_std_b_(name + ".log_std.b",
                 fan_in_init(1, spec_.action_dim, spec_.trunk_sizes.back(), init)) {
  spec_.validate();
}

GaussianPolicy::SampleNodes GaussianPolicy::sample(Tape& t, ValueId obs, const Tensor& noise,
                                                   bool train_params) {
  const int B = t.value(obs).rows;
  if (noise.rows != B || noise.cols != spec_.action_dim)
    throw DimensionError("GaussianPolicy: noise shape must be batch x action_dim");

  // The trunk's last layer is linear in Mlp terms; ReLU here makes the whole
  // trunk an all-ReLU stack feeding the two heads.
  ValueId h = t.relu(trunk_.forward(t, obs, NetMode::kTrainNoStats, train_params));
  ValueId mean = t.add_rowvec(t.matmul(h, t.param(mean_w_, train_params)),
                              t.param(mean_b_, train_params));
  ValueId log_std =
      t.clamp(t.add_rowvec(t.matmul(h, t.param(log_std_w_, train_params)),
                           t.param(log_std_b_, train_params)),
              spec_.log_std_min, spec_.log_std_max);
  ValueId std = t.exp_(log_std);
  ValueId eps = t.constant(noise);
  ValueId u = t.add(mean, t.mul(std, eps));
  ValueId action = t.tanh_(u);

  // log N(u; mean, std) reduces to -eps^2/2 - log_std - log(sqrt(2*pi)) under
  // the reparameterization (identical as a function of mean/std, so gradients
  // agree); the squash correction is -log(1 - a^2 + eps).
  Tensor gauss_const(B, spec_.action_dim);
  for (int r = 0; r < B; ++r)
    for (int c = 0; c < spec_.action_dim; ++c)
      gauss_const.at(r, c) =
          -0.5 * noise.at(r, c) * noise.at(r, c) - 0.5 * std::log(2.0 * std::numbers::pi);
  ValueId density = t.add(t.constant(std::move(gauss_const)), t.neg(log_std));
  ValueId squash = t.log_(t.affine(t.square(action), -1.0, 1.0 + kLogProbEps));
  ValueId log_prob = t.sum_cols(t.sub(density, squash));

  return SampleNodes{action, log_prob, mean, log_std};
}

Tensor GaussianPolicy::mean_action(const Tensor& obs) {
  Tape t;
  ValueId h = t.relu(trunk_.forward(t, t.constant(obs), NetMode::kEval, false));
  ValueId mean = t.add_rowvec(t.matmul(h, t.param(mean_w_, false)), t.param(mean_b_, false));
  return t.value(t.tanh_(mean));
}

Tensor GaussianPolicy::sample_action(const Tensor& obs, RngStream& rng) {
  Tensor noise(obs.rows, spec_.action_dim);
  for (double& v : noise.data) v = rng.normal();
  Tape t;
  SampleNodes s = sample(t, t.constant(obs), noise, false);
  return t.value(s.action);
}

std::vector<Parameter*> GaussianPolicy::parameters() {
  std::vector<Parameter*> ps = trunk_.parameters();
  ps.push_back(&mean_w_);
  ps.push_back(&mean_b_);
  ps.push_back(&log_std_w_);
  ps.push_back(&log_std_b_);
  return ps;
}

std::vector<Tensor*> GaussianPolicy::state_tensors() {
  std::vector<Tensor*> ts = trunk_.state_tensors();
  ts.push_back(&mean_w_.value);
  ts.push_back(&mean_b_.value);
  ts.push_back(&log_std_w_.value);
  ts.push_back(&log_std_b_.value);
  return ts;
}

TensorBundle GaussianPolicy::bundle() const {
  TensorBundle b = TensorBundle::prefixed("trunk/", trunk_.bundle());
  b.add_matrix("mean.w", mean_w_.value);
  b.add_matrix("mean.b", mean_b_.value);
  b.add_matrix("log_std.w", log_std_w_.value);
  b.add_matrix("log_std.b", log_std_b_.value);
  return b;
}

void GaussianPolicy::load(const TensorBundle& b) {
  trunk_.load(b.strip_prefix("trunk/"));
  mean_w_.value = b.matrix("mean.w");
  mean_b_.value = b.matrix("mean.b");
  log_std_w_.value = b.matrix("log_std.w");
  log_std_b_.value = b.matrix("log_std.b");
}

}  // namespace fedrl
