#include "fedrl/fedformer.hpp"

#include <algorithm>

namespace fedrl::fed {

// ---------------------------------------------------------------------------
// FedFormer

MlpSpec FedFormerSpec::encoder_spec() const {
  MlpSpec s;
  s.layer_sizes.push_back(obs_dim + act_dim);
  for (int h : encoder_hidden) s.layer_sizes.push_back(h);
  s.batch_norm = batch_norm;
  return s;
}

MlpSpec FedFormerSpec::decoder_spec() const {
  MlpSpec s;
  s.layer_sizes.push_back(2 * model_dim());
  for (int h : decoder_hidden) s.layer_sizes.push_back(h);
  s.layer_sizes.push_back(1);
  s.batch_norm = batch_norm;
  return s;
}

TransformerSpec FedFormerSpec::transformer_spec() const {
  TransformerSpec s;
  s.layers = transformer_layers;
  s.heads = transformer_heads;
  s.model_dim = model_dim();
  s.ff_dim = transformer_ff_dim;
  return s;
}

void FedFormerSpec::validate() const {
  if (obs_dim < 1 || act_dim < 1) throw DimensionError("FedFormerSpec: bad obs/act dims");
  if (encoder_hidden.empty()) throw DimensionError("FedFormerSpec: encoder needs layers");
  if (num_agent_ids < 1) throw DimensionError("FedFormerSpec: id table needs at least one row");
  encoder_spec().validate();
  decoder_spec().validate();
  TransformerSpec t = transformer_spec();
  if (t.ff_dim == 0) t.ff_dim = 2 * t.model_dim;
  t.validate();
}

FedFormerQNet::FedFormerQNet(std::string name, int agent_id, FedFormerSpec spec, RngStream& init)
    : name_(std::move(name)),
      agent_id_(agent_id),
      spec_(std::move(spec)),
      local_(name_ + ".enc_local", spec_.encoder_spec(), init),
      emb_(name_ + ".emb", spec_.num_agent_ids, spec_.model_dim(), init),
      transformer_(name_ + ".tf", spec_.transformer_spec(), init),
      decoder_(name_ + ".dec", spec_.decoder_spec(), init) {
  spec_.validate();
  if (agent_id_ < 0 || agent_id_ >= spec_.num_agent_ids)
    throw CompatibilityError(name_ + ": agent id outside the embedding table");
}

Mlp FedFormerQNet::make_frozen_encoder(int agent_id) const {
  RngStream dummy(0);
  Mlp enc(name_ + ".enc_ext" + std::to_string(agent_id), spec_.encoder_spec(), dummy);
  enc.set_trainable(false);
  return enc;
}

void FedFormerQNet::add_external(int agent_id, const TensorBundle& encoder) {
  if (agent_id == agent_id_)
    throw CompatibilityError(name_ + ": cannot install own id as an external encoder");
  if (has_external(agent_id))
    throw CompatibilityError(name_ + ": external encoder " + std::to_string(agent_id) +
                             " already present");
  if (agent_id < 0 || agent_id >= spec_.num_agent_ids)
    throw CompatibilityError(name_ + ": external id outside the embedding table");
  Mlp enc = make_frozen_encoder(agent_id);
  if (!enc.bundle().structural_match(encoder))
    throw CompatibilityError(name_ + ": uploaded encoder does not match the local spec");
  enc.load(encoder);
  externals_.emplace_back(agent_id, std::move(enc));
}

void FedFormerQNet::set_external(int agent_id, const TensorBundle& encoder) {
  for (auto& [id, enc] : externals_) {
    if (id == agent_id) {
      if (!enc.bundle().structural_match(encoder))
        throw CompatibilityError(name_ + ": uploaded encoder does not match the local spec");
      enc.load(encoder);
      return;
    }
  }
  throw CompatibilityError(name_ + ": no external slot for agent " + std::to_string(agent_id));
}

bool FedFormerQNet::has_external(int agent_id) const {
  for (const auto& [id, enc] : externals_)
    if (id == agent_id) return true;
  return false;
}

std::vector<int> FedFormerQNet::external_ids() const {
  std::vector<int> ids;
  for (const auto& [id, enc] : externals_) ids.push_back(id);
  return ids;
}

const Mlp& FedFormerQNet::external_encoder(int agent_id) const {
  for (const auto& [id, enc] : externals_)
    if (id == agent_id) return enc;
  throw CompatibilityError(name_ + ": no external encoder for agent " + std::to_string(agent_id));
}

ValueId FedFormerQNet::forward(Tape& t, ValueId obs, ValueId act, NetMode mode,
                               bool train_params) {
  const ValueId xa_parts[] = {obs, act};
  ValueId xa = t.hstack(xa_parts);
  const int batch = t.value(xa).rows;

  // The local encoder contributes twice: an id-embedded row in the set and
  // the raw branch concatenated into the decoder input.
  ValueId local_out = local_.forward(t, xa, mode, train_params);

  std::vector<ValueId> rows;
  rows.push_back(t.add_rowvec(local_out, emb_.id_row(t, agent_id_, train_params)));
  for (auto& [id, enc] : externals_)
    rows.push_back(t.add_rowvec(enc.forward(t, xa, NetMode::kEval, false),
                                emb_.id_row(t, id, train_params)));
  rows.push_back(t.broadcast_row(emb_.cls_row(t, train_params), batch));

  std::vector<ValueId> fused = transformer_.forward(t, rows, train_params);
  ValueId cls_out = fused.back();

  const ValueId dec_parts[] = {cls_out, local_out};
  return decoder_.forward(t, t.hstack(dec_parts), mode, train_params);
}

std::vector<Parameter*> FedFormerQNet::trainable_params() {
  std::vector<Parameter*> ps = local_.parameters();
  for (Parameter* p : emb_.parameters()) ps.push_back(p);
  for (Parameter* p : transformer_.parameters()) ps.push_back(p);
  for (Parameter* p : decoder_.parameters()) ps.push_back(p);
  return ps;
}

std::vector<Tensor*> FedFormerQNet::state_tensors() {
  std::vector<Tensor*> ts = local_.state_tensors();
  for (auto& [id, enc] : externals_)
    for (Tensor* s : enc.state_tensors()) ts.push_back(s);
  for (Tensor* s : emb_.state_tensors()) ts.push_back(s);
  for (Tensor* s : transformer_.state_tensors()) ts.push_back(s);
  for (Tensor* s : decoder_.state_tensors()) ts.push_back(s);
  return ts;
}

TensorBundle FedFormerQNet::state_bundle() const {
  TensorBundle b = TensorBundle::prefixed("local/", local_.bundle());
  TensorBundle ids;
  std::vector<double> id_list;
  for (const auto& [id, enc] : externals_) id_list.push_back(static_cast<double>(id));
  b.add("ext_ids", {static_cast<std::uint32_t>(id_list.size())}, id_list);
  for (const auto& [id, enc] : externals_) {
    TensorBundle eb = TensorBundle::prefixed("ext" + std::to_string(id) + "/", enc.bundle());
    for (const auto& e : eb.entries()) b.add(e.name, e.shape, e.data);
  }
  for (const auto& e : TensorBundle::prefixed("emb/", emb_.bundle()).entries())
    b.add(e.name, e.shape, e.data);
  for (const auto& e : TensorBundle::prefixed("tf/", transformer_.bundle()).entries())
    b.add(e.name, e.shape, e.data);
  for (const auto& e : TensorBundle::prefixed("dec/", decoder_.bundle()).entries())
    b.add(e.name, e.shape, e.data);
  return b;
}

void FedFormerQNet::load_state(const TensorBundle& b) {
  const auto& ids = b.at("ext_ids");
  if (ids.data.size() != externals_.size())
    throw CompatibilityError(name_ + ": external encoder count mismatch in state bundle");
  for (std::size_t i = 0; i < externals_.size(); ++i)
    if (static_cast<int>(ids.data[i]) != externals_[i].first)
      throw CompatibilityError(name_ + ": external encoder id mismatch in state bundle");

  local_.load(b.strip_prefix("local/"));
  for (auto& [id, enc] : externals_) enc.load(b.strip_prefix("ext" + std::to_string(id) + "/"));
  emb_.load(b.strip_prefix("emb/"));
  transformer_.load(b.strip_prefix("tf/"));
  decoder_.load(b.strip_prefix("dec/"));
}

std::unique_ptr<QFunction> FedFormerQNet::clone_structure() const {
  RngStream dummy(0);
  auto copy = std::make_unique<FedFormerQNet>(name_, agent_id_, spec_, dummy);
  for (const auto& [id, enc] : externals_) copy->add_external(id, enc.bundle());
  return copy;
}

std::size_t FedFormerQNet::trainable_param_count() const {
  return local_.trainable_param_count() + emb_.trainable_param_count() +
         transformer_.trainable_param_count() + decoder_.trainable_param_count();
}

// ---------------------------------------------------------------------------
// FedMLP ablation

MlpSpec FedMlpSpec::encoder_spec() const {
  MlpSpec s;
  s.layer_sizes.push_back(obs_dim + act_dim);
  for (int h : encoder_hidden) s.layer_sizes.push_back(h);
  s.batch_norm = batch_norm;
  return s;
}

MlpSpec FedMlpSpec::agg_spec() const {
  MlpSpec s;
  s.layer_sizes.push_back(num_encoders * model_dim());
  for (int h : agg_hidden) s.layer_sizes.push_back(h);
  s.layer_sizes.push_back(model_dim());
  s.batch_norm = batch_norm;
  return s;
}

MlpSpec FedMlpSpec::decoder_spec() const {
  MlpSpec s;
  s.layer_sizes.push_back(2 * model_dim());
  for (int h : decoder_hidden) s.layer_sizes.push_back(h);
  s.layer_sizes.push_back(1);
  s.batch_norm = batch_norm;
  return s;
}

void FedMlpSpec::validate() const {
  if (obs_dim < 1 || act_dim < 1) throw DimensionError("FedMlpSpec: bad obs/act dims");
  if (num_encoders < 1) throw DimensionError("FedMlpSpec: need at least one encoder");
  encoder_spec().validate();
  agg_spec().validate();
  decoder_spec().validate();
}

FedMlpQNet::FedMlpQNet(std::string name, int agent_id, FedMlpSpec spec, RngStream& init)
    : name_(std::move(name)),
      agent_id_(agent_id),
      spec_(std::move(spec)),
      local_(name_ + ".enc_local", spec_.encoder_spec(), init),
      agg_(name_ + ".agg", spec_.agg_spec(), init),
      decoder_(name_ + ".dec", spec_.decoder_spec(), init) {
  spec_.validate();
}

Mlp FedMlpQNet::make_frozen_encoder(int agent_id) const {
  RngStream dummy(0);
  Mlp enc(name_ + ".enc_ext" + std::to_string(agent_id), spec_.encoder_spec(), dummy);
  enc.set_trainable(false);
  return enc;
}

void FedMlpQNet::add_external(int agent_id, const TensorBundle& encoder) {
  if (agent_id == agent_id_)
    throw CompatibilityError(name_ + ": cannot install own id as an external encoder");
  if (has_external(agent_id))
    throw CompatibilityError(name_ + ": external encoder " + std::to_string(agent_id) +
                             " already present");
  if (static_cast<int>(externals_.size()) + 1 >= spec_.num_encoders)
    throw CompatibilityError(name_ + ": encoder count fixed at construction (" +
                             std::to_string(spec_.num_encoders) + ")");
  Mlp enc = make_frozen_encoder(agent_id);
  if (!enc.bundle().structural_match(encoder))
    throw CompatibilityError(name_ + ": uploaded encoder does not match the local spec");
  enc.load(encoder);
  externals_.emplace_back(agent_id, std::move(enc));
}

void FedMlpQNet::set_external(int agent_id, const TensorBundle& encoder) {
  for (auto& [id, enc] : externals_) {
    if (id == agent_id) {
      if (!enc.bundle().structural_match(encoder))
        throw CompatibilityError(name_ + ": uploaded encoder does not match the local spec");
      enc.load(encoder);
      return;
    }
  }
  throw CompatibilityError(name_ + ": no external slot for agent " + std::to_string(agent_id));
}

bool FedMlpQNet::has_external(int agent_id) const {
  for (const auto& [id, enc] : externals_)
    if (id == agent_id) return true;
  return false;
}

std::vector<int> FedMlpQNet::external_ids() const {
  std::vector<int> ids;
  for (const auto& [id, enc] : externals_) ids.push_back(id);
  return ids;
}

ValueId FedMlpQNet::forward(Tape& t, ValueId obs, ValueId act, NetMode mode, bool train_params) {
  if (static_cast<int>(externals_.size()) + 1 != spec_.num_encoders)
    throw CompatibilityError(name_ + ": holds " + std::to_string(externals_.size() + 1) +
                             " encoders but was built for " + std::to_string(spec_.num_encoders));
  const ValueId xa_parts[] = {obs, act};
  ValueId xa = t.hstack(xa_parts);

  ValueId local_out = local_.forward(t, xa, mode, train_params);
  // Fixed construction order: local first, then peers as installed.
  std::vector<ValueId> outs{local_out};
  for (auto& [id, enc] : externals_) outs.push_back(enc.forward(t, xa, NetMode::kEval, false));

  ValueId aggregated = agg_.forward(t, t.hstack(outs), mode, train_params);
  const ValueId dec_parts[] = {aggregated, local_out};
  return decoder_.forward(t, t.hstack(dec_parts), mode, train_params);
}

std::vector<Parameter*> FedMlpQNet::trainable_params() {
  std::vector<Parameter*> ps = local_.parameters();
  for (Parameter* p : agg_.parameters()) ps.push_back(p);
  for (Parameter* p : decoder_.parameters()) ps.push_back(p);
  return ps;
}

std::vector<Tensor*> FedMlpQNet::state_tensors() {
  std::vector<Tensor*> ts = local_.state_tensors();
  for (auto& [id, enc] : externals_)
    for (Tensor* s : enc.state_tensors()) ts.push_back(s);
  for (Tensor* s : agg_.state_tensors()) ts.push_back(s);
  for (Tensor* s : decoder_.state_tensors()) ts.push_back(s);
  return ts;
}

TensorBundle FedMlpQNet::state_bundle() const {
  TensorBundle b = TensorBundle::prefixed("local/", local_.bundle());
  std::vector<double> id_list;
  for (const auto& [id, enc] : externals_) id_list.push_back(static_cast<double>(id));
  b.add("ext_ids", {static_cast<std::uint32_t>(id_list.size())}, id_list);
  for (const auto& [id, enc] : externals_) {
    TensorBundle eb = TensorBundle::prefixed("ext" + std::to_string(id) + "/", enc.bundle());
    for (const auto& e : eb.entries()) b.add(e.name, e.shape, e.data);
  }
  for (const auto& e : TensorBundle::prefixed("agg/", agg_.bundle()).entries())
    b.add(e.name, e.shape, e.data);
  for (const auto& e : TensorBundle::prefixed("dec/", decoder_.bundle()).entries())
    b.add(e.name, e.shape, e.data);
  return b;
}

void FedMlpQNet::load_state(const TensorBundle& b) {
  const auto& ids = b.at("ext_ids");
  if (ids.data.size() != externals_.size())
    throw CompatibilityError(name_ + ": external encoder count mismatch in state bundle");
  for (std::size_t i = 0; i < externals_.size(); ++i)
    if (static_cast<int>(ids.data[i]) != externals_[i].first)
      throw CompatibilityError(name_ + ": external encoder id mismatch in state bundle");
  local_.load(b.strip_prefix("local/"));
  for (auto& [id, enc] : externals_) enc.load(b.strip_prefix("ext" + std::to_string(id) + "/"));
  agg_.load(b.strip_prefix("agg/"));
  decoder_.load(b.strip_prefix("dec/"));
}

std::unique_ptr<QFunction> FedMlpQNet::clone_structure() const {
  RngStream dummy(0);
  auto copy = std::make_unique<FedMlpQNet>(name_, agent_id_, spec_, dummy);
  for (const auto& [id, enc] : externals_) copy->add_external(id, enc.bundle());
  return copy;
}

std::size_t FedMlpQNet::trainable_param_count() const {
  return local_.trainable_param_count() + agg_.trainable_param_count() +
         decoder_.trainable_param_count();
}

// ---------------------------------------------------------------------------

void exchange_encoders(std::span<EncoderSetQNet* const> qnets,
                       const std::map<int, TensorBundle>& uploads) {
  for (EncoderSetQNet* q : qnets)
    if (!uploads.contains(q->agent_id()))
      throw StalePeerError("exchange_encoders: missing upload from agent " +
                           std::to_string(q->agent_id()));
  for (EncoderSetQNet* q : qnets)
    for (const auto& [id, bundle] : uploads)
      if (id != q->agent_id()) q->set_external(id, bundle);
}

std::unique_ptr<FedFormerQNet> onboard_agent(const std::map<int, TensorBundle>& pretrained,
                                             const std::string& name, int new_agent_id,
                                             FedFormerSpec spec, RngStream& init) {
  int max_id = new_agent_id;
  for (const auto& [id, bundle] : pretrained) max_id = std::max(max_id, id);
  spec.num_agent_ids = std::max(spec.num_agent_ids, max_id + 1);

  auto net = std::make_unique<FedFormerQNet>(name, new_agent_id, spec, init);
  for (const auto& [id, bundle] : pretrained) net->add_external(id, bundle);
  return net;
}

}  // namespace fedrl::fed
