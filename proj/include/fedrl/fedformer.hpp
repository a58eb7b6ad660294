#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fedrl/embedding.hpp"
#include "fedrl/qfunction.hpp"
#include "fedrl/transformer.hpp"

namespace fedrl::fed {

// Shared surface of the encoder-set Q-networks: a trainable local encoder, a
// set of frozen peer encoders refreshed at every federation round, and a
// decoder head. The aggregation mechanism differs per subclass.
class EncoderSetQNet : public QFunction {
 public:
  virtual int agent_id() const = 0;
  virtual std::vector<int> external_ids() const = 0;
  virtual bool has_external(int agent_id) const = 0;
  // Installs or refreshes a frozen peer encoder. The copy never receives
  // gradients afterwards.
  virtual void set_external(int agent_id, const TensorBundle& encoder) = 0;
  virtual TensorBundle local_encoder_bundle() const = 0;
};

struct FedFormerSpec {
  int obs_dim = 0;
  int act_dim = 0;
  // Encoder widths after the input; the last entry is the embedding width
  // (the transformer's model_dim).
  std::vector<int> encoder_hidden = {256, 256, 256};
  // Decoder widths between its input (2 * model_dim) and the scalar output.
  std::vector<int> decoder_hidden = {256, 256};
  int transformer_layers = 2;
  int transformer_heads = 4;
  int transformer_ff_dim = 0;  // 0 -> 2 * model_dim
  bool batch_norm = true;
  // Id-embedding rows; must cover every agent id that can appear.
  int num_agent_ids = 1;

  int model_dim() const { return encoder_hidden.back(); }
  MlpSpec encoder_spec() const;
  MlpSpec decoder_spec() const;
  TransformerSpec transformer_spec() const;
  void validate() const;
};

// Attention-federated Q-function: every encoder (local and frozen peers)
// embeds the same (obs, act) pair, id embeddings mark provenance, a learned
// aggregate token joins the set, and a transformer encoder fuses them. The
// decoder reads the transformed aggregate row concatenated with the raw local
// embedding.
class FedFormerQNet : public EncoderSetQNet {
 public:
  FedFormerQNet(std::string name, int agent_id, FedFormerSpec spec, RngStream& init);

  ValueId forward(Tape& t, ValueId obs, ValueId act, NetMode mode, bool train_params) override;

  int agent_id() const override { return agent_id_; }
  std::vector<int> external_ids() const override;
  bool has_external(int agent_id) const override;
  void set_external(int agent_id, const TensorBundle& encoder) override;
  void add_external(int agent_id, const TensorBundle& encoder);
  TensorBundle local_encoder_bundle() const override { return local_.bundle(); }
  const Mlp& external_encoder(int agent_id) const;
  const FedFormerSpec& spec() const { return spec_; }

  std::vector<Parameter*> trainable_params() override;
  std::vector<Tensor*> state_tensors() override;
  TensorBundle state_bundle() const override;
  void load_state(const TensorBundle& b) override;
  std::unique_ptr<QFunction> clone_structure() const override;
  std::size_t trainable_param_count() const override;

 private:
  Mlp make_frozen_encoder(int agent_id) const;

  std::string name_;
  int agent_id_;
  FedFormerSpec spec_;
  Mlp local_;
  std::vector<std::pair<int, Mlp>> externals_;  // frozen; enumeration order = insertion order
  EmbeddingTable emb_;
  TransformerEncoder transformer_;
  Mlp decoder_;
};

struct FedMlpSpec {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> encoder_hidden = {256, 256, 256};
  // Aggregation MLP hidden widths; its output width equals the embedding
  // width so the decoder is interchangeable with the attention variant's.
  std::vector<int> agg_hidden = {256, 256};
  std::vector<int> decoder_hidden = {256, 256};
  bool batch_norm = true;
  int num_encoders = 1;  // fixed at construction; the concat width bakes it in

  int model_dim() const { return encoder_hidden.back(); }
  MlpSpec encoder_spec() const;
  MlpSpec agg_spec() const;
  MlpSpec decoder_spec() const;
  void validate() const;
};

// Ablation variant: the transformer and id/CLS embeddings are replaced by a
// feed-forward aggregator over the encoder outputs concatenated in a fixed
// agent order. Not permutation invariant, and the encoder count cannot change
// after construction.
class FedMlpQNet : public EncoderSetQNet {
 public:
  FedMlpQNet(std::string name, int agent_id, FedMlpSpec spec, RngStream& init);

  ValueId forward(Tape& t, ValueId obs, ValueId act, NetMode mode, bool train_params) override;

  int agent_id() const override { return agent_id_; }
  std::vector<int> external_ids() const override;
  bool has_external(int agent_id) const override;
  void set_external(int agent_id, const TensorBundle& encoder) override;
  void add_external(int agent_id, const TensorBundle& encoder);
  TensorBundle local_encoder_bundle() const override { return local_.bundle(); }
  const FedMlpSpec& spec() const { return spec_; }

  std::vector<Parameter*> trainable_params() override;
  std::vector<Tensor*> state_tensors() override;
  TensorBundle state_bundle() const override;
  void load_state(const TensorBundle& b) override;
  std::unique_ptr<QFunction> clone_structure() const override;
  std::size_t trainable_param_count() const override;

 private:
  Mlp make_frozen_encoder(int agent_id) const;

  std::string name_;
  int agent_id_;
  FedMlpSpec spec_;
  Mlp local_;
  std::vector<std::pair<int, Mlp>> externals_;
  Mlp agg_;
  Mlp decoder_;
};

// End-of-epoch weight exchange: for every q-net and every upload from a peer
// j != agent, the frozen copy of j's encoder is refreshed. The nets' own
// local encoders and everything else stay untouched; callers keep target
// networks out of this list.
void exchange_encoders(std::span<EncoderSetQNet* const> qnets,
                       const std::map<int, TensorBundle>& uploads);

// Builds a fresh agent joining an existing federation: all saved peer
// encoders are installed frozen, everything trainable starts from scratch,
// and the id table has one row per saved peer plus the newcomer.
std::unique_ptr<FedFormerQNet> onboard_agent(const std::map<int, TensorBundle>& pretrained,
                                             const std::string& name, int new_agent_id,
                                             FedFormerSpec spec, RngStream& init);

}  // namespace fedrl::fed
