#pragma once

#include <array>
#include <string>
#include <vector>

#include "ariadne/roadmap.hpp"
#include "ariadne/tensor.hpp"

namespace ariadne::nn {

struct NetConfig {
  int d = 128;      // embedding width
  int heads = 8;    // attention heads (d % heads == 0)
  int ffn = 512;    // feed-forward hidden width
  int layers = 6;   // stacked encoder attention layers
};

struct LayerNormParams {
  Tensor gain, bias;
};

// One attention layer: pre-norm multi-head attention with residual, then a
// pre-norm feed-forward sublayer with residual.
struct AttentionBlockParams {
  Tensor wq, wk, wv, wo;
  LayerNormParams ln_q, ln_kv, ln_ff;
  Tensor ff1_w, ff1_b, ff2_w, ff2_b;
};

struct EncoderParams {
  Tensor embed_w, embed_b;  // 4 -> d
  std::vector<AttentionBlockParams> layers;
  LayerNormParams out_ln;
};

// Cross-attention over all enhanced node features from the current node,
// concatenated with the current node features and projected back to d.
struct DecoderCoreParams {
  AttentionBlockParams cross;
  Tensor proj_w, proj_b;  // 2d -> d
};

struct PolicyNet {
  NetConfig cfg;
  EncoderParams enc;
  DecoderCoreParams dec;
  Tensor ptr_wq, ptr_wk;  // pointer layer
};

struct CriticNet {
  NetConfig cfg;
  EncoderParams enc;
  DecoderCoreParams dec;
  Tensor val_w, val_b;  // [h_c ; h_nb_i] -> scalar Q
};

PolicyNet init_policy(const NetConfig& cfg, uint64_t seed);
CriticNet init_critic(const NetConfig& cfg, uint64_t seed);

ParamList collect_params(PolicyNet& net, const std::string& prefix = "policy");
ParamList collect_params(CriticNet& net, const std::string& prefix);

// Structural copies whose leaves share value storage but own their gradient
// buffers; used for deterministic chunked gradient accumulation.
PolicyNet proxy(const PolicyNet& net);
CriticNet proxy(const CriticNet& net);

// n x 4 constant feature tensor from the augmented graph.
Tensor graph_features(const AugmentedGraph& g);
// n x n byte mask, nonzero = blocked; graph neighbors and self are allowed.
std::vector<uint8_t> attention_mask(const AugmentedGraph& g);

// Multi-head scaled-dot attention core (per-head softmax(q k^T / sqrt(d_h)) v,
// heads concatenated). With heads == 1 this is exactly the single-head layer.
Tensor scaled_dot_attention(const Tensor& q_in, const Tensor& kv_in, const Tensor& wq,
                            const Tensor& wk, const Tensor& wv,
                            const std::vector<uint8_t>* mask, int heads);

Tensor attention_block(const AttentionBlockParams& p, int heads, const Tensor& q_in,
                       const Tensor& kv_in, const std::vector<uint8_t>* mask,
                       bool self_attn);

// Linear embed + stacked masked self-attention; (n, d) enhanced node features.
Tensor encode(const EncoderParams& p, const NetConfig& cfg, const AugmentedGraph& g);

// Enhanced current-node features (1, d) from encoder output.
Tensor decode_current(const DecoderCoreParams& p, const NetConfig& cfg,
                      const Tensor& enc_out, int current);

// (1, m) log-probabilities over g.neighbors. Throws if the neighbor list is empty.
Tensor policy_log_probs(const PolicyNet& net, const AugmentedGraph& g);
// (m, 1) soft state-action values per neighbor.
Tensor critic_values(const CriticNet& net, const AugmentedGraph& g);

// Plain-value (no-graph) helpers for rollouts and targets.
std::vector<double> policy_probs_nograd(const PolicyNet& net, const AugmentedGraph& g);
std::vector<double> policy_log_probs_nograd(const PolicyNet& net,
                                            const AugmentedGraph& g);
std::vector<double> critic_values_nograd(const CriticNet& net, const AugmentedGraph& g);

// "ARIADNE-CKPT v1": named f32 tensors plus a JSON state block, little-endian.
struct CkptTensor {
  std::string name;
  int rows = 0, cols = 0;
  std::vector<float> data;
};

struct Checkpoint {
  std::vector<CkptTensor> tensors;
  std::string state_json;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint tensors into params by name; throws with a shape/name diff
// on mismatch.
void load_params(const Checkpoint& ckpt, ParamList& params);
void append_params(Checkpoint& ckpt, const ParamList& params);

}  // namespace ariadne::nn
