#include "ariadne/nets.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ariadne/rng.hpp"

namespace ariadne::nn {

namespace {

// Single visitation order for naming, checkpointing, and proxying.
template <class F>
void visit(LayerNormParams& p, const std::string& prefix, F&& f) {
  f(prefix + ".gain", p.gain);
  f(prefix + ".bias", p.bias);
}

template <class F>
void visit(AttentionBlockParams& p, const std::string& prefix, F&& f) {
  f(prefix + ".wq", p.wq);
  f(prefix + ".wk", p.wk);
  f(prefix + ".wv", p.wv);
  f(prefix + ".wo", p.wo);
  visit(p.ln_q, prefix + ".ln_q", f);
  visit(p.ln_kv, prefix + ".ln_kv", f);
  visit(p.ln_ff, prefix + ".ln_ff", f);
  f(prefix + ".ff1_w", p.ff1_w);
  f(prefix + ".ff1_b", p.ff1_b);
  f(prefix + ".ff2_w", p.ff2_w);
  f(prefix + ".ff2_b", p.ff2_b);
}

template <class F>
void visit(EncoderParams& p, const std::string& prefix, F&& f) {
  f(prefix + ".embed_w", p.embed_w);
  f(prefix + ".embed_b", p.embed_b);
  for (size_t i = 0; i < p.layers.size(); ++i)
    visit(p.layers[i], prefix + ".layer" + std::to_string(i), f);
  visit(p.out_ln, prefix + ".out_ln", f);
}

template <class F>
void visit(DecoderCoreParams& p, const std::string& prefix, F&& f) {
  visit(p.cross, prefix + ".cross", f);
  f(prefix + ".proj_w", p.proj_w);
  f(prefix + ".proj_b", p.proj_b);
}

template <class F>
void visit(PolicyNet& net, const std::string& prefix, F&& f) {
  visit(net.enc, prefix + ".enc", f);
  visit(net.dec, prefix + ".dec", f);
  f(prefix + ".ptr_wq", net.ptr_wq);
  f(prefix + ".ptr_wk", net.ptr_wk);
}

template <class F>
void visit(CriticNet& net, const std::string& prefix, F&& f) {
  visit(net.enc, prefix + ".enc", f);
  visit(net.dec, prefix + ".dec", f);
  f(prefix + ".val_w", net.val_w);
  f(prefix + ".val_b", net.val_b);
}

LayerNormParams init_ln(int d) {
  LayerNormParams p;
  p.gain = Tensor::from(1, d, std::vector<double>(d, 1.0), true);
  p.bias = Tensor::from(1, d, std::vector<double>(d, 0.0), true);
  return p;
}

AttentionBlockParams init_block(const NetConfig& cfg, uint64_t seed) {
  AttentionBlockParams p;
  const int d = cfg.d;
  p.wq = uniform_init(d, d, d, derive_seed(seed, "wq"));
  p.wk = uniform_init(d, d, d, derive_seed(seed, "wk"));
  p.wv = uniform_init(d, d, d, derive_seed(seed, "wv"));
  p.wo = uniform_init(d, d, d, derive_seed(seed, "wo"));
  p.ln_q = init_ln(d);
  p.ln_kv = init_ln(d);
  p.ln_ff = init_ln(d);
  p.ff1_w = uniform_init(d, cfg.ffn, d, derive_seed(seed, "ff1_w"));
  p.ff1_b = Tensor::from(1, cfg.ffn, std::vector<double>(cfg.ffn, 0.0), true);
  p.ff2_w = uniform_init(cfg.ffn, d, cfg.ffn, derive_seed(seed, "ff2_w"));
  p.ff2_b = Tensor::from(1, d, std::vector<double>(d, 0.0), true);
  return p;
}

EncoderParams init_encoder(const NetConfig& cfg, uint64_t seed) {
  EncoderParams p;
  p.embed_w = uniform_init(4, cfg.d, 4, derive_seed(seed, "embed_w"));
  p.embed_b = Tensor::from(1, cfg.d, std::vector<double>(cfg.d, 0.0), true);
  for (int i = 0; i < cfg.layers; ++i)
    p.layers.push_back(init_block(cfg, derive_seed(seed, "layer", i)));
  p.out_ln = init_ln(cfg.d);
  return p;
}

DecoderCoreParams init_decoder(const NetConfig& cfg, uint64_t seed) {
  DecoderCoreParams p;
  p.cross = init_block(cfg, derive_seed(seed, "cross"));
  p.proj_w = uniform_init(2 * cfg.d, cfg.d, 2 * cfg.d, derive_seed(seed, "proj_w"));
  p.proj_b = Tensor::from(1, cfg.d, std::vector<double>(cfg.d, 0.0), true);
  return p;
}

}  // namespace

PolicyNet init_policy(const NetConfig& cfg, uint64_t seed) {
  if (cfg.d % cfg.heads != 0)
    throw std::invalid_argument("NetConfig: d must be divisible by heads");
  PolicyNet net;
  net.cfg = cfg;
  net.enc = init_encoder(cfg, derive_seed(seed, "enc"));
  net.dec = init_decoder(cfg, derive_seed(seed, "dec"));
  net.ptr_wq = uniform_init(cfg.d, cfg.d, cfg.d, derive_seed(seed, "ptr_wq"));
  net.ptr_wk = uniform_init(cfg.d, cfg.d, cfg.d, derive_seed(seed, "ptr_wk"));
  return net;
}

CriticNet init_critic(const NetConfig& cfg, uint64_t seed) {
  if (cfg.d % cfg.heads != 0)
    throw std::invalid_argument("NetConfig: d must be divisible by heads");
  CriticNet net;
  net.cfg = cfg;
  net.enc = init_encoder(cfg, derive_seed(seed, "enc"));
  net.dec = init_decoder(cfg, derive_seed(seed, "dec"));
  net.val_w = uniform_init(2 * cfg.d, 1, 2 * cfg.d, derive_seed(seed, "val_w"));
  net.val_b = Tensor::from(1, 1, {0.0}, true);
  return net;
}

ParamList collect_params(PolicyNet& net, const std::string& prefix) {
  ParamList out;
  visit(net, prefix, [&](const std::string& name, Tensor& t) { out.add(name, t); });
  return out;
}

ParamList collect_params(CriticNet& net, const std::string& prefix) {
  ParamList out;
  visit(net, prefix, [&](const std::string& name, Tensor& t) { out.add(name, t); });
  return out;
}

PolicyNet proxy(const PolicyNet& net) {
  PolicyNet out = net;
  visit(out, "p", [](const std::string&, Tensor& t) { t = t.proxy(); });
  return out;
}

CriticNet proxy(const CriticNet& net) {
  CriticNet out = net;
  visit(out, "c", [](const std::string&, Tensor& t) { t = t.proxy(); });
  return out;
}

Tensor graph_features(const AugmentedGraph& g) {
  std::vector<double> vals(static_cast<size_t>(g.n) * 4);
  for (size_t i = 0; i < vals.size(); ++i) vals[i] = g.feat[i];
  return Tensor::from(g.n, 4, std::move(vals));
}

std::vector<uint8_t> attention_mask(const AugmentedGraph& g) {
  std::vector<uint8_t> mask(static_cast<size_t>(g.n) * g.n, 1);
  for (int i = 0; i < g.n; ++i) {
    mask[static_cast<size_t>(i) * g.n + i] = 0;  // self-attention always allowed
    for (uint16_t j : g.adj[i]) mask[static_cast<size_t>(i) * g.n + j] = 0;
  }
  return mask;
}

Tensor scaled_dot_attention(const Tensor& q_in, const Tensor& kv_in, const Tensor& wq,
                            const Tensor& wk, const Tensor& wv,
                            const std::vector<uint8_t>* mask, int heads) {
  const int d = wq.cols();
  if (d % heads != 0)
    throw std::invalid_argument("scaled_dot_attention: d not divisible by heads");
  const int dh = d / heads;
  Tensor q = matmul(q_in, wq);
  Tensor k = matmul(kv_in, wk);
  Tensor v = matmul(kv_in, wv);
  Tensor out;
  for (int h = 0; h < heads; ++h) {
    Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
    Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
    Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
    Tensor scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(dh));
    Tensor w = masked_softmax_rows(scores, mask);
    Tensor oh = matmul(w, vh);
    out = h == 0 ? oh : concat_cols(out, oh);
  }
  return out;
}

Tensor attention_block(const AttentionBlockParams& p, int heads, const Tensor& q_in,
                       const Tensor& kv_in, const std::vector<uint8_t>* mask,
                       bool self_attn) {
  Tensor qn = layer_norm(q_in, p.ln_q.gain, p.ln_q.bias);
  Tensor kvn = self_attn ? qn : layer_norm(kv_in, p.ln_kv.gain, p.ln_kv.bias);
  Tensor attn = matmul(scaled_dot_attention(qn, kvn, p.wq, p.wk, p.wv, mask, heads),
                       p.wo);
  Tensor a = add(q_in, attn);
  Tensor ffn_in = layer_norm(a, p.ln_ff.gain, p.ln_ff.bias);
  Tensor hidden = relu(add_rowvec(matmul(ffn_in, p.ff1_w), p.ff1_b));
  Tensor ffn_out = add_rowvec(matmul(hidden, p.ff2_w), p.ff2_b);
  return add(a, ffn_out);
}

Tensor encode(const EncoderParams& p, const NetConfig& cfg, const AugmentedGraph& g) {
  if (g.n <= 0) throw std::invalid_argument("encode: empty graph");
  Tensor h = add_rowvec(matmul(graph_features(g), p.embed_w), p.embed_b);
  const std::vector<uint8_t> mask = attention_mask(g);
  for (const AttentionBlockParams& layer : p.layers)
    h = attention_block(layer, cfg.heads, h, h, &mask, true);
  return layer_norm(h, p.out_ln.gain, p.out_ln.bias);
}

Tensor decode_current(const DecoderCoreParams& p, const NetConfig& cfg,
                      const Tensor& enc_out, int current) {
  Tensor hc = gather_rows(enc_out, {current});
  Tensor x = attention_block(p.cross, cfg.heads, hc, enc_out, nullptr, false);
  return add_rowvec(matmul(concat_cols(x, hc), p.proj_w), p.proj_b);
}

namespace {

std::vector<int> neighbor_rows(const AugmentedGraph& g) {
  if (g.neighbors.empty())
    throw std::invalid_argument("decode: current node has no neighbors");
  std::vector<int> rows(g.neighbors.begin(), g.neighbors.end());
  return rows;
}

}  // namespace

Tensor policy_log_probs(const PolicyNet& net, const AugmentedGraph& g) {
  Tensor enc_out = encode(net.enc, net.cfg, g);
  Tensor hc2 = decode_current(net.dec, net.cfg, enc_out, g.current);
  Tensor hnb = gather_rows(enc_out, neighbor_rows(g));
  Tensor q = matmul(hc2, net.ptr_wq);
  Tensor k = matmul(hnb, net.ptr_wk);
  Tensor logits = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(net.cfg.d));
  return log_softmax_rows(logits);
}

Tensor critic_values(const CriticNet& net, const AugmentedGraph& g) {
  Tensor enc_out = encode(net.enc, net.cfg, g);
  Tensor hc2 = decode_current(net.dec, net.cfg, enc_out, g.current);
  const std::vector<int> rows = neighbor_rows(g);
  Tensor hnb = gather_rows(enc_out, rows);
  Tensor cat = concat_cols(tile_rows(hc2, static_cast<int>(rows.size())), hnb);
  return add_rowvec(matmul(cat, net.val_w), net.val_b);
}

std::vector<double> policy_probs_nograd(const PolicyNet& net, const AugmentedGraph& g) {
  std::vector<double> lp = policy_log_probs_nograd(net, g);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

std::vector<double> policy_log_probs_nograd(const PolicyNet& net,
                                            const AugmentedGraph& g) {
  NoGradGuard ng;
  return policy_log_probs(net, g).values();
}

std::vector<double> critic_values_nograd(const CriticNet& net, const AugmentedGraph& g) {
  NoGradGuard ng;
  return critic_values(net, g).values();
}

namespace {

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, const std::vector<float>& v) {
  static_assert(sizeof(float) == 4);
  for (float x : v) {
    uint32_t bits;
    std::memcpy(&bits, &x, 4);
    write_u32(os, bits);
  }
}

std::vector<float> read_f32(std::istream& is, size_t count) {
  std::vector<float> out(count);
  for (size_t i = 0; i < count; ++i) {
    uint32_t bits = read_u32(is);
    std::memcpy(&out[i], &bits, 4);
  }
  return out;
}

constexpr const char* kCkptMagic = "ARIADNE-CKPT v1\n";

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kCkptMagic, 16);
  write_u32(os, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const CkptTensor& t : ckpt.tensors) {
    write_u32(os, static_cast<uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_u32(os, static_cast<uint32_t>(t.rows));
    write_u32(os, static_cast<uint32_t>(t.cols));
    write_f32(os, t.data);
  }
  write_u32(os, static_cast<uint32_t>(ckpt.state_json.size()));
  os.write(ckpt.state_json.data(), static_cast<std::streamsize>(ckpt.state_json.size()));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char magic[16];
  is.read(magic, 16);
  if (!is || std::memcmp(magic, kCkptMagic, 16) != 0)
    throw std::runtime_error("not an ARIADNE-CKPT v1 file: " + path);
  Checkpoint ckpt;
  const uint32_t n = read_u32(is);
  ckpt.tensors.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    CkptTensor& t = ckpt.tensors[i];
    const uint32_t name_len = read_u32(is);
    t.name.resize(name_len);
    is.read(t.name.data(), name_len);
    t.rows = static_cast<int>(read_u32(is));
    t.cols = static_cast<int>(read_u32(is));
    t.data = read_f32(is, static_cast<size_t>(t.rows) * t.cols);
  }
  const uint32_t json_len = read_u32(is);
  ckpt.state_json.resize(json_len);
  is.read(ckpt.state_json.data(), json_len);
  if (!is) throw std::runtime_error("checkpoint: truncated state block");
  return ckpt;
}

void append_params(Checkpoint& ckpt, const ParamList& params) {
  for (const auto& [name, t] : params.items) {
    CkptTensor ct;
    ct.name = name;
    ct.rows = t.rows();
    ct.cols = t.cols();
    ct.data.reserve(t.size());
    for (double v : t.values()) ct.data.push_back(static_cast<float>(v));
    ckpt.tensors.push_back(std::move(ct));
  }
}

void load_params(const Checkpoint& ckpt, ParamList& params) {
  std::map<std::string, const CkptTensor*> by_name;
  for (const CkptTensor& t : ckpt.tensors) by_name[t.name] = &t;
  std::ostringstream diff;
  for (auto& [name, t] : params.items) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      diff << "  missing tensor: " << name << " (" << t.rows() << "x" << t.cols()
           << ")\n";
      continue;
    }
    const CkptTensor& ct = *it->second;
    if (ct.rows != t.rows() || ct.cols != t.cols()) {
      diff << "  shape mismatch: " << name << " checkpoint " << ct.rows << "x"
           << ct.cols << " vs expected " << t.rows() << "x" << t.cols() << "\n";
      continue;
    }
    auto& vals = t.values();
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>(ct.data[i]);
  }
  if (!diff.str().empty())
    throw std::runtime_error("checkpoint/architecture mismatch:\n" + diff.str());
}

}  // namespace ariadne::nn
