#include "ariadne/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ariadne {

using nn::Tensor;

double SacConfig::target_entropy(int k) const {
  return target_entropy_scale * std::log(static_cast<double>(k));
}

std::vector<size_t> ReplayBuffer::sample_indices(Rng& rng, size_t batch) const {
  const size_t n = buf_.size();
  batch = std::min(batch, n);
  // Partial Fisher-Yates over [0, n).
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t i = 0; i < batch; ++i) {
    size_t j = i + static_cast<size_t>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(batch);
  return idx;
}

double soft_state_value(const std::vector<double>& q, const std::vector<double>& pi,
                        double alpha) {
  if (q.size() != pi.size())
    throw std::invalid_argument("soft_state_value: size mismatch");
  if (alpha <= 0) throw std::invalid_argument("soft_state_value: alpha must be > 0");
  double v = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (pi[i] == 0.0) continue;  // 0 * log(0) = 0
    v += pi[i] * (q[i] - alpha * std::log(pi[i]));
  }
  return v;
}

SacNets init_sac_nets(const nn::NetConfig& cfg, double init_alpha, uint64_t seed) {
  SacNets nets;
  nets.cfg = cfg;
  nets.policy = nn::init_policy(cfg, derive_seed(seed, "policy"));
  nets.q1 = nn::init_critic(cfg, derive_seed(seed, "q1"));
  nets.q2 = nn::init_critic(cfg, derive_seed(seed, "q2"));
  // Targets start as exact copies.
  nets.target_q1 = nn::init_critic(cfg, derive_seed(seed, "q1"));
  nets.target_q2 = nn::init_critic(cfg, derive_seed(seed, "q2"));
  nets.log_alpha = Tensor::from(1, 1, {std::log(init_alpha)}, true);
  return nets;
}

namespace {

// Fixed-size chunks processed independently (possibly in parallel), reduced in
// chunk order. The serial path runs the same chunks sequentially, so results
// are bit-identical for any thread count.
template <class ChunkFn>
void run_chunks(int n, int chunk, bool parallel, ChunkFn&& fn) {
  const int n_chunks = (n + chunk - 1) / chunk;
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int c = 0; c < n_chunks; ++c) fn(c, c * chunk, std::min(n, (c + 1) * chunk));
  } else {
    for (int c = 0; c < n_chunks; ++c) fn(c, c * chunk, std::min(n, (c + 1) * chunk));
  }
}

std::vector<double> min_q_nograd(const nn::CriticNet& q1, const nn::CriticNet& q2,
                                 const AugmentedGraph& obs) {
  std::vector<double> a = nn::critic_values_nograd(q1, obs);
  const std::vector<double> b = nn::critic_values_nograd(q2, obs);
  for (size_t i = 0; i < a.size(); ++i) a[i] = std::min(a[i], b[i]);
  return a;
}

}  // namespace

std::vector<double> critic_targets(const SacNets& nets,
                                   const std::vector<const Transition*>& batch,
                                   double gamma, bool parallel, int chunk) {
  const int n = static_cast<int>(batch.size());
  std::vector<double> y(n, 0.0);
  const double alpha = nets.alpha();
  run_chunks(n, chunk, parallel, [&](int, int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const Transition& t = *batch[i];
      double v_next = 0.0;
      if (!t.done) {
        const std::vector<double> lp =
            nn::policy_log_probs_nograd(nets.policy, t.next_obs);
        std::vector<double> pi(lp.size());
        for (size_t j = 0; j < lp.size(); ++j) pi[j] = std::exp(lp[j]);
        const std::vector<double> qmin =
            min_q_nograd(nets.target_q1, nets.target_q2, t.next_obs);
        for (size_t j = 0; j < lp.size(); ++j)
          v_next += pi[j] * (qmin[j] - alpha * lp[j]);
      }
      y[i] = t.reward + gamma * v_next;
    }
  });
  return y;
}

double critic_loss(SacNets& nets, const std::vector<const Transition*>& batch,
                   const std::vector<double>& targets, CriticGrads* grads_into,
                   bool parallel, int chunk) {
  const int n = static_cast<int>(batch.size());
  if (static_cast<int>(targets.size()) != n)
    throw std::invalid_argument("critic_loss: targets size mismatch");
  const int n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> chunk_loss(n_chunks, 0.0);
  std::vector<nn::ParamList> chunk_g1(grads_into ? n_chunks : 0);
  std::vector<nn::ParamList> chunk_g2(grads_into ? n_chunks : 0);

  run_chunks(n, chunk, parallel, [&](int c, int lo, int hi) {
    nn::CriticNet q1p = grads_into ? nn::proxy(nets.q1) : nets.q1;
    nn::CriticNet q2p = grads_into ? nn::proxy(nets.q2) : nets.q2;
    for (int i = lo; i < hi; ++i) {
      const Transition& t = *batch[i];
      Tensor y = Tensor::scalar(targets[i]);
      Tensor sample_loss;
      {
        std::optional<nn::NoGradGuard> ng;
        if (!grads_into) ng.emplace();
        Tensor d1 = sub(gather_rows(critic_values(q1p, t.obs), {t.action}), y);
        Tensor d2 = sub(gather_rows(critic_values(q2p, t.obs), {t.action}), y);
        sample_loss = scale(add(mul(d1, d1), mul(d2, d2)), 0.5 / n);
      }
      chunk_loss[c] += sample_loss.item();
      if (grads_into) sample_loss.backward();
    }
    if (grads_into) {
      chunk_g1[c] = nn::collect_params(q1p, "q1");
      chunk_g2[c] = nn::collect_params(q2p, "q2");
    }
  });

  double loss = 0.0;
  for (int c = 0; c < n_chunks; ++c) {
    loss += chunk_loss[c];
    if (grads_into) {
      grads_into->q1.accumulate_grads(chunk_g1[c]);
      grads_into->q2.accumulate_grads(chunk_g2[c]);
    }
  }
  return loss;
}

double policy_loss(SacNets& nets, const std::vector<const Transition*>& batch,
                   nn::ParamList* grads_into,
                   std::vector<std::vector<double>>* log_probs_out, bool parallel,
                   int chunk) {
  const int n = static_cast<int>(batch.size());
  const double alpha = nets.alpha();
  const int n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> chunk_loss(n_chunks, 0.0);
  std::vector<nn::ParamList> chunk_g(grads_into ? n_chunks : 0);
  if (log_probs_out) log_probs_out->assign(n, {});

  run_chunks(n, chunk, parallel, [&](int c, int lo, int hi) {
    nn::PolicyNet pp = grads_into ? nn::proxy(nets.policy) : nets.policy;
    for (int i = lo; i < hi; ++i) {
      const Transition& t = *batch[i];
      // Critics held constant.
      const std::vector<double> qmin = min_q_nograd(nets.q1, nets.q2, t.obs);
      Tensor qmin_t = Tensor::from(1, static_cast<int>(qmin.size()),
                                   std::vector<double>(qmin.begin(), qmin.end()));
      Tensor sample_loss;
      std::vector<double> lp_vals;
      {
        std::optional<nn::NoGradGuard> ng;
        if (!grads_into) ng.emplace();
        Tensor lp = policy_log_probs(pp, t.obs);
        lp_vals = lp.values();
        Tensor pi = exp_elem(lp);
        Tensor term = mul(pi, sub(scale(lp, alpha), qmin_t));
        sample_loss = scale(sum_all(term), 1.0 / n);
      }
      chunk_loss[c] += sample_loss.item();
      if (grads_into) sample_loss.backward();
      if (log_probs_out) (*log_probs_out)[i] = std::move(lp_vals);
    }
    if (grads_into) chunk_g[c] = nn::collect_params(pp, "policy");
  });

  double loss = 0.0;
  for (int c = 0; c < n_chunks; ++c) {
    loss += chunk_loss[c];
    if (grads_into) grads_into->accumulate_grads(chunk_g[c]);
  }
  return loss;
}

double temperature_loss(const std::vector<std::vector<double>>& log_probs,
                        double alpha, double target_entropy,
                        double* grad_log_alpha) {
  if (log_probs.empty()) throw std::invalid_argument("temperature_loss: empty batch");
  // E_a[-(log pi + H_bar)] = H(pi) - H_bar per observation.
  double mean_gap = 0.0;
  for (const auto& lp : log_probs) {
    double acc = 0.0;
    for (double l : lp) {
      const double p = std::exp(l);
      if (p > 0.0) acc += p * (l + target_entropy);
    }
    mean_gap += -acc;
  }
  mean_gap /= static_cast<double>(log_probs.size());
  if (grad_log_alpha) *grad_log_alpha = alpha * mean_gap;
  return alpha * mean_gap;
}

SacTrainer::SacTrainer(SacConfig cfg, nn::NetConfig net_cfg, int k_neighbors,
                       uint64_t seed)
    : cfg_(cfg),
      target_entropy_(cfg.target_entropy(k_neighbors)),
      nets_(init_sac_nets(net_cfg, cfg.init_alpha, seed)) {
  policy_params_ = nn::collect_params(nets_.policy, "policy");
  q1_params_ = nn::collect_params(nets_.q1, "q1");
  q2_params_ = nn::collect_params(nets_.q2, "q2");
  tq1_params_ = nn::collect_params(nets_.target_q1, "target_q1");
  tq2_params_ = nn::collect_params(nets_.target_q2, "target_q2");
  alpha_params_.add("log_alpha", nets_.log_alpha);
  adam_policy_ = nn::Adam({cfg.lr}, policy_params_);
  adam_critic1_ = nn::Adam({cfg.lr}, q1_params_);
  adam_critic2_ = nn::Adam({cfg.lr}, q2_params_);
  adam_alpha_ = nn::Adam({cfg.lr}, alpha_params_);
}

TrainStepMetrics SacTrainer::train_step(const ReplayBuffer& buffer, Rng& rng,
                                        bool parallel) {
  TrainStepMetrics m;
  if (buffer.size() < static_cast<size_t>(cfg_.min_fill)) {
    m.skipped = true;
    m.step = steps_;
    m.alpha = nets_.alpha();
    return m;
  }

  const std::vector<size_t> idx =
      buffer.sample_indices(rng, static_cast<size_t>(cfg_.batch));
  std::vector<const Transition*> batch;
  batch.reserve(idx.size());
  for (size_t i : idx) batch.push_back(&buffer.at(i));

  // Critics.
  const std::vector<double> y =
      critic_targets(nets_, batch, cfg_.gamma, parallel, cfg_.grad_chunk);
  CriticGrads cg;
  cg.q1 = q1_params_;
  cg.q2 = q2_params_;
  cg.q1.zero_grads();
  cg.q2.zero_grads();
  m.j_q = critic_loss(nets_, batch, y, &cg, parallel, cfg_.grad_chunk);
  adam_critic1_.step(q1_params_);
  adam_critic2_.step(q2_params_);

  // Policy (uses the freshly updated critics, held constant).
  policy_params_.zero_grads();
  std::vector<std::vector<double>> log_probs;
  m.j_pi = policy_loss(nets_, batch, &policy_params_, &log_probs, parallel,
                       cfg_.grad_chunk);
  adam_policy_.step(policy_params_);

  // Temperature, from the distributions computed in the policy pass.
  double grad_log_alpha = 0.0;
  m.j_alpha = temperature_loss(log_probs, nets_.alpha(), target_entropy_,
                               &grad_log_alpha);
  alpha_params_.zero_grads();
  nets_.log_alpha.ensure_grad()[0] = grad_log_alpha;
  adam_alpha_.step(alpha_params_);

  steps_ += 1;
  if (steps_ % cfg_.target_update_period == 0) {
    tq1_params_.copy_values_from(q1_params_);
    tq2_params_.copy_values_from(q2_params_);
  }
  m.step = steps_;
  m.alpha = nets_.alpha();
  return m;
}

nn::Checkpoint SacTrainer::to_checkpoint(const std::string& extra_state_json) const {
  nn::Checkpoint ckpt;
  auto add_all = [&ckpt](const nn::ParamList& params) {
    nn::append_params(ckpt, params);
  };
  add_all(policy_params_);
  add_all(q1_params_);
  add_all(q2_params_);
  add_all(tq1_params_);
  add_all(tq2_params_);
  add_all(alpha_params_);
  auto add_moments = [&ckpt](const char* tag, const nn::Adam& adam,
                             const nn::ParamList& params) {
    nn::Adam& a = const_cast<nn::Adam&>(adam);
    for (size_t i = 0; i < params.size(); ++i) {
      const Tensor& t = params.items[i].second;
      nn::CkptTensor mt, vt;
      mt.name = std::string("adam.") + tag + ".m." + params.items[i].first;
      vt.name = std::string("adam.") + tag + ".v." + params.items[i].first;
      mt.rows = vt.rows = t.rows();
      mt.cols = vt.cols = t.cols();
      for (double x : a.moment_m()[i]) mt.data.push_back(static_cast<float>(x));
      for (double x : a.moment_v()[i]) vt.data.push_back(static_cast<float>(x));
      ckpt.tensors.push_back(std::move(mt));
      ckpt.tensors.push_back(std::move(vt));
    }
  };
  add_moments("policy", adam_policy_, policy_params_);
  add_moments("q1", adam_critic1_, q1_params_);
  add_moments("q2", adam_critic2_, q2_params_);
  add_moments("alpha", adam_alpha_, alpha_params_);
  ckpt.state_json = extra_state_json;
  return ckpt;
}

void SacTrainer::restore(const nn::Checkpoint& ckpt) {
  nn::load_params(ckpt, policy_params_);
  nn::load_params(ckpt, q1_params_);
  nn::load_params(ckpt, q2_params_);
  nn::load_params(ckpt, tq1_params_);
  nn::load_params(ckpt, tq2_params_);
  nn::load_params(ckpt, alpha_params_);
  auto load_moments = [&ckpt](const char* tag, nn::Adam& adam,
                              const nn::ParamList& params) {
    for (size_t i = 0; i < params.size(); ++i) {
      const std::string mn = std::string("adam.") + tag + ".m." + params.items[i].first;
      const std::string vn = std::string("adam.") + tag + ".v." + params.items[i].first;
      for (const nn::CkptTensor& t : ckpt.tensors) {
        if (t.name == mn) {
          auto& m = adam.moment_m()[i];
          for (size_t j = 0; j < m.size(); ++j) m[j] = t.data[j];
        } else if (t.name == vn) {
          auto& v = adam.moment_v()[i];
          for (size_t j = 0; j < v.size(); ++j) v[j] = t.data[j];
        }
      }
    }
  };
  load_moments("policy", adam_policy_, policy_params_);
  load_moments("q1", adam_critic1_, q1_params_);
  load_moments("q2", adam_critic2_, q2_params_);
  load_moments("alpha", adam_alpha_, alpha_params_);
}

std::vector<EpisodeSummary> collect_rollouts(
    const EnvConfig& env_cfg, const nn::PolicyNet& policy, ReplayBuffer* buffer,
    int n_instances, int episodes, uint64_t master_seed, uint64_t episode_base,
    bool greedy, std::vector<std::vector<Transition>>* transitions_out) {
  std::vector<EpisodeSummary> summaries(episodes);
  std::vector<std::vector<Transition>> slots(episodes);

  (void)n_instances;  // parallelism is bounded by the OpenMP thread pool
#pragma omp parallel for schedule(dynamic, 1)
  for (int e = 0; e < episodes; ++e) {
    const uint64_t ep_seed =
        derive_seed(master_seed, "episode", episode_base + static_cast<uint64_t>(e));
    EpisodeSummary& s = summaries[e];
    s.seed = ep_seed;
    try {
      ExploreEnv env(env_cfg);
      Observation obs = env.reset(ep_seed);
      Rng act_rng(derive_seed(ep_seed, "actions"));
      while (!env.done()) {
        const std::vector<double> probs = nn::policy_probs_nograd(policy, obs);
        int action = 0;
        if (greedy) {
          action = static_cast<int>(
              std::max_element(probs.begin(), probs.end()) - probs.begin());
        } else {
          const double u = act_rng.next_double();
          double acc = 0.0;
          for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc || i + 1 == probs.size()) {
              action = static_cast<int>(i);
              break;
            }
          }
        }
        StepResult res = env.step(action);
        Transition t;
        t.obs = std::move(obs);
        t.action = action;
        t.reward = res.reward;
        t.next_obs = res.obs;
        t.done = res.done && res.completed;
        slots[e].push_back(std::move(t));
        obs = std::move(res.obs);
        s.reward_sum += res.reward;
      }
      s.steps = env.steps();
      s.length = env.length();
      s.rate = env.rate();
      s.completed = env.completed();
    } catch (const EnvError&) {
      s.aborted = true;
      slots[e].clear();
    }
  }

  for (int e = 0; e < episodes; ++e) {
    if (summaries[e].aborted) continue;
    for (Transition& t : slots[e]) {
      if (buffer) buffer->push(t);
    }
  }
  if (transitions_out) *transitions_out = std::move(slots);
  return summaries;
}

}  // namespace ariadne
