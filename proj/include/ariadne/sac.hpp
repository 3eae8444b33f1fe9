#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ariadne/explore_env.hpp"
#include "ariadne/nets.hpp"
#include "ariadne/rng.hpp"

namespace ariadne {

struct SacConfig {
  double gamma = 1.0;
  int batch = 256;
  double lr = 1e-5;                    // policy and critics
  double target_entropy_scale = 0.01;  // H_bar = scale * ln(k)
  int target_update_period = 256;      // hard copy every N training steps
  int buffer_capacity = 10000;
  int min_fill = 2000;  // training starts once the buffer holds this many
  double init_alpha = 0.2;
  int instances = 32;  // parallel collection environments
  int grad_chunk = 8;  // samples per gradient chunk; fixes the reduction order

  double target_entropy(int k) const;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

  void push(Transition t) {
    buf_.push_back(std::move(t));
    if (buf_.size() > capacity_) buf_.pop_front();
  }
  size_t size() const { return buf_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return buf_[i]; }

  // Uniform without replacement; batch is clamped to the buffer size.
  std::vector<size_t> sample_indices(Rng& rng, size_t batch) const;

 private:
  size_t capacity_;
  std::deque<Transition> buf_;
};

// V(o) = sum_a pi(a) (Q(a) - alpha log pi(a)), with 0*log(0) = 0.
double soft_state_value(const std::vector<double>& q, const std::vector<double>& pi,
                        double alpha);

struct SacNets {
  nn::NetConfig cfg;
  nn::PolicyNet policy;
  nn::CriticNet q1, q2;
  nn::CriticNet target_q1, target_q2;
  nn::Tensor log_alpha;

  double alpha() const { return std::exp(log_alpha.item()); }
};

SacNets init_sac_nets(const nn::NetConfig& cfg, double init_alpha, uint64_t seed);

// Bellman target y = r + gamma * V_target(o') for each transition; V_target
// uses the elementwise minimum of the two target critics and the current
// policy. Terminal transitions use y = r.
std::vector<double> critic_targets(const SacNets& nets,
                                   const std::vector<const Transition*>& batch,
                                   double gamma, bool parallel = true,
                                   int chunk = 8);

// J_Q: mean over the batch of 1/2 (Q - y)^2 summed over both critics. When
// grads_into is non-null, parameter gradients (d J_Q / d phi) accumulate there
// in fixed chunk order (bit-identical for any thread count).
struct CriticGrads {
  nn::ParamList q1, q2;
};
double critic_loss(SacNets& nets, const std::vector<const Transition*>& batch,
                   const std::vector<double>& targets, CriticGrads* grads_into,
                   bool parallel = true, int chunk = 8);

// J_pi: mean over the batch of sum_a pi(a)(alpha log pi(a) - min Q(a)), critics
// held constant. Per-sample log-prob vectors are written to log_probs_out for
// the temperature update when non-null.
double policy_loss(SacNets& nets, const std::vector<const Transition*>& batch,
                   nn::ParamList* grads_into,
                   std::vector<std::vector<double>>* log_probs_out,
                   bool parallel = true, int chunk = 8);

// J(alpha) = mean_i E_a[-alpha (log pi(a|o_i) + H_bar)] over the given policy
// distributions; optionally returns dJ/d(log alpha).
double temperature_loss(const std::vector<std::vector<double>>& log_probs,
                        double alpha, double target_entropy,
                        double* grad_log_alpha = nullptr);

struct TrainStepMetrics {
  bool skipped = false;
  int64_t step = 0;
  double j_q = 0.0, j_pi = 0.0, j_alpha = 0.0, alpha = 0.0;
};

// One SAC iteration: a 256-sample batch, one Adam update each for the twin
// critics, the policy, and the temperature, and a hard target copy every
// target_update_period steps. No-op (skipped) while the buffer holds fewer
// than min_fill transitions.
class SacTrainer {
 public:
  SacTrainer(SacConfig cfg, nn::NetConfig net_cfg, int k_neighbors, uint64_t seed);

  TrainStepMetrics train_step(const ReplayBuffer& buffer, Rng& rng,
                              bool parallel = true);

  SacNets& nets() { return nets_; }
  const SacNets& nets() const { return nets_; }
  int64_t steps() const { return steps_; }
  const SacConfig& config() const { return cfg_; }
  double target_entropy() const { return target_entropy_; }

  // Checkpoint plumbing (parameters, optimizer moments, counters).
  nn::Checkpoint to_checkpoint(const std::string& extra_state_json) const;
  void restore(const nn::Checkpoint& ckpt);

 private:
  SacConfig cfg_;
  double target_entropy_ = 0.0;
  SacNets nets_;
  nn::ParamList policy_params_, q1_params_, q2_params_;
  nn::ParamList tq1_params_, tq2_params_, alpha_params_;
  nn::Adam adam_policy_, adam_critic1_, adam_critic2_, adam_alpha_;
  int64_t steps_ = 0;
};

struct EpisodeSummary {
  uint64_t seed = 0;
  int steps = 0;
  double reward_sum = 0.0;
  double length = 0.0;
  double rate = 0.0;
  bool completed = false;
  bool aborted = false;
};

// Runs `episodes` independent episodes (up to n_instances in flight), actions
// sampled from the policy (or argmax when greedy). Transitions are appended to
// the buffer in episode order; aborted episodes are dropped and flagged.
std::vector<EpisodeSummary> collect_rollouts(
    const EnvConfig& env_cfg, const nn::PolicyNet& policy, ReplayBuffer* buffer,
    int n_instances, int episodes, uint64_t master_seed, uint64_t episode_base,
    bool greedy, std::vector<std::vector<Transition>>* transitions_out = nullptr);

}  // namespace ariadne
