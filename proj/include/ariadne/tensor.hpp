#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ariadne::nn {

// Reverse-mode autodiff over dense 2D double tensors. Graphs are built
// per-sample (no padding across samples); leaves can share value storage
// between threads via proxies so gradient chunks reduce deterministically.
struct TensorNode {
  int rows = 0, cols = 0;
  std::shared_ptr<std::vector<double>> value;
  std::vector<double> grad;  // empty until touched by backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  size_t size() const { return static_cast<size_t>(rows) * cols; }
  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(size(), 0.0);
    return grad;
  }
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor from(int rows, int cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v) { return from(1, 1, {v}); }

  bool defined() const { return node_ != nullptr; }
  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  size_t size() const { return node_->size(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  const std::vector<double>& values() const { return *node_->value; }
  std::vector<double>& values() { return *node_->value; }
  double at(int i, int j) const { return (*node_->value)[static_cast<size_t>(i) * cols() + j]; }
  double item() const { return (*node_->value)[0]; }
  const std::vector<double>& grad() const { return node_->grad; }
  std::vector<double>& ensure_grad() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.assign(node_->size(), 0.0); }

  // Leaf sharing this tensor's value storage with its own gradient buffer.
  Tensor proxy() const;
  // Deep value copy (fresh storage, no graph history).
  Tensor clone_values() const;
  // Detached view of the same values (constant, no graph history).
  Tensor detach() const;

  // Runs reverse-mode accumulation from this 1x1 scalar.
  void backward() const;

  std::shared_ptr<TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<TensorNode> node_;
};

// Thread-local gradient-recording mode (on by default).
bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  bool prev;
};

// All ops validate shapes and assert finite outputs.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double s);
Tensor scale_by(const Tensor& a, const Tensor& s);  // s is 1x1
Tensor add_rowvec(const Tensor& a, const Tensor& v);  // v is 1 x cols
Tensor relu(const Tensor& a);
Tensor exp_elem(const Tensor& a);
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias);
// mask: rows*cols bytes, nonzero = attention blocked. Throws if a row is
// fully blocked. Blocked weights are exactly zero and carry zero gradient.
Tensor masked_softmax_rows(const Tensor& a, const std::vector<uint8_t>* mask);
Tensor log_softmax_rows(const Tensor& a);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, int c0, int c1);
Tensor gather_rows(const Tensor& a, const std::vector<int>& rows);
Tensor tile_rows(const Tensor& a, int copies);  // a is 1 x cols
Tensor sum_all(const Tensor& a);  // 1x1

// Named parameters in a fixed order; the unit of checkpointing, optimizer
// state, and gradient reduction.
struct ParamList {
  std::vector<std::pair<std::string, Tensor>> items;

  void add(const std::string& name, Tensor t) { items.emplace_back(name, std::move(t)); }
  size_t size() const { return items.size(); }
  void zero_grads();
  // Adds src grads (chunk reduction); shapes must match.
  void accumulate_grads(const ParamList& src);
  void copy_values_from(const ParamList& src);
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig cfg, const ParamList& params);
  void step(ParamList& params);
  int64_t steps() const { return t_; }

  AdamConfig config;
  // Exposed for checkpointing.
  std::vector<std::vector<double>>& moment_m() { return m_; }
  std::vector<std::vector<double>>& moment_v() { return v_; }
  void set_steps(int64_t t) { t_ = t; }

 private:
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Max relative error between reverse-mode gradients and central finite
// differences (step h) of `loss` over every element of `params`.
double gradient_check(const std::function<Tensor()>& loss, ParamList& params,
                      double h = 1e-5);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization, deterministic in seed.
Tensor uniform_init(int rows, int cols, int fan_in, uint64_t seed);

}  // namespace ariadne::nn
