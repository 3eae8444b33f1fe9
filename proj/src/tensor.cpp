#include "ariadne/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "ariadne/rng.hpp"

namespace ariadne::nn {

namespace {

thread_local bool g_grad_enabled = true;

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::logic_error(std::string("non-finite value out of op ") + op);
    }
  }
}

Tensor make_result(int rows, int cols, std::vector<double> values, const char* op,
                   std::vector<Tensor> inputs,
                   std::function<void(TensorNode&)> backward_fn) {
  check_finite(values, op);
  auto node = std::make_shared<TensorNode>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::make_shared<std::vector<double>>(std::move(values));
  bool record = g_grad_enabled;
  if (record) {
    bool any = false;
    for (const Tensor& t : inputs) any = any || t.requires_grad();
    record = any;
  }
  if (record) {
    node->requires_grad = true;
    for (const Tensor& t : inputs) node->parents.push_back(t.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

void shape_check(bool ok, const char* op) {
  if (!ok) throw std::invalid_argument(std::string("shape mismatch in ") + op);
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev; }

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  return from(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0),
              requires_grad);
}

Tensor Tensor::from(int rows, int cols, std::vector<double> values, bool requires_grad) {
  if (static_cast<size_t>(rows) * cols != values.size())
    throw std::invalid_argument("Tensor::from: size mismatch");
  auto node = std::make_shared<TensorNode>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::make_shared<std::vector<double>>(std::move(values));
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::proxy() const {
  auto node = std::make_shared<TensorNode>();
  node->rows = rows();
  node->cols = cols();
  node->value = node_->value;  // shared storage
  node->requires_grad = node_->requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::clone_values() const {
  return from(rows(), cols(), values(), node_->requires_grad);
}

Tensor Tensor::detach() const {
  auto node = std::make_shared<TensorNode>();
  node->rows = rows();
  node->cols = cols();
  node->value = node_->value;
  node->requires_grad = false;
  return Tensor(std::move(node));
}

void Tensor::backward() const {
  if (size() != 1) throw std::invalid_argument("backward: root must be a scalar");
  if (!node_->requires_grad) throw std::invalid_argument("backward: root has no graph");

  // Iterative post-order topological sort.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      TensorNode* p = n->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  shape_check(a.cols() == b.rows(), "matmul");
  const int r = a.rows(), k = a.cols(), c = b.cols();
  std::vector<double> out(static_cast<size_t>(r) * c, 0.0);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  for (int i = 0; i < r; ++i) {
    double* po = out.data() + static_cast<size_t>(i) * c;
    const double* pai = pa + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double av = pai[kk];
      const double* pbk = pb + static_cast<size_t>(kk) * c;
      for (int j = 0; j < c; ++j) po[j] += av * pbk[j];
    }
  }
  return make_result(r, c, std::move(out), "matmul", {a, b}, [a, b](TensorNode& n) {
    const int r = a.rows(), k = a.cols(), c = b.cols();
    const double* g = n.grad.data();
    if (a.requires_grad()) {
      auto& ga = a.node()->ensure_grad();
      const double* pb = b.values().data();
      for (int i = 0; i < r; ++i) {
        for (int kk = 0; kk < k; ++kk) {
          double acc = 0.0;
          const double* gi = g + static_cast<size_t>(i) * c;
          const double* pbk = pb + static_cast<size_t>(kk) * c;
          for (int j = 0; j < c; ++j) acc += gi[j] * pbk[j];
          ga[static_cast<size_t>(i) * k + kk] += acc;
        }
      }
    }
    if (b.requires_grad()) {
      auto& gb = b.node()->ensure_grad();
      const double* pa = a.values().data();
      for (int i = 0; i < r; ++i) {
        const double* gi = g + static_cast<size_t>(i) * c;
        const double* pai = pa + static_cast<size_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
          const double av = pai[kk];
          double* gbk = gb.data() + static_cast<size_t>(kk) * c;
          for (int j = 0; j < c; ++j) gbk[j] += av * gi[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  const int r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<size_t>(j) * r + i] = a.values()[static_cast<size_t>(i) * c + j];
  return make_result(c, r, std::move(out), "transpose", {a}, [a](TensorNode& n) {
    if (!a.requires_grad()) return;
    auto& ga = a.node()->ensure_grad();
    const int r = a.rows(), c = a.cols();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        ga[static_cast<size_t>(i) * c + j] += n.grad[static_cast<size_t>(j) * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  shape_check(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_result(a.rows(), a.cols(), std::move(out), "add", {a, b},
                     [a, b](TensorNode& n) {
                       for (const Tensor& t : {a, b}) {
                         if (!t.requires_grad()) continue;
                         auto& g = t.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
                       }
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  shape_check(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_result(a.rows(), a.cols(), std::move(out), "sub", {a, b},
                     [a, b](TensorNode& n) {
                       if (a.requires_grad()) {
                         auto& g = a.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
                       }
                       if (b.requires_grad()) {
                         auto& g = b.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  shape_check(a.rows() == b.rows() && a.cols() == b.cols(), "mul");
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_result(a.rows(), a.cols(), std::move(out), "mul", {a, b},
                     [a, b](TensorNode& n) {
                       if (a.requires_grad()) {
                         auto& g = a.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i)
                           g[i] += n.grad[i] * b.values()[i];
                       }
                       if (b.requires_grad()) {
                         auto& g = b.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i)
                           g[i] += n.grad[i] * a.values()[i];
                       }
                     });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * s;
  return make_result(a.rows(), a.cols(), std::move(out), "scale", {a},
                     [a, s](TensorNode& n) {
                       if (!a.requires_grad()) return;
                       auto& g = a.node()->ensure_grad();
                       for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * s;
                     });
}

Tensor scale_by(const Tensor& a, const Tensor& s) {
  shape_check(s.size() == 1, "scale_by");
  const double sv = s.item();
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * sv;
  return make_result(a.rows(), a.cols(), std::move(out), "scale_by", {a, s},
                     [a, s](TensorNode& n) {
                       const double sv = s.item();
                       if (a.requires_grad()) {
                         auto& g = a.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * sv;
                       }
                       if (s.requires_grad()) {
                         double acc = 0.0;
                         for (size_t i = 0; i < n.grad.size(); ++i)
                           acc += n.grad[i] * a.values()[i];
                         s.node()->ensure_grad()[0] += acc;
                       }
                     });
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  shape_check(v.rows() == 1 && v.cols() == a.cols(), "add_rowvec");
  std::vector<double> out(a.size());
  const int c = a.cols();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<size_t>(i) * c + j] =
          a.values()[static_cast<size_t>(i) * c + j] + v.values()[j];
  return make_result(a.rows(), a.cols(), std::move(out), "add_rowvec", {a, v},
                     [a, v](TensorNode& n) {
                       const int c = a.cols();
                       if (a.requires_grad()) {
                         auto& g = a.node()->ensure_grad();
                         for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
                       }
                       if (v.requires_grad()) {
                         auto& g = v.node()->ensure_grad();
                         for (int i = 0; i < a.rows(); ++i)
                           for (int j = 0; j < c; ++j)
                             g[j] += n.grad[static_cast<size_t>(i) * c + j];
                       }
                     });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, a.values()[i]);
  return make_result(a.rows(), a.cols(), std::move(out), "relu", {a},
                     [a](TensorNode& n) {
                       if (!a.requires_grad()) return;
                       auto& g = a.node()->ensure_grad();
                       for (size_t i = 0; i < g.size(); ++i)
                         if (a.values()[i] > 0) g[i] += n.grad[i];
                     });
}

Tensor exp_elem(const Tensor& a) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a.values()[i]);
  Tensor res = make_result(a.rows(), a.cols(), std::move(out), "exp", {a}, nullptr);
  if (res.requires_grad()) {
    // Capture the value storage, not the tensor, to avoid an ownership cycle.
    std::shared_ptr<std::vector<double>> out_vals = res.node()->value;
    res.node()->backward_fn = [a, out_vals](TensorNode& n) {
      if (!a.requires_grad()) return;
      auto& g = a.node()->ensure_grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * (*out_vals)[i];
    };
  }
  return res;
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias) {
  shape_check(gain.rows() == 1 && gain.cols() == a.cols() && bias.rows() == 1 &&
                  bias.cols() == a.cols(),
              "layer_norm");
  constexpr double kEps = 1e-5;
  const int r = a.rows(), c = a.cols();
  auto xhat = std::make_shared<std::vector<double>>(a.size());
  auto inv_sigma = std::make_shared<std::vector<double>>(r);
  std::vector<double> out(a.size());
  for (int i = 0; i < r; ++i) {
    const double* row = a.values().data() + static_cast<size_t>(i) * c;
    double mean = 0.0;
    for (int j = 0; j < c; ++j) mean += row[j];
    mean /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= c;
    const double inv = 1.0 / std::sqrt(var + kEps);
    (*inv_sigma)[i] = inv;
    for (int j = 0; j < c; ++j) {
      const double xh = (row[j] - mean) * inv;
      (*xhat)[static_cast<size_t>(i) * c + j] = xh;
      out[static_cast<size_t>(i) * c + j] = gain.values()[j] * xh + bias.values()[j];
    }
  }
  return make_result(
      r, c, std::move(out), "layer_norm", {a, gain, bias},
      [a, gain, bias, xhat, inv_sigma](TensorNode& n) {
        const int r = a.rows(), c = a.cols();
        for (int i = 0; i < r; ++i) {
          const double* gy = n.grad.data() + static_cast<size_t>(i) * c;
          const double* xh = xhat->data() + static_cast<size_t>(i) * c;
          if (gain.requires_grad()) {
            auto& gg = gain.node()->ensure_grad();
            for (int j = 0; j < c; ++j) gg[j] += gy[j] * xh[j];
          }
          if (bias.requires_grad()) {
            auto& gb = bias.node()->ensure_grad();
            for (int j = 0; j < c; ++j) gb[j] += gy[j];
          }
          if (a.requires_grad()) {
            double m1 = 0.0, m2 = 0.0;  // means of dxhat and dxhat*xhat
            for (int j = 0; j < c; ++j) {
              const double dxh = gy[j] * gain.values()[j];
              m1 += dxh;
              m2 += dxh * xh[j];
            }
            m1 /= c;
            m2 /= c;
            auto& ga = a.node()->ensure_grad();
            for (int j = 0; j < c; ++j) {
              const double dxh = gy[j] * gain.values()[j];
              ga[static_cast<size_t>(i) * c + j] +=
                  (*inv_sigma)[i] * (dxh - m1 - xh[j] * m2);
            }
          }
        }
      });
}

Tensor masked_softmax_rows(const Tensor& a, const std::vector<uint8_t>* mask) {
  const int r = a.rows(), c = a.cols();
  if (mask && static_cast<int>(mask->size()) != r * c)
    throw std::invalid_argument("masked_softmax_rows: mask size mismatch");
  std::vector<double> out(a.size(), 0.0);
  for (int i = 0; i < r; ++i) {
    const double* row = a.values().data() + static_cast<size_t>(i) * c;
    const uint8_t* mrow = mask ? mask->data() + static_cast<size_t>(i) * c : nullptr;
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < c; ++j)
      if (!mrow || !mrow[j]) mx = std::max(mx, row[j]);
    if (!std::isfinite(mx))
      throw std::invalid_argument("masked_softmax_rows: fully masked row");
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      if (mrow && mrow[j]) continue;
      const double e = std::exp(row[j] - mx);
      out[static_cast<size_t>(i) * c + j] = e;
      sum += e;
    }
    for (int j = 0; j < c; ++j) out[static_cast<size_t>(i) * c + j] /= sum;
  }
  auto mask_copy = mask ? std::make_shared<std::vector<uint8_t>>(*mask) : nullptr;
  Tensor res = make_result(r, c, std::move(out), "masked_softmax_rows", {a}, nullptr);
  if (res.requires_grad()) {
    std::shared_ptr<std::vector<double>> out_vals = res.node()->value;
    res.node()->backward_fn = [a, out_vals, mask_copy](TensorNode& n) {
      if (!a.requires_grad()) return;
      const int r = a.rows(), c = a.cols();
      auto& ga = a.node()->ensure_grad();
      for (int i = 0; i < r; ++i) {
        const double* w = out_vals->data() + static_cast<size_t>(i) * c;
        const double* gw = n.grad.data() + static_cast<size_t>(i) * c;
        double dot = 0.0;
        for (int j = 0; j < c; ++j) dot += gw[j] * w[j];
        for (int j = 0; j < c; ++j) {
          if (mask_copy && (*mask_copy)[static_cast<size_t>(i) * c + j]) continue;
          ga[static_cast<size_t>(i) * c + j] += w[j] * (gw[j] - dot);
        }
      }
    };
  }
  return res;
}

Tensor log_softmax_rows(const Tensor& a) {
  const int r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (int i = 0; i < r; ++i) {
    const double* row = a.values().data() + static_cast<size_t>(i) * c;
    double mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
    const double lse = mx + std::log(sum);
    for (int j = 0; j < c; ++j) out[static_cast<size_t>(i) * c + j] = row[j] - lse;
  }
  Tensor res = make_result(r, c, std::move(out), "log_softmax_rows", {a}, nullptr);
  if (res.requires_grad()) {
    std::shared_ptr<std::vector<double>> out_vals = res.node()->value;
    res.node()->backward_fn = [a, out_vals](TensorNode& n) {
      if (!a.requires_grad()) return;
      const int r = a.rows(), c = a.cols();
      auto& ga = a.node()->ensure_grad();
      for (int i = 0; i < r; ++i) {
        const double* y = out_vals->data() + static_cast<size_t>(i) * c;
        const double* gy = n.grad.data() + static_cast<size_t>(i) * c;
        double gsum = 0.0;
        for (int j = 0; j < c; ++j) gsum += gy[j];
        for (int j = 0; j < c; ++j)
          ga[static_cast<size_t>(i) * c + j] += gy[j] - std::exp(y[j]) * gsum;
      }
    };
  }
  return res;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  shape_check(a.rows() == b.rows(), "concat_cols");
  const int r = a.rows(), ca = a.cols(), cb = b.cols();
  std::vector<double> out(static_cast<size_t>(r) * (ca + cb));
  for (int i = 0; i < r; ++i) {
    std::copy_n(a.values().data() + static_cast<size_t>(i) * ca, ca,
                out.data() + static_cast<size_t>(i) * (ca + cb));
    std::copy_n(b.values().data() + static_cast<size_t>(i) * cb, cb,
                out.data() + static_cast<size_t>(i) * (ca + cb) + ca);
  }
  return make_result(r, ca + cb, std::move(out), "concat_cols", {a, b},
                     [a, b](TensorNode& n) {
                       const int r = a.rows(), ca = a.cols(), cb = b.cols();
                       if (a.requires_grad()) {
                         auto& g = a.node()->ensure_grad();
                         for (int i = 0; i < r; ++i)
                           for (int j = 0; j < ca; ++j)
                             g[static_cast<size_t>(i) * ca + j] +=
                                 n.grad[static_cast<size_t>(i) * (ca + cb) + j];
                       }
                       if (b.requires_grad()) {
                         auto& g = b.node()->ensure_grad();
                         for (int i = 0; i < r; ++i)
                           for (int j = 0; j < cb; ++j)
                             g[static_cast<size_t>(i) * cb + j] +=
                                 n.grad[static_cast<size_t>(i) * (ca + cb) + ca + j];
                       }
                     });
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
  shape_check(0 <= c0 && c0 < c1 && c1 <= a.cols(), "slice_cols");
  const int r = a.rows(), c = a.cols(), w = c1 - c0;
  std::vector<double> out(static_cast<size_t>(r) * w);
  for (int i = 0; i < r; ++i)
    std::copy_n(a.values().data() + static_cast<size_t>(i) * c + c0, w,
                out.data() + static_cast<size_t>(i) * w);
  return make_result(r, w, std::move(out), "slice_cols", {a},
                     [a, c0, w](TensorNode& n) {
                       if (!a.requires_grad()) return;
                       auto& g = a.node()->ensure_grad();
                       const int r = a.rows(), c = a.cols();
                       for (int i = 0; i < r; ++i)
                         for (int j = 0; j < w; ++j)
                           g[static_cast<size_t>(i) * c + c0 + j] +=
                               n.grad[static_cast<size_t>(i) * w + j];
                     });
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& rows) {
  const int c = a.cols();
  std::vector<double> out(rows.size() * static_cast<size_t>(c));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows())
      throw std::invalid_argument("gather_rows: index out of range");
    std::copy_n(a.values().data() + static_cast<size_t>(rows[i]) * c, c,
                out.data() + i * c);
  }
  return make_result(static_cast<int>(rows.size()), c, std::move(out), "gather_rows",
                     {a}, [a, rows](TensorNode& n) {
                       if (!a.requires_grad()) return;
                       auto& g = a.node()->ensure_grad();
                       const int c = a.cols();
                       for (size_t i = 0; i < rows.size(); ++i)
                         for (int j = 0; j < c; ++j)
                           g[static_cast<size_t>(rows[i]) * c + j] +=
                               n.grad[i * c + j];
                     });
}

Tensor tile_rows(const Tensor& a, int copies) {
  shape_check(a.rows() == 1 && copies >= 1, "tile_rows");
  const int c = a.cols();
  std::vector<double> out(static_cast<size_t>(copies) * c);
  for (int i = 0; i < copies; ++i)
    std::copy_n(a.values().data(), c, out.data() + static_cast<size_t>(i) * c);
  return make_result(copies, c, std::move(out), "tile_rows", {a},
                     [a, copies](TensorNode& n) {
                       if (!a.requires_grad()) return;
                       auto& g = a.node()->ensure_grad();
                       const int c = a.cols();
                       for (int i = 0; i < copies; ++i)
                         for (int j = 0; j < c; ++j)
                           g[j] += n.grad[static_cast<size_t>(i) * c + j];
                     });
}

Tensor sum_all(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result(1, 1, {s}, "sum_all", {a}, [a](TensorNode& n) {
    if (!a.requires_grad()) return;
    auto& g = a.node()->ensure_grad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0];
  });
}

void ParamList::zero_grads() {
  for (auto& [name, t] : items) t.zero_grad();
}

void ParamList::accumulate_grads(const ParamList& src) {
  if (src.items.size() != items.size())
    throw std::invalid_argument("accumulate_grads: param count mismatch");
  for (size_t i = 0; i < items.size(); ++i) {
    auto& dst = items[i].second.ensure_grad();
    const auto& g = src.items[i].second.grad();
    if (g.empty()) continue;
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += g[j];
  }
}

void ParamList::copy_values_from(const ParamList& src) {
  if (src.items.size() != items.size())
    throw std::invalid_argument("copy_values_from: param count mismatch");
  for (size_t i = 0; i < items.size(); ++i)
    items[i].second.values() = src.items[i].second.values();
}

Adam::Adam(AdamConfig cfg, const ParamList& params) : config(cfg) {
  m_.resize(params.size());
  v_.resize(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i].assign(params.items[i].second.size(), 0.0);
    v_[i].assign(params.items[i].second.size(), 0.0);
  }
}

void Adam::step(ParamList& params) {
  t_ += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.items[i].second;
    const auto& g = p.grad();
    if (g.empty()) continue;
    auto& vals = p.values();
    for (size_t j = 0; j < vals.size(); ++j) {
      m_[i][j] = config.beta1 * m_[i][j] + (1.0 - config.beta1) * g[j];
      v_[i][j] = config.beta2 * v_[i][j] + (1.0 - config.beta2) * g[j] * g[j];
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      vals[j] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

double gradient_check(const std::function<Tensor()>& loss, ParamList& params, double h) {
  params.zero_grads();
  Tensor l0 = loss();
  l0.backward();

  double max_rel = 0.0;
  for (auto& [name, t] : params.items) {
    auto& vals = t.values();
    const auto& g = t.grad();
    for (size_t j = 0; j < vals.size(); ++j) {
      const double keep = vals[j];
      vals[j] = keep + h;
      double fp;
      {
        NoGradGuard ng;
        fp = loss().item();
      }
      vals[j] = keep - h;
      double fm;
      {
        NoGradGuard ng;
        fm = loss().item();
      }
      vals[j] = keep;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = g.empty() ? 0.0 : g[j];
      const double denom = std::max({1e-6, std::abs(fd), std::abs(an)});
      max_rel = std::max(max_rel, std::abs(fd - an) / denom);
    }
  }
  return max_rel;
}

Tensor uniform_init(int rows, int cols, int fan_in, uint64_t seed) {
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  std::vector<double> vals(static_cast<size_t>(rows) * cols);
  for (double& v : vals) v = rng.next_double(-bound, bound);
  return Tensor::from(rows, cols, std::move(vals), true);
}

}  // namespace ariadne::nn
