// Copyright 2026 The ConceptLM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clm/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "clm/common/error.hpp"
#include "kernels.hpp"

namespace clm::nn {
namespace {

template <typename T>
using BackwardFn = std::function<void(Node<T>&)>;

template <typename T>
bool should_record(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const Tensor<T>* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
void check_finite(const std::vector<T>& values, const char* op) {
  for (T v : values) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::kNumericalError, std::string("non-finite value produced by ") + op);
    }
  }
}

// Wraps a freshly computed value into a tensor, attaching the backward
// closure when any input participates in autodiff.
template <typename T>
Tensor<T> finish(const char* op, Shape shape, std::vector<T> value,
                 std::initializer_list<const Tensor<T>*> inputs, BackwardFn<T> fn) {
  if (debug_checks()) check_finite(value, op);
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (should_record<T>(inputs)) {
    node->requires_grad = true;
    for (const Tensor<T>* t : inputs) {
      if (t->defined() && t->requires_grad()) node->parents.push_back(t->node());
    }
    node->backward_fn = std::move(fn);
  }
  return Tensor<T>(std::move(node));
}

// Grad buffer of an input, or nullptr when it does not take gradients.
template <typename T>
T* grad_of(const std::shared_ptr<Node<T>>& node) {
  if (!node || !node->requires_grad) return nullptr;
  return node->ensure_grad().data();
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (!a.defined() || !b.defined()) fail(ErrorCode::kShapeError, std::string(op) + ": undefined input");
  if (a.shape() != b.shape()) {
    fail(ErrorCode::kShapeError, std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                                     " vs " + shape_string(b.shape()));
  }
}

template <typename T>
void require_matrix(const Tensor<T>& a, const char* op) {
  if (!a.defined()) fail(ErrorCode::kShapeError, std::string(op) + ": undefined input");
  if (a.rank() > 2) {
    fail(ErrorCode::kShapeError, std::string(op) + ": expected rank <= 2, got " + shape_string(a.shape()));
  }
}

Shape row_shape(const Tensor<float>& like, std::size_t m, std::size_t n) {
  return like.rank() == 1 ? Shape{n} : Shape{m, n};
}
Shape row_shape(const Tensor<double>& like, std::size_t m, std::size_t n) {
  return like.rank() == 1 ? Shape{n} : Shape{m, n};
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    fail(ErrorCode::kShapeError, "matmul: inner dimensions differ " + shape_string(a.shape()) +
                                     " x " + shape_string(b.shape()));
  }
  std::vector<T> out(m * n, T(0));
  kernels::gemm_acc(m, k, n, a.data().data(), b.data().data(), out.data());
  auto an = a.node();
  auto bn = b.node();
  return finish<T>("matmul", row_shape(a, m, n), std::move(out), {&a, &b},
                   [an, bn, m, k, n](Node<T>& self) {
                     const T* dy = self.grad.data();
                     if (T* da = grad_of(an)) {
                       std::vector<T> bt(n * k);
                       kernels::transpose(k, n, bn->value.data(), bt.data());
                       kernels::gemm_acc(m, n, k, dy, bt.data(), da);
                     }
                     if (T* db = grad_of(bn)) kernels::gemm_tn_acc(m, k, n, an->value.data(), dy, db);
                   });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  require_matrix(x, "linear");
  if (!w.defined() || w.rank() != 2) fail(ErrorCode::kShapeError, "linear: weight must be [in, out]");
  const std::size_t m = x.rows(), in = x.cols(), out_dim = w.cols();
  if (w.rows() != in) {
    fail(ErrorCode::kShapeError, "linear: input " + shape_string(x.shape()) + " vs weight " +
                                     shape_string(w.shape()));
  }
  if (bias.defined() && bias.numel() != out_dim) fail(ErrorCode::kShapeError, "linear: bias size mismatch");
  std::vector<T> out(m * out_dim, T(0));
  if (bias.defined()) {
    const T* b = bias.data().data();
    for (std::size_t i = 0; i < m; ++i) std::copy(b, b + out_dim, out.begin() + i * out_dim);
  }
  kernels::gemm_acc(m, in, out_dim, x.data().data(), w.data().data(), out.data());
  auto xn = x.node();
  auto wn = w.node();
  auto bn = bias.node();
  return finish<T>("linear", row_shape(x, m, out_dim), std::move(out), {&x, &w, &bias},
                   [xn, wn, bn, m, in, out_dim](Node<T>& self) {
                     const T* dy = self.grad.data();
                     if (T* dx = grad_of(xn)) {
                       std::vector<T> wt(out_dim * in);
                       kernels::transpose(in, out_dim, wn->value.data(), wt.data());
                       kernels::gemm_acc(m, out_dim, in, dy, wt.data(), dx);
                     }
                     if (T* dw = grad_of(wn)) kernels::gemm_tn_acc(m, in, out_dim, xn->value.data(), dy, dw);
                     if (T* db = grad_of(bn)) {
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t j = 0; j < out_dim; ++j) db[j] += dy[i * out_dim + j];
                       }
                     }
                   });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  auto an = a.node();
  auto bn = b.node();
  return finish<T>("add", a.shape(), std::move(out), {&a, &b}, [an, bn](Node<T>& self) {
    const std::size_t n = self.grad.size();
    if (T* da = grad_of(an)) for (std::size_t i = 0; i < n; ++i) da[i] += self.grad[i];
    if (T* db = grad_of(bn)) for (std::size_t i = 0; i < n; ++i) db[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  auto an = a.node();
  auto bn = b.node();
  return finish<T>("sub", a.shape(), std::move(out), {&a, &b}, [an, bn](Node<T>& self) {
    const std::size_t n = self.grad.size();
    if (T* da = grad_of(an)) for (std::size_t i = 0; i < n; ++i) da[i] += self.grad[i];
    if (T* db = grad_of(bn)) for (std::size_t i = 0; i < n; ++i) db[i] -= self.grad[i];
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  auto an = a.node();
  auto bn = b.node();
  return finish<T>("mul", a.shape(), std::move(out), {&a, &b}, [an, bn](Node<T>& self) {
    const std::size_t n = self.grad.size();
    if (T* da = grad_of(an)) for (std::size_t i = 0; i < n; ++i) da[i] += self.grad[i] * bn->value[i];
    if (T* db = grad_of(bn)) for (std::size_t i = 0; i < n; ++i) db[i] += self.grad[i] * an->value[i];
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  if (!a.defined()) fail(ErrorCode::kShapeError, "scale: undefined input");
  std::vector<T> out(a.numel());
  const auto av = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  auto an = a.node();
  return finish<T>("scale", a.shape(), std::move(out), {&a}, [an, factor](Node<T>& self) {
    T* da = grad_of(an);
    for (std::size_t i = 0; i < self.grad.size(); ++i) da[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& row) {
  require_matrix(a, "add_rowvec");
  const std::size_t m = a.rows(), n = a.cols();
  if (!row.defined() || row.numel() != n) fail(ErrorCode::kShapeError, "add_rowvec: row size mismatch");
  std::vector<T> out(a.numel());
  const auto av = a.data();
  const auto rv = row.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + rv[j];
  }
  auto an = a.node();
  auto rn = row.node();
  return finish<T>("add_rowvec", a.shape(), std::move(out), {&a, &row}, [an, rn, m, n](Node<T>& self) {
    const T* dy = self.grad.data();
    if (T* da = grad_of(an)) for (std::size_t i = 0; i < m * n; ++i) da[i] += dy[i];
    if (T* dr = grad_of(rn)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) dr[j] += dy[i * n + j];
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.rows(), n = x.cols();
  if (gamma.defined() != beta.defined()) fail(ErrorCode::kShapeError, "layer_norm: gamma/beta must both be set");
  if (gamma.defined() && (gamma.numel() != n || beta.numel() != n)) {
    fail(ErrorCode::kShapeError, "layer_norm: affine size mismatch");
  }
  auto xhat = std::make_shared<std::vector<T>>(m * n);
  auto rstd = std::make_shared<std::vector<T>>(m);
  std::vector<T> out(m * n);
  const auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = xv.data() + i * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = row[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const T r = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    (*rstd)[i] = r;
    for (std::size_t j = 0; j < n; ++j) {
      const T h = static_cast<T>(row[j] - mu) * r;
      (*xhat)[i * n + j] = h;
      out[i * n + j] = gamma.defined() ? h * gamma.data()[j] + beta.data()[j] : h;
    }
  }
  auto xn = x.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  return finish<T>("layer_norm", x.shape(), std::move(out), {&x, &gamma, &beta},
                   [xn, gn, bn, xhat, rstd, m, n](Node<T>& self) {
                     const T* dy = self.grad.data();
                     T* dx = grad_of(xn);
                     T* dg = grad_of(gn);
                     T* db = grad_of(bn);
                     std::vector<T> g(n);
                     for (std::size_t i = 0; i < m; ++i) {
                       const T* dyr = dy + i * n;
                       const T* hr = xhat->data() + i * n;
                       if (dg) for (std::size_t j = 0; j < n; ++j) dg[j] += dyr[j] * hr[j];
                       if (db) for (std::size_t j = 0; j < n; ++j) db[j] += dyr[j];
                       if (!dx) continue;
                       T mean_g = T(0), mean_gh = T(0);
                       for (std::size_t j = 0; j < n; ++j) {
                         g[j] = gn ? dyr[j] * gn->value[j] : dyr[j];
                         mean_g += g[j];
                         mean_gh += g[j] * hr[j];
                       }
                       mean_g /= static_cast<T>(n);
                       mean_gh /= static_cast<T>(n);
                       const T r = (*rstd)[i];
                       for (std::size_t j = 0; j < n; ++j) {
                         dx[i * n + j] += r * (g[j] - mean_g - hr[j] * mean_gh);
                       }
                     }
                   });
}

template <typename T>
Tensor<T> modulate(const Tensor<T>& x, const Tensor<T>& shift, const Tensor<T>& scale_t) {
  require_same_shape(x, shift, "modulate");
  require_same_shape(x, scale_t, "modulate");
  std::vector<T> out(x.numel());
  const auto xv = x.data();
  const auto sh = shift.data();
  const auto sc = scale_t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * (T(1) + sc[i]) + sh[i];
  auto xn = x.node();
  auto shn = shift.node();
  auto scn = scale_t.node();
  return finish<T>("modulate", x.shape(), std::move(out), {&x, &shift, &scale_t},
                   [xn, shn, scn](Node<T>& self) {
                     const std::size_t n = self.grad.size();
                     const T* dy = self.grad.data();
                     if (T* dx = grad_of(xn)) {
                       for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * (T(1) + scn->value[i]);
                     }
                     if (T* dsh = grad_of(shn)) for (std::size_t i = 0; i < n; ++i) dsh[i] += dy[i];
                     if (T* dsc = grad_of(scn)) {
                       for (std::size_t i = 0; i < n; ++i) dsc[i] += dy[i] * xn->value[i];
                     }
                   });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  if (!x.defined()) fail(ErrorCode::kShapeError, "gelu: undefined input");
  constexpr T kC = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
  constexpr T kA = static_cast<T>(0.044715);
  std::vector<T> out(x.numel());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = xv[i];
    out[i] = T(0.5) * v * (T(1) + std::tanh(kC * (v + kA * v * v * v)));
  }
  auto xn = x.node();
  return finish<T>("gelu", x.shape(), std::move(out), {&x}, [xn](Node<T>& self) {
    T* dx = grad_of(xn);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T v = xn->value[i];
      const T th = std::tanh(kC * (v + kA * v * v * v));
      const T d = T(0.5) * (T(1) + th) + T(0.5) * v * (T(1) - th * th) * kC * (T(1) + T(3) * kA * v * v);
      dx[i] += self.grad[i] * d;
    }
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  require_matrix(x, "softmax");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<T> out(m * n);
  const auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = xv.data() + i * n;
    T* o = out.data() + i * n;
    const T mx = *std::max_element(row, row + n);
    T total = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(row[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  auto xn = x.node();
  return finish<T>("softmax", x.shape(), std::move(out), {&x}, [xn, m, n](Node<T>& self) {
    T* dx = grad_of(xn);
    for (std::size_t i = 0; i < m; ++i) {
      const T* y = self.value.data() + i * n;
      const T* dy = self.grad.data() + i * n;
      const T s = kernels::dot(n, y, dy);
      for (std::size_t j = 0; j < n; ++j) dx[i * n + j] += y[j] * (dy[j] - s);
    }
  });
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, std::size_t heads,
                    const std::vector<std::size_t>& key_limits) {
  require_matrix(q, "attention");
  require_matrix(k, "attention");
  require_same_shape(k, v, "attention");
  const std::size_t m = q.rows(), n = k.rows(), dim = q.cols();
  if (k.cols() != dim) fail(ErrorCode::kShapeError, "attention: query/key width mismatch");
  if (heads == 0 || dim % heads != 0) fail(ErrorCode::kShapeError, "attention: width not divisible by heads");
  if (key_limits.size() != m) fail(ErrorCode::kShapeError, "attention: one key limit per query row required");
  for (std::size_t lim : key_limits) {
    if (lim == 0 || lim > n) fail(ErrorCode::kShapeError, "attention: key limit out of range");
  }
  const std::size_t dh = dim / heads;
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  // probs[(h * m + i) * n + j]
  auto probs = std::make_shared<std::vector<T>>(heads * m * n, T(0));
  std::vector<T> out(m * dim, T(0));
  const T* qv = q.data().data();
  const T* kv = k.data().data();
  const T* vv = v.data().data();
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dh;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t lim = key_limits[i];
      T* p = probs->data() + (h * m + i) * n;
      const T* qi = qv + i * dim + off;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < lim; ++j) {
        p[j] = kernels::dot(dh, qi, kv + j * dim + off) * inv_sqrt;
        mx = std::max(mx, p[j]);
      }
      T total = T(0);
      for (std::size_t j = 0; j < lim; ++j) {
        p[j] = std::exp(p[j] - mx);
        total += p[j];
      }
      T* oi = out.data() + i * dim + off;
      for (std::size_t j = 0; j < lim; ++j) {
        p[j] /= total;
        const T* vj = vv + j * dim + off;
        for (std::size_t d = 0; d < dh; ++d) oi[d] += p[j] * vj[d];
      }
    }
  }
  auto qn = q.node();
  auto kn = k.node();
  auto vn = v.node();
  return finish<T>(
      "attention", Shape{m, dim}, std::move(out), {&q, &k, &v},
      [qn, kn, vn, probs, key_limits, heads, m, n, dim, dh, inv_sqrt](Node<T>& self) {
        T* dq = grad_of(qn);
        T* dk = grad_of(kn);
        T* dv = grad_of(vn);
        const T* qv = qn->value.data();
        const T* kv = kn->value.data();
        const T* vv = vn->value.data();
        std::vector<T> ds(n);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t off = h * dh;
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t lim = key_limits[i];
            const T* p = probs->data() + (h * m + i) * n;
            const T* doi = self.grad.data() + i * dim + off;
            T weighted = T(0);
            for (std::size_t j = 0; j < lim; ++j) {
              ds[j] = kernels::dot(dh, doi, vv + j * dim + off);
              weighted += p[j] * ds[j];
            }
            for (std::size_t j = 0; j < lim; ++j) {
              const T g = p[j] * (ds[j] - weighted) * inv_sqrt;
              if (dq) {
                T* dqi = dq + i * dim + off;
                const T* kj = kv + j * dim + off;
                for (std::size_t d = 0; d < dh; ++d) dqi[d] += g * kj[d];
              }
              if (dk) {
                T* dkj = dk + j * dim + off;
                const T* qi = qv + i * dim + off;
                for (std::size_t d = 0; d < dh; ++d) dkj[d] += g * qi[d];
              }
              if (dv) {
                T* dvj = dv + j * dim + off;
                for (std::size_t d = 0; d < dh; ++d) dvj[d] += p[j] * doi[d];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> mse(const Tensor<T>& pred, const Tensor<T>& target) {
  if (!pred.defined() || !target.defined() || pred.numel() != target.numel()) {
    fail(ErrorCode::kShapeError, "mse: prediction and target sizes differ");
  }
  const auto pv = pred.data();
  const auto tv = target.data();
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = static_cast<double>(pv[i]) - static_cast<double>(tv[i]);
    total += d * d;
  }
  const std::size_t count = pv.size();
  auto pn = pred.node();
  auto tn = target.node();
  return finish<T>("mse", Shape{1}, {static_cast<T>(total / static_cast<double>(count))}, {&pred, &target},
                   [pn, tn, count](Node<T>& self) {
                     const T c = self.grad[0] * T(2) / static_cast<T>(count);
                     T* dp = grad_of(pn);
                     T* dt = grad_of(tn);
                     for (std::size_t i = 0; i < count; ++i) {
                       const T d = pn->value[i] - tn->value[i];
                       if (dp) dp[i] += c * d;
                       if (dt) dt[i] -= c * d;
                     }
                   });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<std::size_t>& rows) {
  require_matrix(table, "gather_rows");
  const std::size_t r = table.rows(), n = table.cols();
  if (rows.empty()) fail(ErrorCode::kShapeError, "gather_rows: no rows requested");
  std::vector<T> out(rows.size() * n);
  const auto tv = table.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= r) fail(ErrorCode::kShapeError, "gather_rows: row index out of range");
    std::copy_n(tv.begin() + rows[i] * n, n, out.begin() + i * n);
  }
  auto tn = table.node();
  return finish<T>("gather_rows", Shape{rows.size(), n}, std::move(out), {&table},
                   [tn, rows, n](Node<T>& self) {
                     T* dt = grad_of(tn);
                     for (std::size_t i = 0; i < rows.size(); ++i) {
                       for (std::size_t j = 0; j < n; ++j) dt[rows[i] * n + j] += self.grad[i * n + j];
                     }
                   });
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) fail(ErrorCode::kShapeError, "concat_rows: no inputs");
  const std::size_t n = parts.front().cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_rows");
    if (p.cols() != n) fail(ErrorCode::kShapeError, "concat_rows: column count mismatch");
    total += p.rows();
  }
  std::vector<T> out;
  out.reserve(total * n);
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());

  const bool record = grad_enabled() && std::any_of(parts.begin(), parts.end(),
                                                    [](const Tensor<T>& p) { return p.requires_grad(); });
  if (debug_checks()) check_finite(out, "concat_rows");
  auto node = std::make_shared<Node<T>>();
  node->shape = Shape{total, n};
  node->value = std::move(out);
  if (record) {
    node->requires_grad = true;
    std::vector<std::shared_ptr<Node<T>>> inputs;
    for (const auto& p : parts) {
      inputs.push_back(p.node());
      if (p.requires_grad()) node->parents.push_back(p.node());
    }
    node->backward_fn = [inputs](Node<T>& self) {
      std::size_t offset = 0;
      for (const auto& in : inputs) {
        const std::size_t len = in->value.size();
        if (T* d = grad_of(in)) {
          for (std::size_t i = 0; i < len; ++i) d[i] += self.grad[offset + i];
        }
        offset += len;
      }
    };
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_cols");
  const std::size_t m = x.rows(), n = x.cols();
  if (count == 0 || start + count > n) fail(ErrorCode::kShapeError, "slice_cols: range out of bounds");
  std::vector<T> out(m * count);
  const auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(xv.begin() + i * n + start, count, out.begin() + i * count);
  }
  auto xn = x.node();
  return finish<T>("slice_cols", row_shape(x, m, count), std::move(out), {&x},
                   [xn, m, n, start, count](Node<T>& self) {
                     T* dx = grad_of(xn);
                     for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < count; ++j) dx[i * n + start + j] += self.grad[i * count + j];
                     }
                   });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  if (!x.defined()) fail(ErrorCode::kShapeError, "sum: undefined input");
  double total = 0.0;
  for (T v : x.data()) total += v;
  auto xn = x.node();
  return finish<T>("sum", Shape{1}, {static_cast<T>(total)}, {&x}, [xn](Node<T>& self) {
    T* dx = grad_of(xn);
    for (std::size_t i = 0; i < xn->value.size(); ++i) dx[i] += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  if (!x.defined()) fail(ErrorCode::kShapeError, "mean: undefined input");
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

#define CLM_INSTANTIATE_OPS(T)                                                                        \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> scale(const Tensor<T>&, T);                                                      \
  template Tensor<T> add_rowvec(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);             \
  template Tensor<T> modulate(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> gelu(const Tensor<T>&);                                                          \
  template Tensor<T> softmax(const Tensor<T>&);                                                       \
  template Tensor<T> attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t,     \
                               const std::vector<std::size_t>&);                                      \
  template Tensor<T> mse(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> gather_rows(const Tensor<T>&, const std::vector<std::size_t>&);                  \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                                      \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);                          \
  template Tensor<T> sum(const Tensor<T>&);                                                           \
  template Tensor<T> mean(const Tensor<T>&);

CLM_INSTANTIATE_OPS(float)
CLM_INSTANTIATE_OPS(double)

}  // namespace clm::nn
