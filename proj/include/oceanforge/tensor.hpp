// tensor.hpp
//
// Copyright 2026 The Oceanforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode autodiff over dense f64 matrices. Each op records a backward
// closure on a dynamically built tape; backward() runs the tape in reverse
// topological order from a scalar loss.

#ifndef OCEANFORGE_TENSOR_HPP
#define OCEANFORGE_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "oceanforge/errors.hpp"

namespace oceanforge::tensor {

enum class Errc {
  DimMismatch,
  EmptyInput,
  InvalidIndex,
  ZeroNormRow,
  NotScalar,
};

using Error = CodedError<Errc>;

struct Node;
using Tensor = std::shared_ptr<Node>;

struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;  // row major
  std::vector<double> grad;   // same shape, lazily zeroed
  bool requires_grad = false;
  std::vector<Tensor> parents;
  std::function<void(Node&)> backward_fn;  // accumulates into parents

  double& at(int r, int c) { return value[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return value[static_cast<std::size_t>(r) * cols + c]; }
  double& gat(int r, int c) { return grad[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

inline Tensor make_tensor(int rows, int cols, bool requires_grad = false) {
  if (rows <= 0 || cols <= 0) throw Error(Errc::EmptyInput, "tensor dims must be positive");
  auto t = std::make_shared<Node>();
  t->rows = rows;
  t->cols = cols;
  t->value.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  t->grad.assign(t->value.size(), 0.0);
  t->requires_grad = requires_grad;
  return t;
}

inline Tensor make_tensor(int rows, int cols, std::vector<double> data,
                          bool requires_grad = false) {
  auto t = make_tensor(rows, cols, requires_grad);
  if (data.size() != t->value.size())
    throw Error(Errc::DimMismatch, "data length does not match rows*cols");
  t->value = std::move(data);
  return t;
}

namespace detail {

inline Tensor make_result(int rows, int cols, std::vector<Tensor> parents) {
  auto t = make_tensor(rows, cols);
  for (const auto& p : parents)
    if (p->requires_grad) t->requires_grad = true;
  t->parents = std::move(parents);
  return t;
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a->rows != b->rows || a->cols != b->cols)
    throw Error(Errc::DimMismatch, std::string(op) + ": shapes differ");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and broadcast ops
// ---------------------------------------------------------------------------

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  auto out = detail::make_result(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + b->value[i];
  out->backward_fn = [a, b](Node& o) {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) a->grad[i] += o.grad[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) b->grad[i] += o.grad[i];
  };
  return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  auto out = detail::make_result(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] - b->value[i];
  out->backward_fn = [a, b](Node& o) {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) a->grad[i] += o.grad[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) b->grad[i] -= o.grad[i];
  };
  return out;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "hadamard");
  auto out = detail::make_result(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * b->value[i];
  out->backward_fn = [a, b](Node& o) {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) a->grad[i] += o.grad[i] * b->value[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) b->grad[i] += o.grad[i] * a->value[i];
  };
  return out;
}

inline Tensor scalar_mul(const Tensor& a, double c) {
  auto out = detail::make_result(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * c;
  out->backward_fn = [a, c](Node& o) {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) a->grad[i] += o.grad[i] * c;
  };
  return out;
}

// matrix + broadcast row vector (1 x cols)
inline Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (bias->rows != 1 || bias->cols != a->cols)
    throw Error(Errc::DimMismatch, "add_bias: bias must be 1 x cols");
  auto out = detail::make_result(a->rows, a->cols, {a, bias});
  for (int r = 0; r < a->rows; ++r)
    for (int c = 0; c < a->cols; ++c) out->at(r, c) = a->at(r, c) + bias->value[static_cast<std::size_t>(c)];
  out->backward_fn = [a, bias](Node& o) {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) a->grad[i] += o.grad[i];
    if (bias->requires_grad)
      for (int r = 0; r < o.rows; ++r)
        for (int c = 0; c < o.cols; ++c) bias->grad[static_cast<std::size_t>(c)] += o.gat(r, c);
  };
  return out;
}

inline Tensor relu(const Tensor& a) {
  auto out = detail::make_result(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = std::max(0.0, a->value[i]);
  out->backward_fn = [a](Node& o) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < o.size(); ++i)
      if (a->value[i] > 0.0) a->grad[i] += o.grad[i];
  };
  return out;
}

inline Tensor exp_elem(const Tensor& a) {
  auto out = detail::make_result(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = std::exp(a->value[i]);
  out->backward_fn = [a](Node& o) {
    if (!a->requires_grad) return;
    for (std::size_t i = 0; i < o.size(); ++i) a->grad[i] += o.grad[i] * o.value[i];
  };
  return out;
}

// ---------------------------------------------------------------------------
// Matrix products
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a->cols != b->rows) throw Error(Errc::DimMismatch, "matmul: inner dims differ");
  auto out = detail::make_result(a->rows, b->cols, {a, b});
  const int m = a->rows, k = a->cols, n = b->cols;
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = a->at(i, p);
      if (av == 0.0) continue;
      const double* brow = &b->value[static_cast<std::size_t>(p) * n];
      double* orow = &out->value[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  out->backward_fn = [a, b, m, k, n](Node& o) {
    if (a->requires_grad) {  // dA = dO . B^T
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          const double* orow = &o.grad[static_cast<std::size_t>(i) * n];
          const double* brow = &b->value[static_cast<std::size_t>(p) * n];
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += orow[j] * brow[j];
          a->gat(i, p) += acc;
        }
    }
    if (b->requires_grad) {  // dB = A^T . dO
      for (int p = 0; p < k; ++p)
        for (int i = 0; i < m; ++i) {
          const double av = a->at(i, p);
          if (av == 0.0) continue;
          const double* orow = &o.grad[static_cast<std::size_t>(i) * n];
          double* brow = &b->grad[static_cast<std::size_t>(p) * n];
          for (int j = 0; j < n; ++j) brow[j] += av * orow[j];
        }
    }
  };
  return out;
}

// a . b^T, with a: m x k and b: n x k
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a->cols != b->cols) throw Error(Errc::DimMismatch, "matmul_nt: inner dims differ");
  auto out = detail::make_result(a->rows, b->rows, {a, b});
  const int m = a->rows, k = a->cols, n = b->rows;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double* arow = &a->value[static_cast<std::size_t>(i) * k];
      const double* brow = &b->value[static_cast<std::size_t>(j) * k];
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      out->at(i, j) = acc;
    }
  out->backward_fn = [a, b, m, k, n](Node& o) {
    if (a->requires_grad) {  // dA = dO . B
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double g = o.gat(i, j);
          if (g == 0.0) continue;
          const double* brow = &b->value[static_cast<std::size_t>(j) * k];
          double* arow = &a->grad[static_cast<std::size_t>(i) * k];
          for (int p = 0; p < k; ++p) arow[p] += g * brow[p];
        }
    }
    if (b->requires_grad) {  // dB = dO^T . A
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double g = o.gat(i, j);
          if (g == 0.0) continue;
          const double* arow = &a->value[static_cast<std::size_t>(i) * k];
          double* brow = &b->grad[static_cast<std::size_t>(j) * k];
          for (int p = 0; p < k; ++p) brow[p] += g * arow[p];
        }
    }
  };
  return out;
}

inline Tensor transpose(const Tensor& a) {
  auto out = detail::make_result(a->cols, a->rows, {a});
  for (int r = 0; r < a->rows; ++r)
    for (int c = 0; c < a->cols; ++c) out->at(c, r) = a->at(r, c);
  out->backward_fn = [a](Node& o) {
    if (!a->requires_grad) return;
    for (int r = 0; r < o.rows; ++r)
      for (int c = 0; c < o.cols; ++c) a->gat(c, r) += o.grad[static_cast<std::size_t>(r) * o.cols + c];
  };
  return out;
}

// ---------------------------------------------------------------------------
// Row-wise normalizations
// ---------------------------------------------------------------------------

inline Tensor softmax_rows(const Tensor& a) {
  auto out = detail::make_result(a->rows, a->cols, {a});
  for (int r = 0; r < a->rows; ++r) {
    double mx = a->at(r, 0);
    for (int c = 1; c < a->cols; ++c) mx = std::max(mx, a->at(r, c));
    double sum = 0.0;
    for (int c = 0; c < a->cols; ++c) sum += (out->at(r, c) = std::exp(a->at(r, c) - mx));
    for (int c = 0; c < a->cols; ++c) out->at(r, c) /= sum;
  }
  out->backward_fn = [a](Node& o) {
    if (!a->requires_grad) return;
    for (int r = 0; r < o.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < o.cols; ++c) dot += o.gat(r, c) * o.at(r, c);
      for (int c = 0; c < o.cols; ++c)
        a->gat(r, c) += o.at(r, c) * (o.gat(r, c) - dot);
    }
  };
  return out;
}

inline Tensor log_softmax_rows(const Tensor& a) {
  auto out = detail::make_result(a->rows, a->cols, {a});
  for (int r = 0; r < a->rows; ++r) {
    double mx = a->at(r, 0);
    for (int c = 1; c < a->cols; ++c) mx = std::max(mx, a->at(r, c));
    double sum = 0.0;
    for (int c = 0; c < a->cols; ++c) sum += std::exp(a->at(r, c) - mx);
    const double lse = mx + std::log(sum);
    for (int c = 0; c < a->cols; ++c) out->at(r, c) = a->at(r, c) - lse;
  }
  out->backward_fn = [a](Node& o) {
    if (!a->requires_grad) return;
    for (int r = 0; r < o.rows; ++r) {
      double gsum = 0.0;
      for (int c = 0; c < o.cols; ++c) gsum += o.gat(r, c);
      for (int c = 0; c < o.cols; ++c)
        a->gat(r, c) += o.gat(r, c) - std::exp(o.at(r, c)) * gsum;
    }
  };
  return out;
}

inline Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                              double eps = 1e-5) {
  if (gamma->rows != 1 || gamma->cols != x->cols || beta->rows != 1 || beta->cols != x->cols)
    throw Error(Errc::DimMismatch, "layer_norm: gamma/beta must be 1 x cols");
  auto out = detail::make_result(x->rows, x->cols, {x, gamma, beta});
  const int n = x->cols;
  auto xhat = std::make_shared<std::vector<double>>(x->size());
  auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x->rows));
  for (int r = 0; r < x->rows; ++r) {
    double mu = 0.0;
    for (int c = 0; c < n; ++c) mu += x->at(r, c);
    mu /= n;
    double var = 0.0;
    for (int c = 0; c < n; ++c) {
      const double d = x->at(r, c) - mu;
      var += d * d;
    }
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[static_cast<std::size_t>(r)] = is;
    for (int c = 0; c < n; ++c) {
      const double h = (x->at(r, c) - mu) * is;
      (*xhat)[static_cast<std::size_t>(r) * n + c] = h;
      out->at(r, c) = h * gamma->value[static_cast<std::size_t>(c)] + beta->value[static_cast<std::size_t>(c)];
    }
  }
  out->backward_fn = [x, gamma, beta, xhat, inv_sigma, n](Node& o) {
    for (int r = 0; r < o.rows; ++r) {
      const double* h = &(*xhat)[static_cast<std::size_t>(r) * n];
      if (gamma->requires_grad || beta->requires_grad) {
        for (int c = 0; c < n; ++c) {
          if (gamma->requires_grad) gamma->grad[static_cast<std::size_t>(c)] += o.gat(r, c) * h[c];
          if (beta->requires_grad) beta->grad[static_cast<std::size_t>(c)] += o.gat(r, c);
        }
      }
      if (x->requires_grad) {
        double gmean = 0.0, ghmean = 0.0;
        for (int c = 0; c < n; ++c) {
          const double g = o.gat(r, c) * gamma->value[static_cast<std::size_t>(c)];
          gmean += g;
          ghmean += g * h[c];
        }
        gmean /= n;
        ghmean /= n;
        const double is = (*inv_sigma)[static_cast<std::size_t>(r)];
        for (int c = 0; c < n; ++c) {
          const double g = o.gat(r, c) * gamma->value[static_cast<std::size_t>(c)];
          x->gat(r, c) += is * (g - gmean - h[c] * ghmean);
        }
      }
    }
  };
  return out;
}

inline Tensor l2_normalize_rows(const Tensor& x) {
  auto out = detail::make_result(x->rows, x->cols, {x});
  auto norms = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x->rows));
  for (int r = 0; r < x->rows; ++r) {
    double sq = 0.0;
    for (int c = 0; c < x->cols; ++c) sq += x->at(r, c) * x->at(r, c);
    const double norm = std::sqrt(sq);
    if (norm == 0.0)
      throw Error(Errc::ZeroNormRow, "cannot normalize an all-zero row " + std::to_string(r));
    (*norms)[static_cast<std::size_t>(r)] = norm;
    for (int c = 0; c < x->cols; ++c) out->at(r, c) = x->at(r, c) / norm;
  }
  out->backward_fn = [x, norms](Node& o) {
    if (!x->requires_grad) return;
    for (int r = 0; r < o.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < o.cols; ++c) dot += o.gat(r, c) * o.at(r, c);
      const double inv = 1.0 / (*norms)[static_cast<std::size_t>(r)];
      for (int c = 0; c < o.cols; ++c)
        x->gat(r, c) += (o.gat(r, c) - o.at(r, c) * dot) * inv;
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// Shape plumbing
// ---------------------------------------------------------------------------

inline Tensor take_rows(const Tensor& x, const std::vector<int>& indices) {
  if (indices.empty()) throw Error(Errc::EmptyInput, "take_rows: no indices");
  for (int i : indices)
    if (i < 0 || i >= x->rows) throw Error(Errc::InvalidIndex, "take_rows: index out of range");
  auto out = detail::make_result(static_cast<int>(indices.size()), x->cols, {x});
  for (std::size_t r = 0; r < indices.size(); ++r)
    for (int c = 0; c < x->cols; ++c) out->at(static_cast<int>(r), c) = x->at(indices[r], c);
  auto idx = std::make_shared<std::vector<int>>(indices);
  out->backward_fn = [x, idx](Node& o) {
    if (!x->requires_grad) return;
    for (std::size_t r = 0; r < idx->size(); ++r)
      for (int c = 0; c < o.cols; ++c) x->gat((*idx)[r], c) += o.gat(static_cast<int>(r), c);
  };
  return out;
}

inline Tensor mean_axis0(const Tensor& x) {
  auto out = detail::make_result(1, x->cols, {x});
  for (int c = 0; c < x->cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < x->rows; ++r) acc += x->at(r, c);
    out->at(0, c) = acc / x->rows;
  }
  out->backward_fn = [x](Node& o) {
    if (!x->requires_grad) return;
    const double inv = 1.0 / x->rows;
    for (int r = 0; r < x->rows; ++r)
      for (int c = 0; c < o.cols; ++c) x->gat(r, c) += o.gat(0, c) * inv;
  };
  return out;
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error(Errc::EmptyInput, "concat_rows: no parts");
  const int cols = parts.front()->cols;
  int rows = 0;
  for (const auto& p : parts) {
    if (p->cols != cols) throw Error(Errc::DimMismatch, "concat_rows: column counts differ");
    rows += p->rows;
  }
  auto out = detail::make_result(rows, cols, parts);
  int r0 = 0;
  for (const auto& p : parts) {
    std::copy(p->value.begin(), p->value.end(),
              out->value.begin() + static_cast<std::ptrdiff_t>(r0) * cols);
    r0 += p->rows;
  }
  auto parts_copy = std::make_shared<std::vector<Tensor>>(parts);
  out->backward_fn = [parts_copy, cols](Node& o) {
    int r = 0;
    for (const auto& p : *parts_copy) {
      if (p->requires_grad)
        for (std::size_t i = 0; i < p->size(); ++i)
          p->grad[i] += o.grad[static_cast<std::size_t>(r) * cols + i];
      r += p->rows;
    }
  };
  return out;
}

inline Tensor slice_cols(const Tensor& x, int start, int len) {
  if (start < 0 || len <= 0 || start + len > x->cols)
    throw Error(Errc::InvalidIndex, "slice_cols: range out of bounds");
  auto out = detail::make_result(x->rows, len, {x});
  for (int r = 0; r < x->rows; ++r)
    for (int c = 0; c < len; ++c) out->at(r, c) = x->at(r, start + c);
  out->backward_fn = [x, start, len](Node& o) {
    if (!x->requires_grad) return;
    for (int r = 0; r < o.rows; ++r)
      for (int c = 0; c < len; ++c) x->gat(r, start + c) += o.gat(r, c);
  };
  return out;
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw Error(Errc::EmptyInput, "concat_cols: no parts");
  const int rows = parts.front()->rows;
  int cols = 0;
  for (const auto& p : parts) {
    if (p->rows != rows) throw Error(Errc::DimMismatch, "concat_cols: row counts differ");
    cols += p->cols;
  }
  auto out = detail::make_result(rows, cols, parts);
  int c0 = 0;
  for (const auto& p : parts) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < p->cols; ++c) out->at(r, c0 + c) = p->at(r, c);
    c0 += p->cols;
  }
  auto parts_copy = std::make_shared<std::vector<Tensor>>(parts);
  out->backward_fn = [parts_copy, rows](Node& o) {
    int c0 = 0;
    for (const auto& p : *parts_copy) {
      if (p->requires_grad)
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < p->cols; ++c) p->gat(r, c) += o.gat(r, c0 + c);
      c0 += p->cols;
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// Reductions and scalar coupling
// ---------------------------------------------------------------------------

inline Tensor sum_all(const Tensor& x) {
  auto out = detail::make_result(1, 1, {x});
  double acc = 0.0;
  for (double v : x->value) acc += v;
  out->value[0] = acc;
  out->backward_fn = [x](Node& o) {
    if (!x->requires_grad) return;
    for (auto& g : x->grad) g += o.grad[0];
  };
  return out;
}

inline Tensor trace(const Tensor& x) {
  if (x->rows != x->cols) throw Error(Errc::DimMismatch, "trace: matrix must be square");
  auto out = detail::make_result(1, 1, {x});
  double acc = 0.0;
  for (int i = 0; i < x->rows; ++i) acc += x->at(i, i);
  out->value[0] = acc;
  out->backward_fn = [x](Node& o) {
    if (!x->requires_grad) return;
    for (int i = 0; i < x->rows; ++i) x->gat(i, i) += o.grad[0];
  };
  return out;
}

// x / s with s a 1x1 tensor (temperature coupling)
inline Tensor div_scalar_tensor(const Tensor& x, const Tensor& s) {
  if (s->rows != 1 || s->cols != 1) throw Error(Errc::NotScalar, "divisor must be 1x1");
  auto out = detail::make_result(x->rows, x->cols, {x, s});
  const double sv = s->value[0];
  for (std::size_t i = 0; i < out->size(); ++i) out->value[i] = x->value[i] / sv;
  out->backward_fn = [x, s, sv](Node& o) {
    if (x->requires_grad)
      for (std::size_t i = 0; i < o.size(); ++i) x->grad[i] += o.grad[i] / sv;
    if (s->requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < o.size(); ++i) acc += o.grad[i] * x->value[i];
      s->grad[0] -= acc / (sv * sv);
    }
  };
  return out;
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

inline void backward(const Tensor& loss) {
  if (loss->rows != 1 || loss->cols != 1)
    throw Error(Errc::NotScalar, "backward starts from a 1x1 loss");
  // Iterative postorder over parents, then replay reversed.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  std::unordered_set<Node*> on_path;
  stack.emplace_back(loss.get(), 0);
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->zero_grad();
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn && (*it)->requires_grad) (*it)->backward_fn(**it);
}

}  // namespace oceanforge::tensor

#endif  // OCEANFORGE_TENSOR_HPP
