// Copyright 2026 The EFI-GNN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "efignn/tape.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace efignn {

Var Tape::push(DenseMat value, bool requires_grad, BackwardFn fn) {
  require_finite(value, "tape op output");
  nodes_.push_back({std::move(value), DenseMat(), requires_grad,
                    requires_grad ? std::move(fn) : BackwardFn()});
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size())
    throw std::out_of_range("tape: invalid Var");
  return nodes_[v.id];
}

Var Tape::leaf(DenseMat value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

const DenseMat& Tape::value(Var v) const { return node(v).value; }

const DenseMat& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols())
    throw std::logic_error("tape: gradient requested before backward()");
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

DenseMat& Tape::grad_slot(Var v) { return nodes_[v.id].grad; }

void Tape::accumulate(Var v, const DenseMat& g) {
  if (!nodes_[v.id].requires_grad) return;
  add_inplace(grad_slot(v), g);
}

Var Tape::matmul(Var x, Var w) {
  DenseMat y = efignn::matmul(value(x), value(w));
  const bool rg = requires_grad(x) || requires_grad(w);
  return push(std::move(y), rg, [x, w](Tape& t, const DenseMat& dy) {
    if (t.requires_grad(x)) t.accumulate(x, matmul_nt(dy, t.value(w)));
    if (t.requires_grad(w)) t.accumulate(w, matmul_tn(t.value(x), dy));
  });
}

Var Tape::spmm(const CsrMatrix& a, Var x) {
  DenseMat y = efignn::spmm(a, value(x));
  const CsrMatrix* ap = &a;
  return push(std::move(y), requires_grad(x), [ap, x](Tape& t, const DenseMat& dy) {
    t.accumulate(x, spmm_transposed(*ap, dy));
  });
}

Var Tape::spmm(std::shared_ptr<const CsrMatrix> a, Var x) {
  DenseMat y = efignn::spmm(*a, value(x));
  return push(std::move(y), requires_grad(x),
              [a = std::move(a), x](Tape& t, const DenseMat& dy) {
                t.accumulate(x, spmm_transposed(*a, dy));
              });
}

Var Tape::hadamard(Var p, Var q) {
  DenseMat y = efignn::hadamard(value(p), value(q));
  const bool rg = requires_grad(p) || requires_grad(q);
  return push(std::move(y), rg, [p, q](Tape& t, const DenseMat& dy) {
    if (t.requires_grad(p)) t.accumulate(p, efignn::hadamard(dy, t.value(q)));
    if (t.requires_grad(q)) t.accumulate(q, efignn::hadamard(dy, t.value(p)));
  });
}

Var Tape::add(Var a, Var b) {
  DenseMat y = value(a);
  add_inplace(y, value(b));
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(std::move(y), rg, [a, b](Tape& t, const DenseMat& dy) {
    t.accumulate(a, dy);
    t.accumulate(b, dy);
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t width = 0;
  bool rg = false;
  for (Var p : parts) {
    const DenseMat& m = value(p);
    if (m.rows() != rows) {
      throw std::invalid_argument("concat_cols: row mismatch " + m.shape_string() +
                                  " vs " + std::to_string(rows) + " rows");
    }
    width += m.cols();
    rg = rg || requires_grad(p);
  }
  DenseMat y(rows, width);
  std::size_t offset = 0;
  for (Var p : parts) {
    const DenseMat& m = value(p);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(m.row(r).begin(), m.row(r).end(), y.row(r).begin() + offset);
    offset += m.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(y), rg, [inputs](Tape& t, const DenseMat& dy) {
    std::size_t off = 0;
    for (Var p : inputs) {
      const std::size_t w = t.value(p).cols();
      if (t.requires_grad(p)) {
        DenseMat g(dy.rows(), w);
        for (std::size_t r = 0; r < dy.rows(); ++r) {
          auto src = dy.row(r).subspan(off, w);
          std::copy(src.begin(), src.end(), g.row(r).begin());
        }
        t.accumulate(p, g);
      }
      off += w;
    }
  });
}

Var Tape::leaky_relu(Var x, double slope) {
  if (!(slope > 0.0 && slope < 1.0))
    throw std::invalid_argument("leaky_relu: slope must be in (0,1)");
  DenseMat y = value(x);
  for (double& v : y.values())
    if (v < 0.0) v *= slope;
  return push(std::move(y), requires_grad(x), [x, slope](Tape& t, const DenseMat& dy) {
    DenseMat g = dy;
    const DenseMat& in = t.value(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in.data()[i] < 0.0) g.data()[i] *= slope;
    t.accumulate(x, g);
  });
}

Var Tape::dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (!training || rate == 0.0) return x;
  const double scale = 1.0 / (1.0 - rate);
  DenseMat mask(value(x).rows(), value(x).cols());
  for (double& m : mask.values()) m = uniform01(rng) >= rate ? scale : 0.0;
  DenseMat y = efignn::hadamard(value(x), mask);
  return push(std::move(y), requires_grad(x),
              [x, mask = std::move(mask)](Tape& t, const DenseMat& dy) {
                t.accumulate(x, efignn::hadamard(dy, mask));
              });
}

Var Tape::batch_norm(Var x, Var gamma, Var beta, BatchNormStats& stats, bool training,
                     double eps) {
  const DenseMat& in = value(x);
  const std::size_t n = in.rows();
  const std::size_t c = in.cols();
  if (value(gamma).rows() != 1 || value(gamma).cols() != c || value(beta).rows() != 1 ||
      value(beta).cols() != c) {
    throw std::invalid_argument("batch_norm: gamma/beta must be 1x" + std::to_string(c));
  }
  if (stats.running_mean.cols() != c || stats.running_var.cols() != c)
    throw std::invalid_argument("batch_norm: running stats width mismatch");
  if (training && n == 0) throw std::invalid_argument("batch_norm: empty batch");

  DenseMat mean(1, c), inv_std(1, c);
  if (training) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < c; ++j) mean(0, j) += in(r, j);
    for (std::size_t j = 0; j < c; ++j) mean(0, j) /= static_cast<double>(n);
    DenseMat var(1, c);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < c; ++j) {
        const double d = in(r, j) - mean(0, j);
        var(0, j) += d * d;
      }
    for (std::size_t j = 0; j < c; ++j) {
      const double biased = var(0, j) / static_cast<double>(n);
      const double unbiased = n > 1 ? var(0, j) / static_cast<double>(n - 1) : biased;
      inv_std(0, j) = 1.0 / std::sqrt(biased + eps);
      stats.running_mean(0, j) =
          stats.momentum * stats.running_mean(0, j) + (1.0 - stats.momentum) * mean(0, j);
      stats.running_var(0, j) =
          stats.momentum * stats.running_var(0, j) + (1.0 - stats.momentum) * unbiased;
    }
  } else {
    for (std::size_t j = 0; j < c; ++j) {
      mean(0, j) = stats.running_mean(0, j);
      inv_std(0, j) = 1.0 / std::sqrt(stats.running_var(0, j) + eps);
    }
  }

  DenseMat xhat(n, c), y(n, c);
  const DenseMat& g = value(gamma);
  const DenseMat& b = value(beta);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < c; ++j) {
      xhat(r, j) = (in(r, j) - mean(0, j)) * inv_std(0, j);
      y(r, j) = g(0, j) * xhat(r, j) + b(0, j);
    }

  const bool rg = requires_grad(x) || requires_grad(gamma) || requires_grad(beta);
  return push(std::move(y), rg,
              [x, gamma, beta, training, xhat = std::move(xhat),
               inv_std = std::move(inv_std)](Tape& t, const DenseMat& dy) {
                const std::size_t n = dy.rows();
                const std::size_t c = dy.cols();
                const DenseMat& g = t.value(gamma);
                DenseMat dgamma(1, c), dbeta(1, c);
                for (std::size_t r = 0; r < n; ++r)
                  for (std::size_t j = 0; j < c; ++j) {
                    dgamma(0, j) += dy(r, j) * xhat(r, j);
                    dbeta(0, j) += dy(r, j);
                  }
                t.accumulate(gamma, dgamma);
                t.accumulate(beta, dbeta);
                if (!t.requires_grad(x)) return;
                DenseMat dx(n, c);
                if (training) {
                  const double nn = static_cast<double>(n);
                  // dxhat = dy * gamma; sum(dxhat) = gamma * dbeta,
                  // sum(dxhat * xhat) = gamma * dgamma.
                  for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t j = 0; j < c; ++j) {
                      const double dxhat = dy(r, j) * g(0, j);
                      dx(r, j) = inv_std(0, j) / nn *
                                 (nn * dxhat - g(0, j) * dbeta(0, j) -
                                  xhat(r, j) * g(0, j) * dgamma(0, j));
                    }
                } else {
                  for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t j = 0; j < c; ++j)
                      dx(r, j) = dy(r, j) * g(0, j) * inv_std(0, j);
                }
                t.accumulate(x, dx);
              });
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const std::uint32_t> labels,
                                std::span<const std::uint32_t> mask) {
  if (mask.empty()) throw std::invalid_argument("softmax_cross_entropy: empty mask");
  const DenseMat& z = value(logits);
  if (labels.size() != z.rows())
    throw std::invalid_argument("softmax_cross_entropy: one label per row required");
  const std::size_t classes = z.cols();
  DenseMat probs(mask.size(), classes);
  double loss = 0.0;
  for (std::size_t m = 0; m < mask.size(); ++m) {
    const std::size_t r = mask[m];
    if (r >= z.rows()) throw std::out_of_range("softmax_cross_entropy: mask index");
    if (labels[r] >= classes) throw std::out_of_range("softmax_cross_entropy: label");
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      probs(m, k) = std::exp(row[k] - mx);
      denom += probs(m, k);
    }
    for (std::size_t k = 0; k < classes; ++k) probs(m, k) /= denom;
    loss -= (row[labels[r]] - mx) - std::log(denom);
  }
  loss /= static_cast<double>(mask.size());
  std::vector<std::uint32_t> rows(mask.begin(), mask.end());
  std::vector<std::uint32_t> lab(labels.begin(), labels.end());
  return push(DenseMat(1, 1, loss), requires_grad(logits),
              [logits, rows = std::move(rows), lab = std::move(lab),
               probs = std::move(probs)](Tape& t, const DenseMat& dy) {
                const DenseMat& z = t.value(logits);
                DenseMat g(z.rows(), z.cols());
                const double scale = dy(0, 0) / static_cast<double>(rows.size());
                for (std::size_t m = 0; m < rows.size(); ++m) {
                  const std::size_t r = rows[m];
                  for (std::size_t k = 0; k < z.cols(); ++k) {
                    const double onehot = k == lab[r] ? 1.0 : 0.0;
                    g(r, k) += (probs(m, k) - onehot) * scale;
                  }
                }
                t.accumulate(logits, g);
              });
}

Var Tape::sum(Var x) {
  double s = 0.0;
  for (double v : value(x).values()) s += v;
  return push(DenseMat(1, 1, s), requires_grad(x), [x](Tape& t, const DenseMat& dy) {
    const DenseMat& in = t.value(x);
    t.accumulate(x, DenseMat(in.rows(), in.cols(), dy(0, 0)));
  });
}

Var Tape::dot(Var x, const DenseMat& weights) {
  if (!value(x).same_shape(weights))
    throw std::invalid_argument("dot: shape mismatch " + value(x).shape_string() +
                                " vs " + weights.shape_string());
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    s += value(x).data()[i] * weights.data()[i];
  return push(DenseMat(1, 1, s), requires_grad(x),
              [x, weights](Tape& t, const DenseMat& dy) {
                DenseMat g = weights;
                scale_inplace(g, dy(0, 0));
                t.accumulate(x, g);
              });
}

void Tape::backward(Var loss) {
  const DenseMat& l = value(loss);
  if (l.rows() != 1 || l.cols() != 1)
    throw std::invalid_argument("backward: loss must be 1x1, got " + l.shape_string());
  for (Node& n : nodes_) {
    if (n.requires_grad)
      n.grad = DenseMat(n.value.rows(), n.value.cols());
    else
      n.grad = DenseMat();
  }
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward) continue;
    require_finite(n.grad, "gradient");
    n.backward(*this, n.grad);
  }
}

}  // namespace efignn
