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

#include "efignn/dense_mat.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace efignn {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const DenseMat& m) {
  return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}
MutMap view(DenseMat& m) {
  return MutMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

[[noreturn]] void shape_error(const char* op, const DenseMat& a,
                              const DenseMat& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              a.shape_string() + " vs " + b.shape_string());
}

}  // namespace

DenseMat::DenseMat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("DenseMat: data length " +
                                std::to_string(data_.size()) +
                                " does not match " + shape_string());
  }
}

DenseMat::DenseMat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("DenseMat: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMat DenseMat::identity(std::size_t n) {
  DenseMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string DenseMat::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

void DenseMat::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool DenseMat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

DenseMat matmul(const DenseMat& a, const DenseMat& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  DenseMat out(a.rows(), b.cols());
  if (out.empty() || a.cols() == 0) return out;
  view(out).noalias() = view(a) * view(b);
  return out;
}

DenseMat matmul_tn(const DenseMat& a, const DenseMat& b) {
  if (a.rows() != b.rows()) shape_error("matmul_tn", a, b);
  DenseMat out(a.cols(), b.cols());
  if (out.empty() || a.rows() == 0) return out;
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

DenseMat matmul_nt(const DenseMat& a, const DenseMat& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
  DenseMat out(a.rows(), b.rows());
  if (out.empty() || a.cols() == 0) return out;
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

DenseMat hadamard(const DenseMat& a, const DenseMat& b) {
  if (!a.same_shape(b)) shape_error("hadamard", a, b);
  DenseMat out(a.rows(), a.cols());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] * pb[i];
  return out;
}

DenseMat transpose(const DenseMat& a) {
  DenseMat out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

void add_inplace(DenseMat& acc, const DenseMat& b) {
  if (!acc.same_shape(b)) shape_error("add", acc, b);
  double* pa = acc.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < acc.size(); ++i) pa[i] += pb[i];
}

void scale_inplace(DenseMat& m, double s) {
  for (double& v : m.values()) v *= s;
}

double max_abs_diff(const DenseMat& a, const DenseMat& b) {
  if (!a.same_shape(b)) shape_error("max_abs_diff", a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

void require_finite(const DenseMat& m, const char* what) {
  if (!m.all_finite()) {
    throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace efignn
