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

#ifndef EFIGNN_DENSE_MAT_H_
#define EFIGNN_DENSE_MAT_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace efignn {

// Raised when an operation produces NaN or Inf. The CLI maps it to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-major 2-D array of 64-bit floats.
class DenseMat {
 public:
  DenseMat() = default;
  DenseMat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMat(std::size_t rows, std::size_t cols, std::vector<double> data);
  // Nested-list literal, mostly for tests: DenseMat{{1, 2}, {3, 4}}.
  DenseMat(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const DenseMat& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_string() const;

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const DenseMat& a, const DenseMat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Plain (untaped) kernels shared by the tape and the oracles' callers.
// All of them throw std::invalid_argument on shape mismatch.
DenseMat matmul(const DenseMat& a, const DenseMat& b);
// a^T * b without materializing the transpose.
DenseMat matmul_tn(const DenseMat& a, const DenseMat& b);
// a * b^T.
DenseMat matmul_nt(const DenseMat& a, const DenseMat& b);
DenseMat hadamard(const DenseMat& a, const DenseMat& b);
DenseMat transpose(const DenseMat& a);
void add_inplace(DenseMat& acc, const DenseMat& b);
void scale_inplace(DenseMat& m, double s);
double max_abs_diff(const DenseMat& a, const DenseMat& b);

void require_finite(const DenseMat& m, const char* what);

}  // namespace efignn

#endif  // EFIGNN_DENSE_MAT_H_
