// core/include/anchorsv/math.h

// Copyright 2026  The anchorsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ANCHORSV_MATH_H_
#define ANCHORSV_MATH_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace anchorsv {

using Vec64 = std::vector<double>;

/// Norms at or below this are treated as a collapsed (zero) vector.
inline constexpr double kNormEpsilon = 1e-12;

/// Dense row-major matrix of doubles.
class Mat64 {
 public:
  Mat64() = default;
  Mat64(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat64(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  void SetZero();
  bool SameShape(const Mat64 &other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Mat64 &, const Mat64 &) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> a);
/// Mean of squared entries; this is the "power" used for SNR everywhere.
double MeanSquare(std::span<const double> a);
bool AllFinite(std::span<const double> a);

/// a·b / (|a||b|), clamped to [-1, 1]. Throws ZeroVector when either norm is
/// at or below kNormEpsilon.
double Cosine(std::span<const double> a, std::span<const double> b);

/// Gradients of Cosine(a, b) with respect to both arguments. Either output
/// pointer may be null.
double CosineWithGrad(std::span<const double> a, std::span<const double> b,
                      Vec64 *grad_a, Vec64 *grad_b);

/// exp(m * (1 - cos(a, b))). Lies in [1, exp(2m)].
double AnchorKernel(std::span<const double> a, std::span<const double> b,
                    double m);

/// Kernel value from a precomputed cosine; also returns dK/dcos when asked.
double AnchorKernelFromCosine(double cosine, double m, double *d_dcos = nullptr);

/// Max-shifted softmax.
Vec64 Softmax(std::span<const double> logits);

/// -log softmax(logits)[label], computed with log-sum-exp.
double CrossEntropy(std::span<const double> logits, std::size_t label);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Compares an analytic gradient against central differences of f at x with
/// step h and returns
///   max_i |analytic_i - fd_i| / max(1, |analytic_i|, |fd_i|).
/// Throws NonFinite if f is not finite at any probe point.
double GradCheck(const ScalarFunction &f, std::span<const double> x,
                 std::span<const double> analytic_grad, double h = 1e-5);

}  // namespace anchorsv

#endif  // ANCHORSV_MATH_H_
