// core/src/math.cc

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

#include "anchorsv/math.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anchorsv/error.h"

namespace anchorsv {

Mat64::Mat64(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    Fail(ErrorKind::kShapeMismatch,
         "matrix data has " + std::to_string(data_.size()) + " entries, expected " +
             std::to_string(rows_) + "x" + std::to_string(cols_));
}

void Mat64::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    Fail(ErrorKind::kShapeMismatch, "dot of vectors with different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

double MeanSquare(std::span<const double> a) {
  if (a.empty()) return 0.0;
  return Dot(a, a) / static_cast<double>(a.size());
}

bool AllFinite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

double CosineWithGrad(std::span<const double> a, std::span<const double> b,
                      Vec64 *grad_a, Vec64 *grad_b) {
  if (a.size() != b.size())
    Fail(ErrorKind::kShapeMismatch, "cosine of vectors with different lengths");
  double na = Norm(a), nb = Norm(b);
  if (!(na > kNormEpsilon) || !(nb > kNormEpsilon))
    Fail(ErrorKind::kZeroVector, "cosine with a zero-norm vector");
  // Scaled sums keep sqrt(aa * bb) in range; identical inputs then give
  // aa == bb == ab bitwise and a cosine of exactly 1.
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa = std::max(sa, std::abs(a[i]));
    sb = std::max(sb, std::abs(b[i]));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] / sa, y = b[i] / sb;
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  double raw = ab / std::sqrt(aa * bb);
  double c = std::clamp(raw, -1.0, 1.0);
  // d cos / da = b / (|a||b|) - cos * a / |a|^2. The clamp only removes
  // rounding overshoot, so the unclamped derivative is used.
  if (grad_a != nullptr) {
    grad_a->resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      (*grad_a)[i] = b[i] / (na * nb) - raw * a[i] / (na * na);
  }
  if (grad_b != nullptr) {
    grad_b->resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
      (*grad_b)[i] = a[i] / (na * nb) - raw * b[i] / (nb * nb);
  }
  return c;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  return CosineWithGrad(a, b, nullptr, nullptr);
}

double AnchorKernelFromCosine(double cosine, double m, double *d_dcos) {
  double k = std::exp(m * (1.0 - cosine));
  if (d_dcos != nullptr) *d_dcos = -m * k;
  return k;
}

double AnchorKernel(std::span<const double> a, std::span<const double> b,
                    double m) {
  if (!(m > 0.0)) Fail(ErrorKind::kInvalidArgument, "kernel scale must be > 0");
  return AnchorKernelFromCosine(Cosine(a, b), m);
}

Vec64 Softmax(std::span<const double> logits) {
  if (logits.empty()) Fail(ErrorKind::kInvalidArgument, "softmax of empty logits");
  double mx = *std::max_element(logits.begin(), logits.end());
  Vec64 p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double &v : p) v /= z;
  return p;
}

double CrossEntropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size())
    Fail(ErrorKind::kInvalidArgument, "label " + std::to_string(label) +
                                          " out of range for " +
                                          std::to_string(logits.size()) + " classes");
  double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  return std::log(z) + mx - logits[label];
}

double GradCheck(const ScalarFunction &f, std::span<const double> x,
                 std::span<const double> analytic_grad, double h) {
  if (x.size() != analytic_grad.size())
    Fail(ErrorKind::kShapeMismatch, "gradient length differs from parameter length");
  Vec64 probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    double fp = f(probe);
    probe[i] = orig - h;
    double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      Fail(ErrorKind::kNonFinite,
           "function not finite around coordinate " + std::to_string(i));
    double fd = (fp - fm) / (2.0 * h);
    double an = analytic_grad[i];
    double denom = std::max({1.0, std::abs(an), std::abs(fd)});
    worst = std::max(worst, std::abs(an - fd) / denom);
  }
  return worst;
}

}  // namespace anchorsv
