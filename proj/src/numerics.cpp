// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "dash/numerics.h"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numbers>

namespace dash {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error("Matrix: data length does not match rows*cols");
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gelu(double x) { return 0.5 * x * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double gelu_grad(double x) {
  const double cdf = 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
  const double pdf = std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  return cdf + x * pdf;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("cosine_similarity: dimension mismatch");
  if (x.empty()) throw Error("cosine_similarity: empty vectors");
  const double nx = l2_norm(x);
  const double ny = l2_norm(y);
  if (nx == 0.0 || ny == 0.0) throw Error("cosine_similarity: zero-norm input");
  const double c = dot(x, y) / (nx * ny);
  return std::clamp(c, -1.0, 1.0);
}

Vector softmax_with_temperature(std::span<const double> scores, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("softmax_with_temperature: tau must be > 0");
  if (scores.empty()) throw Error("softmax_with_temperature: empty scores");
  double max_v = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (std::isnan(s) || s == std::numeric_limits<double>::infinity()) {
      throw Error("softmax_with_temperature: non-finite score");
    }
    max_v = std::max(max_v, s);
  }
  if (!std::isfinite(max_v)) throw Error("softmax_with_temperature: every score is masked");
  Vector p(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    p[k] = std::isfinite(scores[k]) ? std::exp((scores[k] - max_v) / tau) : 0.0;
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

Vector mean_rows(const Matrix& m) {
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(m.rows());
  for (double& v : out) v *= inv;
  return out;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw Error("matmul: inner dimension mismatch");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (out.rows() != m || out.cols() != n) out = Matrix(m, n);
  else out.fill(0.0);
  const double* bp = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* o = out.row(i).data();
    const double* ar = a.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      const double* br = bp + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw Error("matmul_tn: inner dimension mismatch");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out = Matrix(a.cols(), b.cols());
  else out.fill(0.0);
  matmul_tn_accumulate(a, b, out);
}

void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw Error("matmul_tn_accumulate: shape mismatch");
  }
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const double* ar = a.row(p).data();
    const double* br = b.row(p).data();
    for (std::size_t i = 0; i < m; ++i) {
      const double av = ar[i];
      if (av == 0.0) continue;
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw Error("matmul_nt: inner dimension mismatch");
  const std::size_t m = a.rows(), n = b.rows(), k = a.cols();
  if (out.rows() != m || out.cols() != n) out = Matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a.row(i).data();
    double* o = out.row(i).data();
    for (std::size_t j = 0; j < n; ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      o[j] = s;
    }
  }
}

Vector vecmat(std::span<const double> x, const Matrix& w) {
  if (x.size() != w.rows()) throw Error("vecmat: dimension mismatch");
  Vector y(w.cols(), 0.0);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double xv = x[i];
    const auto wr = w.row(i);
    for (std::size_t j = 0; j < w.cols(); ++j) y[j] += xv * wr[j];
  }
  return y;
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    correction_ += (sum_ - t) + v;
  } else {
    correction_ += (v - t) + sum_;
  }
  sum_ = t;
}

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw Error("Rng::index: empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

Rng Rng::split(std::uint64_t stream) const {
  Rng mixer(state_ ^ (stream * 0xd1b54a32d192ed03ULL + 0x8bb84b93962eacc9ULL));
  return Rng(mixer.next_u64());
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_ints(std::span<const int> values, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (int v : values) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (u >> shift) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace dash
