// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense vectors/matrices, activations and similarity metrics shared by the
// model, the scorer and the oracles. Everything runs in double precision.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dash {

/// Raised when an input violates an operation's precondition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Scalar functions

double sigmoid(double x);

/// Exact GELU: x * Phi(x) with Phi the standard normal CDF (via erfc).
double gelu(double x);
/// d/dx [x * Phi(x)] = Phi(x) + x * phi(x).
double gelu_grad(double x);

// ---------------------------------------------------------------------------
// Vector functions

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

/// (x . y) / (|x| |y|). Throws dash::Error on dimension mismatch or a
/// zero-norm argument.
double cosine_similarity(std::span<const double> x, std::span<const double> y);

/// p_k proportional to exp(scores_k / tau), stabilized by max-subtraction.
/// Entries equal to -inf are treated as masked and receive probability 0.
Vector softmax_with_temperature(std::span<const double> scores, double tau);

/// Mean over rows.
Vector mean_rows(const Matrix& m);

// ---------------------------------------------------------------------------
// Dense kernels. Shapes are checked; outputs are overwritten.

/// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a^T * b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
/// out = a * b^T
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
/// out += a^T * b
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out);

/// y = x^T W for a single row vector x (len == W.rows()).
Vector vecmat(std::span<const double> x, const Matrix& w);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

// ---------------------------------------------------------------------------
// Deterministic random source. Distributions are implemented here rather
// than with <random> distributions so that streams are identical across
// standard library implementations.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Derives an independent stream.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_ints(std::span<const int> values, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace dash
