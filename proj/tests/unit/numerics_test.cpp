// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <numeric>

#include "dash/model.h"
#include "dash/numerics.h"
#include "dash/policy.h"
#include "doctest.h"

using namespace dash;

TEST_CASE("scalar activations match reference values") {
  CHECK(gelu(1.0) == doctest::Approx(0.841344746068543).epsilon(1e-14));
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(-1.0) == doctest::Approx(-0.158655253931457).epsilon(1e-13));
  CHECK(sigmoid(3.0) == doctest::Approx(0.952574126822433).epsilon(1e-14));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("gelu derivative agrees with central differences") {
  for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    const double h = 1e-6;
    CHECK(gelu_grad(x) == doctest::Approx((gelu(x + h) - gelu(x - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("softmax with temperature") {
  const Vector p = softmax_with_temperature(std::vector<double>{2, 0, 0, 0}, 1.0);
  CHECK(p[0] == doctest::Approx(0.711234).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.096255).epsilon(1e-4));
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));

  SUBCASE("masked entries get zero mass") {
    const double ninf = -std::numeric_limits<double>::infinity();
    const Vector q = softmax_with_temperature(std::vector<double>{ninf, 1, ninf, 1}, 0.5);
    CHECK(q[0] == 0.0);
    CHECK(q[2] == 0.0);
    CHECK(q[1] == doctest::Approx(0.5));
  }
  SUBCASE("large scores do not overflow") {
    const Vector q = softmax_with_temperature(std::vector<double>{1000, 999}, 1.0);
    CHECK(q[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  }
  SUBCASE("lower temperature sharpens") {
    const Vector hot = softmax_with_temperature(std::vector<double>{1, 0}, 2.0);
    const Vector cold = softmax_with_temperature(std::vector<double>{1, 0}, 0.1);
    CHECK(cold[0] > hot[0]);
  }
  CHECK_THROWS_AS(softmax_with_temperature(std::vector<double>{1, 2}, 0.0), Error);
}

TEST_CASE("temperature schedule") {
  CHECK(temperature(100, 1.0, 0.01) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(temperature(0, 2.0, 0.5) == 2.0);
  CHECK(temperature(1e6, 1.0, 0.01, 0.05) == 0.05);
  double prev = temperature(0, 1.0, 0.03);
  for (int t = 1; t < 300; ++t) {
    const double now = temperature(t, 1.0, 0.03);
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("cosine similarity") {
  const std::vector<double> x{1, 2, 3};
  CHECK(cosine_similarity(x, x) == doctest::Approx(1.0));
  const std::vector<double> neg{-1, -2, -3};
  CHECK(cosine_similarity(x, neg) == doctest::Approx(-1.0));
  const std::vector<double> zero{0, 0, 0};
  CHECK_THROWS_AS(cosine_similarity(x, zero), Error);
  CHECK_THROWS_AS(cosine_similarity(x, std::vector<double>{1, 2}), Error);
}

TEST_CASE("fake quantization") {
  const std::vector<double> v{0.5, -1.0, 0.25, 0.0};
  const auto spec = QuantSpec::for_values(v, 8);
  CHECK(spec.scale == doctest::Approx(1.0 / 127));
  const auto q = fake_quantize(v, spec);
  CHECK(q[0] == doctest::Approx(64.0 / 127).epsilon(1e-15));
  CHECK(q[1] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(q[3] == 0.0);

  SUBCASE("4-bit has 7 positive levels") {
    const auto s4 = QuantSpec::for_values(v, 4);
    CHECK(s4.max_level() == 7);
    const auto q4 = fake_quantize(v, s4);
    CHECK(q4[0] == doctest::Approx(4.0 / 7));
  }
  SUBCASE("all-zero input stays zero") {
    const std::vector<double> z(5, 0.0);
    for (double x : fake_quantize(z, QuantSpec::for_values(z, 4))) CHECK(x == 0.0);
  }
  SUBCASE("quantization error is bounded by half a step") {
    Rng rng(5);
    std::vector<double> w(200);
    for (double& x : w) x = rng.uniform(-3, 3);
    for (int bits : {4, 8}) {
      const auto s = QuantSpec::for_values(w, bits);
      const auto qw = fake_quantize(w, s);
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(qw[i] - w[i]) <= 0.5 * s.scale + 1e-12);
    }
  }
  CHECK_THROWS_AS(QuantSpec::for_values(v, 3), Error);
}

TEST_CASE("matrix kernels agree with naive loops") {
  Rng rng(9);
  Matrix a(3, 4), b(4, 5);
  for (double& x : a.data()) x = rng.uniform(-1, 1);
  for (double& x : b.data()) x = rng.uniform(-1, 1);
  Matrix c(3, 5);
  matmul(a, b, c);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  }
  Matrix bad(2, 2);
  CHECK_THROWS_AS(matmul(a, bad, c), Error);
}

TEST_CASE("compensated sum keeps small addends") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}

TEST_CASE("rng streams are deterministic and split independently") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  Rng s1 = c.split(1), s2 = c.split(2);
  CHECK(s1.next_u64() != s2.next_u64());
  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(u.index(6) < 6);
  }
}
