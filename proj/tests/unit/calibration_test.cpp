// Copyright 2026 The DASH Runtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "dash/calibration.h"
#include "doctest.h"
#include "fixtures.h"

using namespace dash;
using namespace dash::testing;

namespace {

// Straight-line recomputation: token-weighted mean of |out| / |in| per layer.
std::vector<double> reference_scales(const ToyModel& m, const std::vector<std::vector<int>>& calib) {
  const int L = m.n_layers();
  std::vector<long double> sum(static_cast<std::size_t>(L), 0.0L);
  long count = 0;
  for (const auto& tokens : calib) {
    Matrix h = m.embed(tokens);
    for (int l = 1; l <= L; ++l) {
      const Matrix y = m.layer_forward(h, l, LayerState::kFull, ScaleTable::identity(L));
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        long double nx = 0, ny = 0;
        for (std::size_t j = 0; j < h.cols(); ++j) {
          nx += static_cast<long double>(h(t, j)) * h(t, j);
          ny += static_cast<long double>(y(t, j)) * y(t, j);
        }
        sum[static_cast<std::size_t>(l - 1)] += std::sqrt(ny) / std::sqrt(nx);
      }
      h = y;
    }
    count += static_cast<long>(tokens.size());
  }
  std::vector<double> out;
  for (long double s : sum) out.push_back(static_cast<double>(s / count));
  return out;
}

std::vector<std::vector<int>> random_calib(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<int>> c;
  for (int i = 0; i < n; ++i) c.push_back(random_tokens(rng, 2 + static_cast<int>(rng.index(10))));
  return c;
}

}  // namespace

TEST_CASE("scale table matches a straight-line recomputation") {
  const ToyModel m = tiny_model();
  const auto calib = random_calib(12, 4);
  const ScaleTable t = compute_scale_table(m, calib);
  const auto ref = reference_scales(m, calib);
  REQUIRE(t.n_layers() == m.n_layers());
  for (int l = 1; l <= m.n_layers(); ++l) {
    CHECK(t.lookup(l) == doctest::Approx(ref[static_cast<std::size_t>(l - 1)]).epsilon(1e-12));
    CHECK(t.lookup(l) > 0.0);
  }
  CHECK(t.calib_size() == calib.size());
}

TEST_CASE("scale table is invariant to order and duplication") {
  const ToyModel m = tiny_model(5);
  auto calib = random_calib(10, 8);
  const ScaleTable a = compute_scale_table(m, calib);
  std::reverse(calib.begin(), calib.end());
  const ScaleTable b = compute_scale_table(m, calib);
  auto doubled = calib;
  doubled.insert(doubled.end(), calib.begin(), calib.end());
  const ScaleTable c = compute_scale_table(m, doubled);
  for (int l = 1; l <= m.n_layers(); ++l) {
    CHECK(std::abs(a.lookup(l) - b.lookup(l)) <= 1e-12 * a.lookup(l));
    CHECK(std::abs(a.lookup(l) - c.lookup(l)) <= 1e-12 * a.lookup(l));
  }
  CHECK(a.fingerprint() == b.fingerprint());
}

TEST_CASE("scale table errors and lookups") {
  const ToyModel m = tiny_model();
  CHECK_THROWS_AS(compute_scale_table(m, std::vector<std::vector<int>>{}), Error);
  const ScaleTable id = ScaleTable::identity(4);
  CHECK(id.lookup(1) == 1.0);
  CHECK_THROWS_AS(id.lookup(0), Error);
  CHECK_THROWS_AS(id.lookup(5), Error);
  CHECK_THROWS_AS(ScaleTable({1.0, -0.5}, 1, ""), Error);
  CHECK_THROWS_AS(ScaleTable({1.0, std::nan("")}, 1, ""), Error);
}

TEST_CASE("zero-norm input tokens are skipped with a warning") {
  ScaleAccumulator acc(2);
  Matrix x(2, 3), y(2, 3, 1.0);
  x(1, 0) = 2.0;  // row 0 is all zero
  acc.add(1, x, y);
  acc.add(2, y, y);
  const ScaleTable t = acc.finish(1, "fp");
  CHECK(t.lookup(1) == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK(t.lookup(2) == doctest::Approx(1.0));
  CHECK(t.warnings.size() == 1);
}
