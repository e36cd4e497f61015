#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tcmass/mma.hpp"
#include "tcmass/rng.hpp"

using namespace tcmass;

namespace {

struct Dense {
  int rows;
  int cols;
  std::vector<double> v;

  Dense(int r, int c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}
  MatrixRef ref() { return {v.data(), rows, cols, cols}; }
  double& operator()(int i, int j) { return v[i * cols + j]; }
};

Dense random_dense(CounterRng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
  Dense m(r, c);
  for (auto& x : m.v) x = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("mma with identity and zero operands") {
  const TileShape shape(4, 4, 4);
  CounterRng rng(1);
  Dense a = random_dense(rng, 4, 4);
  Dense eye(4, 4);
  for (int i = 0; i < 4; ++i) eye(i, i) = 1.0;
  Dense d(4, 4);
  mma(shape, PrecisionPolicy::fp64(), a.ref(), eye.ref(), d.ref());
  CHECK(d.v == a.v);

  Dense zero(4, 4);
  Dense d0 = random_dense(rng, 4, 4);
  const auto before = d0.v;
  mma(shape, PrecisionPolicy::fp64(), zero.ref(), a.ref(), d0.ref());
  CHECK(d0.v == before);
}

TEST_CASE("mma 2x2 example") {
  const TileShape shape(2, 2, 2);
  Dense a(2, 2);
  a.v = {1, 2, 3, 4};
  Dense b(2, 2);
  b.v = {5, 6, 7, 8};
  for (auto policy : {PrecisionPolicy::fp64(), PrecisionPolicy::tf32()}) {
    Dense d(2, 2);
    mma(shape, policy, a.ref(), b.ref(), d.ref());
    CHECK(d.v == std::vector<double>{19, 22, 43, 50});
  }
}

TEST_CASE("mma rejects mismatched operands") {
  const TileShape shape(2, 2, 2);
  Dense a(2, 3);
  Dense b(2, 2);
  Dense d(2, 2);
  CHECK_THROWS_AS(mma(shape, PrecisionPolicy::fp64(), a.ref(), b.ref(), d.ref()),
                  std::invalid_argument);
  Dense a2(2, 2);
  Dense d2(3, 2);
  CHECK_THROWS_AS(mma(shape, PrecisionPolicy::fp64(), a2.ref(), b.ref(), d2.ref()),
                  std::invalid_argument);
}

TEST_CASE("tile shape and policy validation") {
  CHECK_THROWS_AS(TileShape(0, 8, 4), std::invalid_argument);
  CHECK_THROWS_AS(PrecisionPolicy(InputFormat::fp64, AccumulateFormat::fp32),
                  std::invalid_argument);
  CHECK_NOTHROW(PrecisionPolicy(InputFormat::tf32, AccumulateFormat::fp64));
}

TEST_CASE("tf32 rounding") {
  CHECK(truncate_tf32(1.0f) == 1.0f);
  CHECK(truncate_tf32(1.0f + 0x1.0p-10f) == 1.0f + 0x1.0p-10f);
  // exact tie, rounds to the even mantissa
  CHECK(truncate_tf32(1.0f + 0x1.0p-11f) == 1.0f);
  CHECK(truncate_tf32(1.0f + 0x1.0p-10f + 0x1.0p-11f) == 1.0f + 0x1.0p-9f);
  CHECK(truncate_tf32(1.0f + 0x1.0p-11f + 0x1.0p-20f) == 1.0f + 0x1.0p-10f);
  CHECK(truncate_tf32(-1.5f) == -1.5f);
  CHECK(truncate_tf32(0.0f) == 0.0f);

  CounterRng rng(2);
  for (int s = 0; s < 10000; ++s) {
    const float x = static_cast<float>(rng.uniform(-1e3, 1e3));
    const float t = truncate_tf32(x);
    CHECK(truncate_tf32(t) == t);
    CHECK(std::abs(t - x) <= std::abs(x) * 0x1.0p-11f);
    // low 13 mantissa bits cleared
    float scaled = std::abs(t);
    int e = 0;
    std::frexp(scaled, &e);
    const double m = std::ldexp(scaled, 11 - e);
    CHECK(m == std::floor(m));
  }
}

TEST_CASE("profile parsing") {
  const auto p = TileProfile::parse("tf32-16x16x8");
  CHECK(p.shape == TileShape(16, 16, 8));
  CHECK(p.policy == PrecisionPolicy::tf32());
  CHECK(p.name() == "tf32-16x16x8");
  CHECK(TileProfile::parse("fp64-8x8x4") == TileProfile::default_for_order(1));
  CHECK(TileProfile::parse("tf32-16x16x8") == TileProfile::default_for_order(2));
  CHECK(TileProfile::parse("fp64-3x5x7").shape == TileShape(3, 5, 7));
  for (const char* bad : {"fp64", "fp16-8x8x4", "fp64-8x8", "fp64-8xx4", "fp64-0x8x4",
                          "fp64-8x8x4x2", "fp64-a8x8x4"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(TileProfile::parse(bad), std::invalid_argument);
  }
}

TEST_CASE("tile plan examples") {
  auto p = plan(8, TileShape(8, 8, 4), false);
  CHECK(p.n_pad == 8);
  CHECK(p.tiles == std::vector<TileCoord>{{0, 0}});

  p = plan(27, TileShape(16, 16, 8), true);
  CHECK(p.n_pad == 32);
  CHECK(p.tiles == std::vector<TileCoord>{{0, 0}, {0, 1}, {1, 1}});

  p = plan(5, TileShape(2, 2, 1), false);
  CHECK(p.n_pad == 6);
  CHECK(p.tiles.size() == 9);

  CHECK_THROWS_AS(plan(8, TileShape(8, 4, 4), true), std::invalid_argument);
  CHECK(plan(0, TileShape(8, 8, 4), false).tiles.empty());
}

TEST_CASE("tile plans cover the upper triangle exactly once") {
  for (int n = 1; n <= 40; ++n) {
    for (int t : {1, 2, 3, 4, 8, 16}) {
      const TileShape shape(t, t, 2);
      for (bool sym : {false, true}) {
        const auto p = plan(n, shape, sym);
        CHECK(p.n_pad % t == 0);
        CHECK(p.n_pad >= n);
        CHECK(p.n_pad - n < t);
        std::set<std::pair<int, int>> covered;
        for (const auto& tile : p.tiles) {
          if (sym) CHECK(tile.col >= tile.row);
          for (int i = 0; i < t; ++i)
            for (int j = 0; j < t; ++j) {
              const bool fresh =
                  covered.insert({tile.row * t + i, tile.col * t + j}).second;
              CHECK(fresh);
            }
        }
        for (int a = 0; a < n; ++a)
          for (int b = sym ? a : 0; b < n; ++b) CHECK(covered.count({a, b}) == 1);
      }
    }
  }
}

TEST_CASE("fp64 mma is bit-identical to an ascending-k triple loop") {
  CounterRng rng(3);
  for (const auto& shape : {TileShape(8, 8, 4), TileShape(16, 16, 8), TileShape(3, 5, 7)}) {
    for (int trial = 0; trial < 50; ++trial) {
      Dense a = random_dense(rng, shape.mt, shape.kt, -10, 10);
      Dense b = random_dense(rng, shape.kt, shape.nt, -10, 10);
      Dense d = random_dense(rng, shape.mt, shape.nt, -10, 10);
      Dense ref = d;
      for (int i = 0; i < shape.mt; ++i)
        for (int j = 0; j < shape.nt; ++j)
          for (int k = 0; k < shape.kt; ++k) {
            const double prod = a(i, k) * b(k, j);
            ref(i, j) = ref(i, j) + prod;
          }
      mma(shape, PrecisionPolicy::fp64(), a.ref(), b.ref(), d.ref());
      CHECK(d.v == ref.v);
    }
  }
}

TEST_CASE("mma respects operand strides") {
  const TileShape shape(2, 2, 2);
  // 2x2 views inside 2x3 buffers
  std::vector<double> a{1, 2, 99, 3, 4, 99};
  std::vector<double> b{5, 6, 99, 7, 8, 99};
  std::vector<double> d{0, 0, -1, 0, 0, -1};
  mma(shape, PrecisionPolicy::fp64(), ConstMatrixRef(a.data(), 2, 2, 3),
      ConstMatrixRef(b.data(), 2, 2, 3), MatrixRef{d.data(), 2, 2, 3});
  CHECK(d == std::vector<double>{19, 22, -1, 43, 50, -1});
}

TEST_CASE("tf32 mma stays within the rounding bound") {
  // Each operand carries relative error <= 2^-11 and every FP32 addition adds
  // at most 2^-24 of the running magnitude.
  CounterRng rng(4);
  const TileShape shape(16, 16, 8);
  for (int trial = 0; trial < 50; ++trial) {
    Dense a = random_dense(rng, 16, 8);
    Dense b = random_dense(rng, 8, 16);
    Dense d(16, 16);
    mma(shape, PrecisionPolicy::tf32(), a.ref(), b.ref(), d.ref());
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        double exact = 0.0;
        double mag = 0.0;
        for (int k = 0; k < 8; ++k) {
          exact += a(i, k) * b(k, j);
          mag += std::abs(a(i, k) * b(k, j));
        }
        const double bound = (2.0 * 0x1.0p-11 + 0x1.0p-22 + 8 * 0x1.0p-24) * mag * 1.01;
        CHECK(std::abs(d(i, j) - exact) <= bound);
        CHECK(static_cast<double>(static_cast<float>(d(i, j))) == d(i, j));
      }
  }
}

TEST_CASE("tf32 mma is exact on small integers") {
  CounterRng rng(5);
  const TileShape shape(8, 8, 4);
  Dense a(8, 4);
  Dense b(4, 8);
  for (auto& x : a.v) x = std::floor(rng.uniform(-50, 50));
  for (auto& x : b.v) x = std::floor(rng.uniform(-50, 50));
  Dense d(8, 8);
  Dense e(8, 8);
  mma(shape, PrecisionPolicy::tf32(), a.ref(), b.ref(), d.ref());
  mma(shape, PrecisionPolicy::fp64(), a.ref(), b.ref(), e.ref());
  CHECK(d.v == e.v);
}

TEST_CASE("round_to and policy rounding") {
  CHECK(round_to(AccumulateFormat::fp64, 0.1) == 0.1);
  CHECK(round_to(AccumulateFormat::fp32, 0.1) == static_cast<double>(0.1f));
  CHECK(PrecisionPolicy::tf32().round_input(1.0 + 0x1.0p-12) == 1.0);
  CHECK(PrecisionPolicy::fp64().round_input(1.0 + 0x1.0p-12) == 1.0 + 0x1.0p-12);
}
