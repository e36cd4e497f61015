#include "tcmass/mma.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tcmass {

TileShape::TileShape(int mt, int nt, int kt) : mt(mt), nt(nt), kt(kt) {
  if (mt < 1 || nt < 1 || kt < 1) {
    throw std::invalid_argument("tile dimensions must be positive");
  }
}

PrecisionPolicy::PrecisionPolicy(InputFormat input, AccumulateFormat accumulate)
    : input_(input), accumulate_(accumulate) {
  if (input == InputFormat::fp64 && accumulate == AccumulateFormat::fp32) {
    throw std::invalid_argument("accumulate format narrower than input format");
  }
}

double PrecisionPolicy::round_input(double x) const {
  if (input_ == InputFormat::fp64) return x;
  return static_cast<double>(truncate_tf32(static_cast<float>(x)));
}

double PrecisionPolicy::round_accumulate(double x) const { return round_to(accumulate_, x); }

float truncate_tf32(float x) {
  constexpr std::uint32_t kDropped = 13;  // 23 - 10 mantissa bits
  constexpr std::uint32_t kMask = (1u << kDropped) - 1;
  std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
  const std::uint32_t lsb = (bits >> kDropped) & 1u;
  bits += (kMask >> 1) + lsb;
  bits &= ~kMask;
  return std::bit_cast<float>(bits);
}

TileProfile TileProfile::parse(std::string_view name) {
  const auto dash = name.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("tile profile must look like fp64-8x8x4");
  }
  const auto precision = name.substr(0, dash);
  TileProfile profile;
  if (precision == "fp64") {
    profile.policy = PrecisionPolicy::fp64();
  } else if (precision == "tf32") {
    profile.policy = PrecisionPolicy::tf32();
  } else {
    throw std::invalid_argument("unknown tile precision: " + std::string(precision));
  }

  std::array<int, 3> dims{};
  std::string_view rest = name.substr(dash + 1);
  for (int i = 0; i < 3; ++i) {
    const auto x = rest.find('x');
    const auto part = i < 2 ? rest.substr(0, x) : rest;
    if ((i < 2 && x == std::string_view::npos) || part.empty()) {
      throw std::invalid_argument("malformed tile shape in profile: " + std::string(name));
    }
    int v = 0;
    for (char ch : part) {
      if (ch < '0' || ch > '9') {
        throw std::invalid_argument("malformed tile shape in profile: " + std::string(name));
      }
      v = v * 10 + (ch - '0');
    }
    dims[i] = v;
    if (i < 2) rest = rest.substr(x + 1);
  }
  profile.shape = TileShape(dims[0], dims[1], dims[2]);
  return profile;
}

std::string TileProfile::name() const {
  std::string s = policy.input() == InputFormat::fp64 ? "fp64-" : "tf32-";
  s += std::to_string(shape.mt) + "x" + std::to_string(shape.nt) + "x" +
       std::to_string(shape.kt);
  return s;
}

TileProfile TileProfile::default_for_order(int order) {
  if (order == 1) return {TileShape(8, 8, 4), PrecisionPolicy::fp64()};
  return {TileShape(16, 16, 8), PrecisionPolicy::tf32()};
}

TilePlan plan(int n, const TileShape& shape, bool symmetric) {
  if (n < 0) throw std::invalid_argument("plan size must be non-negative");
  if (symmetric && shape.mt != shape.nt) {
    throw std::invalid_argument("symmetric tile plans need Mt == Nt");
  }
  TilePlan p;
  p.n = n;
  p.shape = shape;
  p.symmetric = symmetric;
  const int rows = (n + shape.mt - 1) / shape.mt;
  const int cols = (n + shape.nt - 1) / shape.nt;
  p.n_pad = rows * shape.mt;
  for (int r = 0; r < rows; ++r) {
    for (int c = symmetric ? r : 0; c < cols; ++c) p.tiles.push_back({r, c});
  }
  return p;
}

void mma(const TileShape& shape, const PrecisionPolicy& policy, ConstMatrixRef a,
         ConstMatrixRef b, MatrixRef d) {
  if (a.rows != shape.mt || a.cols != shape.kt || b.rows != shape.kt ||
      b.cols != shape.nt || d.rows != shape.mt || d.cols != shape.nt) {
    throw std::invalid_argument("mma operand shapes do not match the tile shape");
  }

  // Loops run i, k, j so every accumulator entry still sums in ascending k.
  if (policy.input() == InputFormat::fp64) {
    for (int i = 0; i < shape.mt; ++i) {
      double* row = &d(i, 0);
      for (int k = 0; k < shape.kt; ++k) {
        const double aik = a(i, k);
        const double* brow = &b.data[k * b.stride];
        for (int j = 0; j < shape.nt; ++j) row[j] += aik * brow[j];
      }
    }
    return;
  }

  // TF32 inputs have 11 significant bits, so each product is exact in FP32
  // and the float addition below is the single FP32 rounding per step.
  thread_local std::vector<float> ra;
  thread_local std::vector<float> rb;
  thread_local std::vector<float> acc;
  ra.resize(static_cast<std::size_t>(shape.mt) * shape.kt);
  rb.resize(static_cast<std::size_t>(shape.kt) * shape.nt);
  acc.resize(static_cast<std::size_t>(shape.nt));
  for (int i = 0; i < shape.mt; ++i) {
    for (int k = 0; k < shape.kt; ++k) {
      ra[i * shape.kt + k] = truncate_tf32(static_cast<float>(a(i, k)));
    }
  }
  for (int k = 0; k < shape.kt; ++k) {
    for (int j = 0; j < shape.nt; ++j) {
      rb[k * shape.nt + j] = truncate_tf32(static_cast<float>(b(k, j)));
    }
  }
  if (policy.accumulate() == AccumulateFormat::fp64) {
    for (int i = 0; i < shape.mt; ++i) {
      double* row = &d(i, 0);
      for (int k = 0; k < shape.kt; ++k) {
        const double aik = ra[i * shape.kt + k];
        const float* brow = &rb[k * shape.nt];
        for (int j = 0; j < shape.nt; ++j) row[j] += aik * static_cast<double>(brow[j]);
      }
    }
    return;
  }
  for (int i = 0; i < shape.mt; ++i) {
    for (int j = 0; j < shape.nt; ++j) acc[j] = static_cast<float>(d(i, j));
    for (int k = 0; k < shape.kt; ++k) {
      const float aik = ra[i * shape.kt + k];
      const float* brow = &rb[k * shape.nt];
      for (int j = 0; j < shape.nt; ++j) acc[j] += aik * brow[j];
    }
    for (int j = 0; j < shape.nt; ++j) d(i, j) = acc[j];
  }
}

}  // namespace tcmass
