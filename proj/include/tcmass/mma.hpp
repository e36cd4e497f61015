#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tcmass {

/// Shape (Mt, Nt, Kt) of a matrix-multiply-accumulate tile: the accumulator
/// is Mt x Nt and the contraction runs over Kt.
struct TileShape {
  int mt = 8;
  int nt = 8;
  int kt = 4;

  TileShape() = default;
  TileShape(int mt, int nt, int kt);

  friend bool operator==(const TileShape&, const TileShape&) = default;
};

enum class InputFormat { fp64, tf32 };
enum class AccumulateFormat { fp64, fp32 };

/// Operand and accumulator formats of an MMA backend. The accumulator is
/// never narrower than the inputs.
class PrecisionPolicy {
 public:
  PrecisionPolicy(InputFormat input, AccumulateFormat accumulate);

  static PrecisionPolicy fp64() { return {InputFormat::fp64, AccumulateFormat::fp64}; }
  static PrecisionPolicy tf32() { return {InputFormat::tf32, AccumulateFormat::fp32}; }

  InputFormat input() const { return input_; }
  AccumulateFormat accumulate() const { return accumulate_; }

  double round_input(double x) const;
  double round_accumulate(double x) const;

  friend bool operator==(const PrecisionPolicy&, const PrecisionPolicy&) = default;

 private:
  InputFormat input_;
  AccumulateFormat accumulate_;
};

/// Rounds to an accumulate format without a policy object.
inline double round_to(AccumulateFormat format, double x) {
  return format == AccumulateFormat::fp32 ? static_cast<double>(static_cast<float>(x)) : x;
}

/// Round-to-nearest-even of an FP32 value to 10 explicit mantissa bits.
float truncate_tf32(float x);

/// Named tile backend, e.g. "fp64-8x8x4" or "tf32-16x16x8".
struct TileProfile {
  TileShape shape;
  PrecisionPolicy policy = PrecisionPolicy::fp64();

  static TileProfile parse(std::string_view name);
  std::string name() const;
  /// FP64 (8,8,4) for order 1, TF32/FP32 (16,16,8) for order 2.
  static TileProfile default_for_order(int order);

  friend bool operator==(const TileProfile&, const TileProfile&) = default;
};

struct TileCoord {
  int row = 0;
  int col = 0;

  friend bool operator==(const TileCoord&, const TileCoord&) = default;
};

/// Tiles covering an N x N accumulator padded to a multiple of the tile size.
struct TilePlan {
  int n = 0;
  int n_pad = 0;
  TileShape shape;
  bool symmetric = false;
  std::vector<TileCoord> tiles;  ///< row-major; upper triangle only when symmetric
};

/// Throws std::invalid_argument for a symmetric plan with Mt != Nt.
TilePlan plan(int n, const TileShape& shape, bool symmetric);

/// Strided row-major view of a dense matrix.
struct MatrixRef {
  double* data;
  int rows;
  int cols;
  int stride;

  double& operator()(int r, int c) const { return data[r * stride + c]; }
};

struct ConstMatrixRef {
  const double* data;
  int rows;
  int cols;
  int stride;

  ConstMatrixRef(const double* data, int rows, int cols, int stride)
      : data(data), rows(rows), cols(cols), stride(stride) {}
  ConstMatrixRef(const MatrixRef& m)  // NOLINT(google-explicit-constructor)
      : data(m.data), rows(m.rows), cols(m.cols), stride(m.stride) {}

  double operator()(int r, int c) const { return data[r * stride + c]; }
};

/// D <- D + A B on one tile.
///
/// Inputs are rounded to the policy's input format, every product is formed
/// exactly (TF32 x TF32 fits in FP64), and products are added to each
/// accumulator entry in ascending k with rounding to the accumulate format
/// after each addition. Throws std::invalid_argument on a shape mismatch.
void mma(const TileShape& shape, const PrecisionPolicy& policy, ConstMatrixRef a,
         ConstMatrixRef b, MatrixRef d);

}  // namespace tcmass
