#pragma once

#include <array>

#include "tcmass/geometry.hpp"

namespace tcmass {

/// Largest support handled: 3^3 nodes (second order, three dimensions).
inline constexpr int kMaxSupport = 27;

/// B-spline interpolation of a given order on a grid of a given dimension.
///
/// Local support nodes are numbered lexicographically with axis 0 slowest:
/// node a has per-axis offsets k_mu in [0, order] and
/// a = sum_mu k_mu * (order+1)^(dim-1-mu).
class Interpolation {
 public:
  Interpolation(int order, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }

  /// (order+1)^dim nodes in every particle's support.
  int support_size() const { return support_size_; }
  /// Upper bound on distinct supports inside one cell: order^dim.
  int max_groups() const { return max_groups_; }

  IntVec local_offset(int a) const;

  /// Base offsets of support group `gamma` (inverse of group_id).
  IntVec group_base(int gamma) const;

  friend bool operator==(const Interpolation&, const Interpolation&) = default;

 private:
  int order_;
  int dim_;
  int support_size_;
  int max_groups_;
};

/// Order 1: hat function. Order 2: quadratic B-spline on [-3/2, 3/2].
/// Throws std::invalid_argument for any other order.
double bspline_1d(int order, double t);

/// Base offset of the stencil relative to the cell index along one axis.
int support_base_1d(int order, double frac);
IntVec support_base(const Interpolation& interp, const CellLocation& loc);

struct WeightStencil {
  IntVec base{};
  std::array<double, kMaxSupport> weights{};  ///< first support_size() entries used
};

WeightStencil weights(const Interpolation& interp, const CellLocation& loc);

/// Support-group id: bit mu is set iff the base offset on axis mu is 0.
int group_id(const Interpolation& interp, const CellLocation& loc);

}  // namespace tcmass
