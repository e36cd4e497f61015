#pragma once

#include <cstddef>
#include <cstdint>

#include "tcmass/geometry.hpp"
#include "tcmass/response.hpp"
#include "tcmass/shape.hpp"
#include "tcmass/stencil.hpp"

namespace tcmass {

struct ErrorMetrics {
  /// max |test - ref| / scale over stored entries, where scale is the
  /// entry's contribution magnitude when supplied and |ref| otherwise.
  double max_rel = 0.0;
  /// ||test - ref||_F / ||ref||_F over all stored entries and components.
  double frobenius_rel = 0.0;
  double max_abs = 0.0;
};

/// Compares two stores with identical layout. `magnitude` may be null.
ErrorMetrics compare(const StencilMatrix& test, const StencilMatrix& reference,
                     const StencilMatrix* magnitude = nullptr);

/// Sum over all node pairs (g, g') of M^c_{g g'}: diagonal slots count once,
/// off-diagonal slots twice (the mirrored entry has the same value).
double total_sum(const StencilMatrix& store, int component);

/// Largest relative gap between sum_{g,g'} M^c and sigma * sum_p s_p^c over
/// all components, normalized by sigma * sum_p |s_p^c|.
double conservation_defect(const StencilMatrix& store, const ParticleSet& particles,
                           CoefficientKind kind, double sigma);

/// max |M^c_{g g'} - M^c_{g' g}| through lookup, over the stored slots of
/// every `node_stride`-th node.
double spatial_symmetry_defect(const StencilMatrix& store, std::int64_t node_stride = 1);

/// max |M^{ij}_{g g'} - M^{ji}_{g' g}| through lookup, over every stored slot,
/// relative to the largest stored magnitude. Zero for scalar stores.
double component_transpose_defect(const StencilMatrix& store, std::int64_t node_stride = 1);

struct PartitionOfUnity {
  double max_sum_defect = 0.0;  ///< max |sum_a W_a - 1|
  double min_weight = 0.0;
};

/// Weight checks on up to `sample` particles taken at a uniform stride.
PartitionOfUnity check_partition_of_unity(const Grid& grid, const ParticleSet& particles,
                                          const Interpolation& interp, std::size_t sample);

}  // namespace tcmass
