#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tcmass {

inline constexpr int kMaxDim = 3;

using IntVec = std::array<int, kMaxDim>;
using RealVec = std::array<double, kMaxDim>;

/// Position of a point relative to the cell that contains it.
struct CellLocation {
  IntVec cell{};
  RealVec frac{};  ///< fractional coordinate in [0, 1) per axis
};

/// Uniform periodic Cartesian grid in 1, 2 or 3 dimensions.
///
/// Nodes and cells share one index space: node i on axis mu sits at
/// i * spacing[mu], and cell i spans [i, i+1) * spacing[mu]. Linear indices
/// are row-major with axis 0 slowest. Axes beyond `dim()` have extent 1.
class Grid {
 public:
  Grid(int dim, IntVec dims, RealVec spacing);

  int dim() const { return dim_; }
  const IntVec& dims() const { return dims_; }
  const RealVec& spacing() const { return spacing_; }

  std::int64_t num_nodes() const { return num_nodes_; }
  std::int64_t num_cells() const { return num_nodes_; }
  double cell_volume() const;

  /// Periodic stencils of order n need at least 2n cells per axis.
  bool supports_order(int order) const;
  void require_order(int order) const;

  std::int64_t linear_index(const IntVec& index) const;
  IntVec unravel(std::int64_t linear) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  IntVec dims_;
  RealVec spacing_;
  std::int64_t num_nodes_;
};

/// Throws std::domain_error when the position lies outside [0, extent).
CellLocation locate(const Grid& grid, const RealVec& position);

/// Linear index of node (cell + offset) with periodic wrap.
std::int64_t node_id(const Grid& grid, const IntVec& cell, const IntVec& offset);

struct ParticleSet {
  std::vector<RealVec> positions;
  std::vector<double> charges;
  std::vector<RealVec> omegas;  ///< one per particle for tensorial runs, else empty
  double sigma = 1.0;           ///< species prefactor applied once per entry

  std::size_t size() const { return positions.size(); }
  bool has_omega() const { return !omegas.empty(); }

  /// Checks array lengths and that every position is inside the domain.
  void validate(const Grid& grid) const;
};

struct CellRange {
  std::int64_t start = 0;
  std::int64_t count = 0;

  friend bool operator==(const CellRange&, const CellRange&) = default;
};

struct SortedParticles {
  ParticleSet particles;
  std::vector<CellRange> ranges;  ///< one entry per cell, linear cell order
  std::vector<std::size_t> order;  ///< order[k] = input index of sorted particle k
};

/// Stable counting sort by linear cell index.
SortedParticles sort_by_cell(const ParticleSet& particles, const Grid& grid);

}  // namespace tcmass
