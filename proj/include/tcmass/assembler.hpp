#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcmass/geometry.hpp"
#include "tcmass/mma.hpp"
#include "tcmass/response.hpp"
#include "tcmass/shape.hpp"
#include "tcmass/stencil.hpp"

namespace tcmass {

struct AssemblyOptions {
  TileProfile profile;
  /// Compute only upper-triangle tiles when Mt == Nt.
  bool skip_lower_tiles = true;
  /// Particles staged per pass over a cell; batches persist across chunks.
  int chunk_size = 64;
  /// Worker threads; > 1 uses private partial stores merged in thread order.
  int threads = 1;
};

struct ParticleGroup {
  int id = 0;
  std::vector<std::size_t> members;  ///< indices into the cell's particle list
};

/// Splits one cell's particles by support group, in ascending group id.
/// Empty groups are omitted.
std::vector<ParticleGroup> partition_groups(const Interpolation& interp,
                                            std::span<const CellLocation> locations);

/// MMA operands of one particle batch.
///
/// `a` holds one extent x Kt block per component with column k equal to the
/// weights of particle k scaled by its coefficient. `b` is Kt x extent with
/// row k equal to the unscaled weights. Everything past `count` particles or
/// past N support nodes is zero.
struct BatchOperands {
  int n = 0;
  int extent = 0;
  int kt = 0;
  int components = 0;
  int count = 0;
  std::vector<double> a;
  std::vector<double> b;

  ConstMatrixRef a_block(int component) const {
    return {a.data() + static_cast<std::size_t>(component) * extent * kt, extent, kt, kt};
  }
  ConstMatrixRef b_block() const { return {b.data(), kt, extent, extent}; }
};

/// Operands for batch `batch` of a group: particles [batch*Kt, batch*Kt + Kt).
/// Throws std::out_of_range when the batch index is past the last batch.
BatchOperands build_batch(const Interpolation& interp, std::span<const WeightStencil> weights,
                          std::span<const CoefficientTensor> coefficients, int batch, int kt,
                          int extent, int components);

struct GroupAccumulator {
  int id = 0;
  IntVec base{};
  std::size_t particles = 0;
  LocalBlock block;
};

struct CellAccumulator {
  IntVec cell{};
  TilePlan plan;
  std::vector<GroupAccumulator> groups;  ///< nonempty groups, ascending id
};

/// Accumulates one cell's per-group local mass matrices with tiled MMA.
/// Every particle in `range` must lie in `cell`. No sigma is applied.
CellAccumulator assemble_cell(const Grid& grid, const ParticleSet& particles, CellRange range,
                              const IntVec& cell, const Interpolation& interp,
                              CoefficientKind kind, const AssemblyOptions& options);

/// Global mass matrix from cell-sorted particles. Throws std::invalid_argument
/// when the ranges do not describe a cell-sorted particle set.
StencilMatrix assemble(const Grid& grid, const SortedParticles& sorted,
                       const Interpolation& interp, CoefficientKind kind,
                       const AssemblyOptions& options);

}  // namespace tcmass
