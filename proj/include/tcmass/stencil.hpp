#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "tcmass/geometry.hpp"
#include "tcmass/mma.hpp"
#include "tcmass/response.hpp"
#include "tcmass/shape.hpp"

namespace tcmass {

/// Node displacement reduced to its stored half.
struct CanonicalOffset {
  IntVec delta{};
  bool transposed = false;

  friend bool operator==(const CanonicalOffset&, const CanonicalOffset&) = default;
};

/// An offset is canonical iff it is zero or its first nonzero component
/// (axis 0 first) is positive. Non-canonical offsets map to their negation.
/// Throws std::out_of_range when any |delta_mu| > 2 * order.
CanonicalOffset canonical(const Interpolation& interp, const IntVec& delta);

/// Canonical displacements in {-n..n}^d, in lexicographic order.
class OffsetTable {
 public:
  explicit OffsetTable(const Interpolation& interp);

  const Interpolation& interpolation() const { return interp_; }
  int size() const { return static_cast<int>(canonical_.size()); }
  /// (2n+1)^d
  int full_size() const { return static_cast<int>(full_to_canonical_.size()); }
  const IntVec& offset(int index) const { return canonical_[index]; }
  const std::vector<IntVec>& offsets() const { return canonical_; }

  /// Index of a canonical offset, or -1 if delta is out of range or not canonical.
  int index_of(const IntVec& delta) const;

 private:
  int full_index(const IntVec& delta) const;

  Interpolation interp_;
  std::vector<IntVec> canonical_;
  std::vector<int> full_to_canonical_;
};

struct DepositEntry {
  int a = 0;
  int b = 0;
  IntVec anchor{};  ///< anchor node offset relative to the cell
  int offset_index = 0;
  bool transposed = false;
};

/// Maps each local pair (a <= b) of a support group to a stored slot.
struct DepositTable {
  IntVec base{};
  std::vector<DepositEntry> entries;
};

DepositTable build_table(const Interpolation& interp, const IntVec& base,
                         const OffsetTable& offsets);

/// Per-component N_pad x N_pad accumulator block of one support group.
struct LocalBlock {
  int n_pad = 0;
  int components = 0;
  std::vector<double> data;

  LocalBlock() = default;
  LocalBlock(int n_pad, int components)
      : n_pad(n_pad), components(components),
        data(static_cast<std::size_t>(components) * n_pad * n_pad, 0.0) {}

  MatrixRef component(int c) {
    return {data.data() + static_cast<std::size_t>(c) * n_pad * n_pad, n_pad, n_pad, n_pad};
  }
  double at(int c, int a, int b) const {
    return data[(static_cast<std::size_t>(c) * n_pad + a) * n_pad + b];
  }
};

/// Global mass matrix stored by (node, canonical offset, component).
///
/// Slot (g, delta, c) holds M^c_{g, g+delta}; the mirrored entry
/// M^c_{g+delta, g} has the same value. Values live in double storage and
/// are rounded to the accumulate format on every update, so FP32 stores hold
/// exactly FP32-representable values.
class StencilMatrix {
 public:
  StencilMatrix(const Grid& grid, const Interpolation& interp, CoefficientKind kind,
                AccumulateFormat format = AccumulateFormat::fp64);

  const Grid& grid() const { return grid_; }
  const Interpolation& interpolation() const { return offsets_.interpolation(); }
  const OffsetTable& offsets() const { return offsets_; }
  CoefficientKind kind() const { return kind_; }
  int components() const { return component_count(kind_); }
  AccumulateFormat format() const { return format_; }

  std::size_t slot(std::int64_t node, int offset_index, int component) const {
    return (static_cast<std::size_t>(node) * offsets_.size() + offset_index) * components() +
           component;
  }
  double raw(std::int64_t node, int offset_index, int component) const {
    return values_[slot(node, offset_index, component)];
  }
  void add(std::int64_t node, int offset_index, int component, double value) {
    auto& v = values_[slot(node, offset_index, component)];
    v = round_to(format_, v + value);
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Entrywise sum; throws std::invalid_argument when layouts differ.
  void merge(const StencilMatrix& other);

  /// M^c_{g g'}, summing every stored displacement congruent to g' - g
  /// under the periodic wrap. Zero when g' is outside the stencil of g.
  double lookup(std::int64_t g, std::int64_t g2, int component) const;

  /// Dense row-major N_g x N_g matrix per component. Guarded to N_g <= 4096.
  std::vector<std::vector<double>> to_dense() const;

  nlohmann::json to_json() const;
  static StencilMatrix from_json(const nlohmann::json& j);

 private:
  Grid grid_;
  OffsetTable offsets_;
  CoefficientKind kind_;
  AccumulateFormat format_;
  std::vector<double> values_;
};

inline constexpr std::int64_t kDenseNodeLimit = 4096;

/// Adds sigma * D[a][b] for every table entry into the store.
void deposit(StencilMatrix& store, const IntVec& cell, const LocalBlock& block,
             const DepositTable& table, double sigma);

}  // namespace tcmass
