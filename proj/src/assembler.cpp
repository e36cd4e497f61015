#include "tcmass/assembler.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

namespace tcmass {

namespace {

int padded(int n, int tile) { return (n + tile - 1) / tile * tile; }

void fill_batch(BatchOperands& ops, std::span<const WeightStencil> weights,
                std::span<const CoefficientTensor> coefficients, std::size_t first, int count) {
  std::fill(ops.a.begin(), ops.a.end(), 0.0);
  std::fill(ops.b.begin(), ops.b.end(), 0.0);
  ops.count = count;
  for (int k = 0; k < count; ++k) {
    const WeightStencil& w = weights[first + k];
    const CoefficientTensor& s = coefficients[first + k];
    for (int a = 0; a < ops.n; ++a) {
      const double wa = w.weights[a];
      ops.b[static_cast<std::size_t>(k) * ops.extent + a] = wa;
      for (int c = 0; c < ops.components; ++c) {
        ops.a[(static_cast<std::size_t>(c) * ops.extent + a) * ops.kt + k] = wa * s[c];
      }
    }
  }
}

BatchOperands make_operands(int n, int extent, int kt, int components) {
  BatchOperands ops;
  ops.n = n;
  ops.extent = extent;
  ops.kt = kt;
  ops.components = components;
  ops.a.assign(static_cast<std::size_t>(components) * extent * kt, 0.0);
  ops.b.assign(static_cast<std::size_t>(kt) * extent, 0.0);
  return ops;
}

/// Reusable per-thread workspace for the cell loop.
class CellWorker {
 public:
  CellWorker(const Grid& grid, const ParticleSet& particles, const Interpolation& interp,
             CoefficientKind kind, const AssemblyOptions& options)
      : grid_(grid),
        particles_(particles),
        interp_(interp),
        kind_(kind),
        options_(options),
        components_(component_count(kind)),
        plan_(plan(interp.support_size(), options.profile.shape,
                   options.skip_lower_tiles &&
                       options.profile.shape.mt == options.profile.shape.nt)),
        extent_(std::max(plan_.n_pad, padded(interp.support_size(), options.profile.shape.nt))),
        operands_(make_operands(interp.support_size(), extent_, options.profile.shape.kt,
                                components_)),
        groups_(interp.max_groups()) {
    if (kind == CoefficientKind::tensorial && !particles.has_omega() && particles.size() > 0) {
      throw std::invalid_argument("tensorial assembly requires per-particle omega");
    }
    if (options.chunk_size < 1) throw std::invalid_argument("chunk size must be positive");
    for (auto& g : groups_) {
      g.block = LocalBlock(extent_, components_);
      g.weights.reserve(options.profile.shape.kt);
      g.coefficients.reserve(options.profile.shape.kt);
    }
  }

  const TilePlan& tile_plan() const { return plan_; }

  void accumulate(CellRange range, const IntVec& cell) {
    for (auto& g : groups_) {
      if (g.particles > 0) std::fill(g.block.data.begin(), g.block.data.end(), 0.0);
      g.particles = 0;
      g.weights.clear();
      g.coefficients.clear();
    }

    const int kt = options_.profile.shape.kt;
    const std::int64_t end = range.start + range.count;
    for (std::int64_t chunk = range.start; chunk < end; chunk += options_.chunk_size) {
      const std::int64_t chunk_end = std::min<std::int64_t>(end, chunk + options_.chunk_size);
      for (std::int64_t p = chunk; p < chunk_end; ++p) {
        const CellLocation loc = locate(grid_, particles_.positions[p]);
        for (int mu = 0; mu < grid_.dim(); ++mu) {
          if (loc.cell[mu] != cell[mu]) {
            throw std::invalid_argument("particles are not sorted by cell");
          }
        }
        auto& group = groups_[group_id(interp_, loc)];
        group.weights.push_back(weights(interp_, loc));
        group.coefficients.push_back(coefficient(
            kind_, particles_.charges[p],
            kind_ == CoefficientKind::tensorial ? std::optional<RealVec>(particles_.omegas[p])
                                                : std::nullopt));
        ++group.particles;
        if (static_cast<int>(group.weights.size()) == kt) flush(group);
      }
    }
    for (auto& g : groups_) {
      if (!g.weights.empty()) flush(g);
    }
  }

  void deposit_into(StencilMatrix& store, const IntVec& cell,
                    const std::vector<DepositTable>& tables, double sigma) const {
    for (std::size_t gamma = 0; gamma < groups_.size(); ++gamma) {
      if (groups_[gamma].particles > 0) {
        deposit(store, cell, groups_[gamma].block, tables[gamma], sigma);
      }
    }
  }

  CellAccumulator snapshot(const IntVec& cell) const {
    CellAccumulator acc;
    acc.cell = cell;
    acc.plan = plan_;
    for (std::size_t gamma = 0; gamma < groups_.size(); ++gamma) {
      const auto& g = groups_[gamma];
      if (g.particles == 0) continue;
      GroupAccumulator out;
      out.id = static_cast<int>(gamma);
      out.base = interp_.group_base(out.id);
      out.particles = g.particles;
      out.block = g.block;
      acc.groups.push_back(std::move(out));
    }
    return acc;
  }

 private:
  struct Group {
    LocalBlock block;
    std::size_t particles = 0;
    std::vector<WeightStencil> weights;
    std::vector<CoefficientTensor> coefficients;
  };

  void flush(Group& group) {
    fill_batch(operands_, group.weights, group.coefficients, 0,
               static_cast<int>(group.weights.size()));
    const TileShape& shape = options_.profile.shape;
    const ConstMatrixRef b = operands_.b_block();
    for (int c = 0; c < components_; ++c) {
      const ConstMatrixRef a = operands_.a_block(c);
      const MatrixRef d = group.block.component(c);
      for (const TileCoord& t : plan_.tiles) {
        mma(shape, options_.profile.policy,
            ConstMatrixRef(a.data + static_cast<std::size_t>(t.row) * shape.mt * a.stride,
                           shape.mt, shape.kt, a.stride),
            ConstMatrixRef(b.data + static_cast<std::size_t>(t.col) * shape.nt, shape.kt,
                           shape.nt, b.stride),
            MatrixRef{d.data + static_cast<std::size_t>(t.row) * shape.mt * d.stride +
                          static_cast<std::size_t>(t.col) * shape.nt,
                      shape.mt, shape.nt, d.stride});
      }
    }
    group.weights.clear();
    group.coefficients.clear();
  }

  const Grid& grid_;
  const ParticleSet& particles_;
  Interpolation interp_;
  CoefficientKind kind_;
  AssemblyOptions options_;
  int components_;
  TilePlan plan_;
  int extent_;
  BatchOperands operands_;
  std::vector<Group> groups_;
};

void check_ranges(const Grid& grid, const SortedParticles& sorted) {
  if (static_cast<std::int64_t>(sorted.ranges.size()) != grid.num_cells()) {
    throw std::invalid_argument("cell ranges do not match the grid's cell count");
  }
  std::int64_t next = 0;
  for (const auto& r : sorted.ranges) {
    if (r.start != next || r.count < 0) {
      throw std::invalid_argument("cell ranges are not contiguous and nondecreasing");
    }
    next += r.count;
  }
  if (next != static_cast<std::int64_t>(sorted.particles.size())) {
    throw std::invalid_argument("cell ranges do not cover every particle");
  }
}

}  // namespace

std::vector<ParticleGroup> partition_groups(const Interpolation& interp,
                                            std::span<const CellLocation> locations) {
  std::vector<ParticleGroup> all(interp.max_groups());
  for (std::size_t p = 0; p < locations.size(); ++p) {
    all[group_id(interp, locations[p])].members.push_back(p);
  }
  std::vector<ParticleGroup> out;
  for (int gamma = 0; gamma < interp.max_groups(); ++gamma) {
    if (all[gamma].members.empty()) continue;
    all[gamma].id = gamma;
    out.push_back(std::move(all[gamma]));
  }
  return out;
}

BatchOperands build_batch(const Interpolation& interp, std::span<const WeightStencil> weights,
                          std::span<const CoefficientTensor> coefficients, int batch, int kt,
                          int extent, int components) {
  if (weights.size() != coefficients.size()) {
    throw std::invalid_argument("weights and coefficients differ in length");
  }
  if (extent < interp.support_size()) {
    throw std::invalid_argument("operand extent smaller than the support size");
  }
  const std::size_t batches = (weights.size() + kt - 1) / kt;
  if (batch < 0 || static_cast<std::size_t>(batch) >= batches) {
    throw std::out_of_range("batch index past the last batch");
  }
  BatchOperands ops = make_operands(interp.support_size(), extent, kt, components);
  const std::size_t first = static_cast<std::size_t>(batch) * kt;
  const int count = static_cast<int>(std::min<std::size_t>(kt, weights.size() - first));
  fill_batch(ops, weights, coefficients, first, count);
  return ops;
}

CellAccumulator assemble_cell(const Grid& grid, const ParticleSet& particles, CellRange range,
                              const IntVec& cell, const Interpolation& interp,
                              CoefficientKind kind, const AssemblyOptions& options) {
  CellWorker worker(grid, particles, interp, kind, options);
  worker.accumulate(range, cell);
  return worker.snapshot(cell);
}

StencilMatrix assemble(const Grid& grid, const SortedParticles& sorted,
                       const Interpolation& interp, CoefficientKind kind,
                       const AssemblyOptions& options) {
  check_ranges(grid, sorted);
  const auto format = options.profile.policy.accumulate();
  StencilMatrix result(grid, interp, kind, format);

  std::vector<DepositTable> tables;
  for (int gamma = 0; gamma < interp.max_groups(); ++gamma) {
    tables.push_back(build_table(interp, interp.group_base(gamma), result.offsets()));
  }

  const double sigma = sorted.particles.sigma;
  const std::int64_t cells = grid.num_cells();
  auto run_cells = [&](std::int64_t first, std::int64_t last, StencilMatrix& store) {
    CellWorker worker(grid, sorted.particles, interp, kind, options);
    for (std::int64_t c = first; c < last; ++c) {
      const CellRange& range = sorted.ranges[c];
      if (range.count == 0) continue;
      const IntVec cell = grid.unravel(c);
      worker.accumulate(range, cell);
      worker.deposit_into(store, cell, tables, sigma);
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(cells)));
  if (threads == 1) {
    run_cells(0, cells, result);
    return result;
  }

  std::vector<StencilMatrix> partials(threads, StencilMatrix(grid, interp, kind, format));
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      const std::int64_t first = cells * t / threads;
      const std::int64_t last = cells * (t + 1) / threads;
      workers.emplace_back([&, t, first, last] {
        try {
          run_cells(first, last, partials[t]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& p : partials) result.merge(p);
  return result;
}

}  // namespace tcmass
