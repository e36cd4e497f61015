#include "tcmass/oracle.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tcmass {

namespace {

enum class Mode { signed_fp64, signed_fp32, magnitude };

StencilMatrix scatter(const Grid& grid, const ParticleSet& particles,
                      const Interpolation& interp, CoefficientKind kind, double sigma,
                      Mode mode) {
  particles.validate(grid);
  if (kind == CoefficientKind::tensorial && !particles.has_omega() && particles.size() > 0) {
    throw std::invalid_argument("tensorial assembly requires per-particle omega");
  }
  StencilMatrix store(grid, interp, kind,
                      mode == Mode::signed_fp32 ? AccumulateFormat::fp32 : AccumulateFormat::fp64);

  std::vector<DepositTable> tables;
  for (int gamma = 0; gamma < interp.max_groups(); ++gamma) {
    tables.push_back(build_table(interp, interp.group_base(gamma), store.offsets()));
  }

  const int components = store.components();
  for (std::size_t p = 0; p < particles.size(); ++p) {
    const CellLocation loc = locate(grid, particles.positions[p]);
    const WeightStencil w = weights(interp, loc);
    const CoefficientTensor s = coefficient(
        kind, particles.charges[p],
        kind == CoefficientKind::tensorial ? std::optional<RealVec>(particles.omegas[p])
                                           : std::nullopt);
    for (const auto& e : tables[group_id(interp, loc)].entries) {
      const std::int64_t node = node_id(grid, loc.cell, e.anchor);
      const double ww = w.weights[e.a] * w.weights[e.b];
      for (int c = 0; c < components; ++c) {
        double term = sigma * s[c] * ww;
        if (mode == Mode::magnitude) term = std::abs(term);
        if (mode == Mode::signed_fp32) term = round_to(AccumulateFormat::fp32, term);
        store.add(node, e.offset_index, c, term);
      }
    }
  }
  return store;
}

}  // namespace

StencilMatrix assemble_naive(const Grid& grid, const ParticleSet& particles,
                             const Interpolation& interp, CoefficientKind kind, double sigma,
                             Arithmetic arithmetic) {
  return scatter(grid, particles, interp, kind, sigma,
                 arithmetic == Arithmetic::fp64 ? Mode::signed_fp64 : Mode::signed_fp32);
}

StencilMatrix assemble_magnitude(const Grid& grid, const ParticleSet& particles,
                                 const Interpolation& interp, CoefficientKind kind,
                                 double sigma) {
  return scatter(grid, particles, interp, kind, sigma, Mode::magnitude);
}

}  // namespace tcmass
