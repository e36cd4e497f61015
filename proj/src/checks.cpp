#include "tcmass/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tcmass {

namespace {

bool same_layout(const StencilMatrix& a, const StencilMatrix& b) {
  return a.grid() == b.grid() && a.interpolation() == b.interpolation() &&
         a.kind() == b.kind();
}

int transpose_component(int c) { return 3 * (c % 3) + c / 3; }

template <typename Fn>
void for_each_slot(const StencilMatrix& store, std::int64_t node_stride, Fn&& fn) {
  const Grid& grid = store.grid();
  for (std::int64_t g = 0; g < grid.num_nodes(); g += std::max<std::int64_t>(1, node_stride)) {
    const IntVec cell = grid.unravel(g);
    for (int k = 0; k < store.offsets().size(); ++k) {
      fn(g, node_id(grid, cell, store.offsets().offset(k)), k);
    }
  }
}

}  // namespace

ErrorMetrics compare(const StencilMatrix& test, const StencilMatrix& reference,
                     const StencilMatrix* magnitude) {
  if (!same_layout(test, reference) || (magnitude && !same_layout(test, *magnitude))) {
    throw std::invalid_argument("compared stores have different layouts");
  }
  ErrorMetrics m;
  const auto t = test.values();
  const auto r = reference.values();
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double diff = std::abs(t[i] - r[i]);
    diff2 += diff * diff;
    ref2 += r[i] * r[i];
    m.max_abs = std::max(m.max_abs, diff);
    if (diff == 0.0) continue;
    const double scale = magnitude ? magnitude->values()[i] : std::abs(r[i]);
    m.max_rel = std::max(
        m.max_rel, scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity());
  }
  m.frobenius_rel = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : (diff2 > 0.0 ? INFINITY : 0.0);
  return m;
}

double total_sum(const StencilMatrix& store, int component) {
  const int zero = store.offsets().index_of({0, 0, 0});
  double sum = 0.0;
  for (std::int64_t g = 0; g < store.grid().num_nodes(); ++g) {
    for (int k = 0; k < store.offsets().size(); ++k) {
      const double v = store.raw(g, k, component);
      sum += k == zero ? v : 2.0 * v;
    }
  }
  return sum;
}

double conservation_defect(const StencilMatrix& store, const ParticleSet& particles,
                           CoefficientKind kind, double sigma) {
  const int components = component_count(kind);
  std::vector<double> expected(components, 0.0);
  std::vector<double> scale(components, 0.0);
  for (std::size_t p = 0; p < particles.size(); ++p) {
    const CoefficientTensor s = coefficient(
        kind, particles.charges[p],
        kind == CoefficientKind::tensorial ? std::optional<RealVec>(particles.omegas[p])
                                           : std::nullopt);
    for (int c = 0; c < components; ++c) {
      expected[c] += sigma * s[c];
      scale[c] += std::abs(sigma * s[c]);
    }
  }
  double worst = 0.0;
  for (int c = 0; c < components; ++c) {
    const double gap = std::abs(total_sum(store, c) - expected[c]);
    if (gap == 0.0) continue;
    worst = std::max(worst, scale[c] > 0.0 ? gap / scale[c] : INFINITY);
  }
  return worst;
}

double spatial_symmetry_defect(const StencilMatrix& store, std::int64_t node_stride) {
  double worst = 0.0;
  for_each_slot(store, node_stride, [&](std::int64_t g, std::int64_t g2, int) {
    for (int c = 0; c < store.components(); ++c) {
      worst = std::max(worst, std::abs(store.lookup(g, g2, c) - store.lookup(g2, g, c)));
    }
  });
  return worst;
}

double component_transpose_defect(const StencilMatrix& store, std::int64_t node_stride) {
  if (store.kind() == CoefficientKind::scalar) return 0.0;
  double largest = 0.0;
  for (double v : store.values()) largest = std::max(largest, std::abs(v));
  double worst = 0.0;
  for_each_slot(store, node_stride, [&](std::int64_t g, std::int64_t g2, int) {
    for (int c = 0; c < store.components(); ++c) {
      worst = std::max(worst, std::abs(store.lookup(g, g2, c) -
                                       store.lookup(g2, g, transpose_component(c))));
    }
  });
  return largest > 0.0 ? worst / largest : worst;
}

PartitionOfUnity check_partition_of_unity(const Grid& grid, const ParticleSet& particles,
                                          const Interpolation& interp, std::size_t sample) {
  PartitionOfUnity out;
  out.min_weight = particles.size() > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  if (particles.size() == 0 || sample == 0) return out;
  const std::size_t stride = std::max<std::size_t>(1, particles.size() / sample);
  for (std::size_t p = 0; p < particles.size(); p += stride) {
    const WeightStencil w = weights(interp, locate(grid, particles.positions[p]));
    double sum = 0.0;
    for (int a = 0; a < interp.support_size(); ++a) {
      sum += w.weights[a];
      out.min_weight = std::min(out.min_weight, w.weights[a]);
    }
    out.max_sum_defect = std::max(out.max_sum_defect, std::abs(sum - 1.0));
  }
  return out;
}

}  // namespace tcmass
