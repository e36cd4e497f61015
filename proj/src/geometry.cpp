#include "tcmass/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tcmass {

Grid::Grid(int dim, IntVec dims, RealVec spacing)
    : dim_(dim), dims_(dims), spacing_(spacing), num_nodes_(1) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  }
  for (int mu = 0; mu < kMaxDim; ++mu) {
    if (mu >= dim) {
      dims_[mu] = 1;
      spacing_[mu] = 1.0;
      continue;
    }
    if (dims_[mu] < 2) {
      throw std::invalid_argument("grid needs at least 2 cells per axis");
    }
    if (!(spacing_[mu] > 0.0) || !std::isfinite(spacing_[mu])) {
      throw std::invalid_argument("grid spacing must be positive and finite");
    }
    num_nodes_ *= dims_[mu];
  }
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int mu = 0; mu < dim_; ++mu) v *= spacing_[mu];
  return v;
}

bool Grid::supports_order(int order) const {
  for (int mu = 0; mu < dim_; ++mu) {
    if (dims_[mu] < 2 * order) return false;
  }
  return true;
}

void Grid::require_order(int order) const {
  if (!supports_order(order)) {
    throw std::invalid_argument("grid too small for interpolation order " +
                                std::to_string(order) + ": need at least " +
                                std::to_string(2 * order) + " cells per axis");
  }
}

std::int64_t Grid::linear_index(const IntVec& index) const {
  std::int64_t linear = 0;
  for (int mu = 0; mu < dim_; ++mu) linear = linear * dims_[mu] + index[mu];
  return linear;
}

IntVec Grid::unravel(std::int64_t linear) const {
  IntVec index{0, 0, 0};
  for (int mu = dim_ - 1; mu >= 0; --mu) {
    index[mu] = static_cast<int>(linear % dims_[mu]);
    linear /= dims_[mu];
  }
  return index;
}

CellLocation locate(const Grid& grid, const RealVec& position) {
  CellLocation loc;
  for (int mu = 0; mu < grid.dim(); ++mu) {
    const double x = position[mu];
    const double extent = grid.dims()[mu] * grid.spacing()[mu];
    if (!(x >= 0.0 && x < extent)) {
      throw std::domain_error("position outside the grid domain on axis " +
                              std::to_string(mu));
    }
    const double s = x / grid.spacing()[mu];
    double c = std::floor(s);
    double f = s - c;
    // x < extent can still round up to s == dims.
    if (c >= grid.dims()[mu]) {
      c = grid.dims()[mu] - 1;
      f = std::nextafter(1.0, 0.0);
    }
    loc.cell[mu] = static_cast<int>(c);
    loc.frac[mu] = f;
  }
  return loc;
}

std::int64_t node_id(const Grid& grid, const IntVec& cell, const IntVec& offset) {
  std::int64_t linear = 0;
  for (int mu = 0; mu < grid.dim(); ++mu) {
    const int n = grid.dims()[mu];
    int i = (cell[mu] + offset[mu]) % n;
    if (i < 0) i += n;
    linear = linear * n + i;
  }
  return linear;
}

void ParticleSet::validate(const Grid& grid) const {
  if (charges.size() != positions.size()) {
    throw std::invalid_argument("particle charge count does not match positions");
  }
  if (!omegas.empty() && omegas.size() != positions.size()) {
    throw std::invalid_argument("particle omega count does not match positions");
  }
  for (const auto& x : positions) locate(grid, x);
}

SortedParticles sort_by_cell(const ParticleSet& particles, const Grid& grid) {
  particles.validate(grid);
  const std::size_t count = particles.size();

  std::vector<std::int64_t> cell_of(count);
  for (std::size_t p = 0; p < count; ++p) {
    cell_of[p] = grid.linear_index(locate(grid, particles.positions[p]).cell);
  }

  SortedParticles out;
  out.ranges.assign(static_cast<std::size_t>(grid.num_cells()), CellRange{});
  for (auto c : cell_of) ++out.ranges[c].count;
  std::int64_t start = 0;
  for (auto& r : out.ranges) {
    r.start = start;
    start += r.count;
  }

  std::vector<std::int64_t> cursor(out.ranges.size());
  for (std::size_t c = 0; c < out.ranges.size(); ++c) cursor[c] = out.ranges[c].start;
  out.order.resize(count);
  for (std::size_t p = 0; p < count; ++p) out.order[cursor[cell_of[p]]++] = p;

  auto& sorted = out.particles;
  sorted.sigma = particles.sigma;
  sorted.positions.resize(count);
  sorted.charges.resize(count);
  if (particles.has_omega()) sorted.omegas.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto p = out.order[k];
    sorted.positions[k] = particles.positions[p];
    sorted.charges[k] = particles.charges[p];
    if (particles.has_omega()) sorted.omegas[k] = particles.omegas[p];
  }
  return out;
}

}  // namespace tcmass
