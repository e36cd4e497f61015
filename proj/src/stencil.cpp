#include "tcmass/stencil.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>

namespace tcmass {

CanonicalOffset canonical(const Interpolation& interp, const IntVec& delta) {
  const int limit = 2 * interp.order();
  for (int mu = 0; mu < interp.dim(); ++mu) {
    if (std::abs(delta[mu]) > limit) {
      throw std::out_of_range("stencil offset outside {-2n..2n} on axis " +
                              std::to_string(mu));
    }
  }
  for (int mu = 0; mu < interp.dim(); ++mu) {
    if (delta[mu] > 0) return {delta, false};
    if (delta[mu] < 0) {
      IntVec flipped{0, 0, 0};
      for (int nu = 0; nu < interp.dim(); ++nu) flipped[nu] = -delta[nu];
      return {flipped, true};
    }
  }
  return {delta, false};
}

OffsetTable::OffsetTable(const Interpolation& interp) : interp_(interp) {
  const int n = interp.order();
  const int width = 2 * n + 1;
  int total = 1;
  for (int mu = 0; mu < interp.dim(); ++mu) total *= width;

  full_to_canonical_.assign(total, -1);
  for (int f = 0; f < total; ++f) {
    IntVec delta{0, 0, 0};
    int rest = f;
    for (int mu = interp.dim() - 1; mu >= 0; --mu) {
      delta[mu] = rest % width - n;
      rest /= width;
    }
    if (!canonical(interp, delta).transposed) {
      full_to_canonical_[f] = static_cast<int>(canonical_.size());
      canonical_.push_back(delta);
    }
  }
}

int OffsetTable::full_index(const IntVec& delta) const {
  const int n = interp_.order();
  int f = 0;
  for (int mu = 0; mu < interp_.dim(); ++mu) {
    if (delta[mu] < -n || delta[mu] > n) return -1;
    f = f * (2 * n + 1) + (delta[mu] + n);
  }
  return f;
}

int OffsetTable::index_of(const IntVec& delta) const {
  const int f = full_index(delta);
  return f < 0 ? -1 : full_to_canonical_[f];
}

DepositTable build_table(const Interpolation& interp, const IntVec& base,
                         const OffsetTable& offsets) {
  DepositTable table;
  table.base = base;
  const int count = interp.support_size();
  table.entries.reserve(static_cast<std::size_t>(count) * (count + 1) / 2);
  for (int a = 0; a < count; ++a) {
    const IntVec oa = interp.local_offset(a);
    for (int b = a; b < count; ++b) {
      const IntVec ob = interp.local_offset(b);
      IntVec delta{0, 0, 0};
      for (int mu = 0; mu < interp.dim(); ++mu) delta[mu] = ob[mu] - oa[mu];
      const CanonicalOffset c = canonical(interp, delta);

      DepositEntry e;
      e.a = a;
      e.b = b;
      e.transposed = c.transposed;
      e.offset_index = offsets.index_of(c.delta);
      const IntVec& anchor_local = c.transposed ? ob : oa;
      for (int mu = 0; mu < interp.dim(); ++mu) e.anchor[mu] = base[mu] + anchor_local[mu];
      table.entries.push_back(e);
    }
  }
  return table;
}

StencilMatrix::StencilMatrix(const Grid& grid, const Interpolation& interp,
                             CoefficientKind kind, AccumulateFormat format)
    : grid_(grid), offsets_(interp), kind_(kind), format_(format) {
  if (interp.dim() != grid.dim()) {
    throw std::invalid_argument("interpolation and grid dimensions differ");
  }
  grid.require_order(interp.order());
  values_.assign(static_cast<std::size_t>(grid.num_nodes()) * offsets_.size() * components(),
                 0.0);
}

void StencilMatrix::merge(const StencilMatrix& other) {
  if (!(grid_ == other.grid_) || !(interpolation() == other.interpolation()) ||
      kind_ != other.kind_ || format_ != other.format_) {
    throw std::invalid_argument("cannot merge stencil matrices with different layouts");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] = round_to(format_, values_[i] + other.values_[i]);
  }
}

double StencilMatrix::lookup(std::int64_t g, std::int64_t g2, int component) const {
  const int d = grid_.dim();
  const int n = interpolation().order();
  const IntVec x = grid_.unravel(g);
  const IntVec y = grid_.unravel(g2);

  // Per-axis displacements in {-n..n} congruent to y - x.
  std::array<std::vector<int>, kMaxDim> candidates;
  for (int mu = 0; mu < kMaxDim; ++mu) {
    if (mu >= d) {
      candidates[mu] = {0};
      continue;
    }
    const int period = grid_.dims()[mu];
    const int diff = ((y[mu] - x[mu]) % period + period) % period;
    for (int s = -n; s <= n; ++s) {
      if (((s - diff) % period + period) % period == 0) candidates[mu].push_back(s);
    }
    if (candidates[mu].empty()) return 0.0;
  }

  std::vector<std::pair<std::size_t, double>> terms;
  for (int s0 : candidates[0]) {
    for (int s1 : candidates[1]) {
      for (int s2 : candidates[2]) {
        const IntVec delta{s0, s1, s2};
        const CanonicalOffset c = canonical(interpolation(), delta);
        const std::int64_t anchor = c.transposed ? g2 : g;
        const std::size_t at = slot(anchor, offsets_.index_of(c.delta), component);
        terms.emplace_back(at, values_[at]);
      }
    }
  }
  // Fixed summation order makes lookup(g, g') and lookup(g', g) bit-identical.
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (const auto& t : terms) sum += t.second;
  return sum;
}

std::vector<std::vector<double>> StencilMatrix::to_dense() const {
  const std::int64_t ng = grid_.num_nodes();
  if (ng > kDenseNodeLimit) {
    throw std::length_error("dense reconstruction limited to 4096 nodes");
  }
  const int d = grid_.dim();
  const int n = interpolation().order();
  const int width = 2 * n + 1;
  int full = 1;
  for (int mu = 0; mu < d; ++mu) full *= width;

  std::vector<std::vector<double>> dense(
      components(), std::vector<double>(static_cast<std::size_t>(ng * ng), 0.0));
  for (std::int64_t g = 0; g < ng; ++g) {
    const IntVec cell = grid_.unravel(g);
    for (int f = 0; f < full; ++f) {
      IntVec delta{0, 0, 0};
      int rest = f;
      for (int mu = d - 1; mu >= 0; --mu) {
        delta[mu] = rest % width - n;
        rest /= width;
      }
      const std::int64_t g2 = node_id(grid_, cell, delta);
      for (int c = 0; c < components(); ++c) {
        dense[c][static_cast<std::size_t>(g * ng + g2)] = lookup(g, g2, c);
      }
    }
  }
  return dense;
}

nlohmann::json StencilMatrix::to_json() const {
  nlohmann::json j;
  const int d = grid_.dim();
  j["grid"] = {{"dim", d},
               {"dims", std::vector<int>(grid_.dims().begin(), grid_.dims().begin() + d)},
               {"spacing", std::vector<double>(grid_.spacing().begin(),
                                               grid_.spacing().begin() + d)}};
  j["order"] = interpolation().order();
  j["kind"] = std::string(to_string(kind_));
  j["components"] = components();
  j["accumulate"] = format_ == AccumulateFormat::fp64 ? "fp64" : "fp32";
  auto offsets = nlohmann::json::array();
  for (const auto& o : offsets_.offsets()) {
    offsets.push_back(std::vector<int>(o.begin(), o.begin() + d));
  }
  j["offsets"] = offsets;
  const std::size_t per_node = static_cast<std::size_t>(offsets_.size()) * components();
  auto values = nlohmann::json::array();
  for (std::int64_t g = 0; g < grid_.num_nodes(); ++g) {
    const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(g * per_node);
    values.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(per_node)));
  }
  j["values"] = values;
  return j;
}

StencilMatrix StencilMatrix::from_json(const nlohmann::json& j) {
  const auto& jg = j.at("grid");
  const int d = jg.at("dim").get<int>();
  IntVec dims{1, 1, 1};
  RealVec spacing{1.0, 1.0, 1.0};
  for (int mu = 0; mu < d; ++mu) {
    dims[mu] = jg.at("dims").at(mu).get<int>();
    spacing[mu] = jg.at("spacing").at(mu).get<double>();
  }
  const Grid grid(d, dims, spacing);
  const Interpolation interp(j.at("order").get<int>(), d);
  const auto kind = parse_kind(j.at("kind").get<std::string>());
  const auto acc = j.at("accumulate").get<std::string>();
  if (acc != "fp64" && acc != "fp32") {
    throw std::invalid_argument("unknown accumulate format: " + acc);
  }
  StencilMatrix m(grid, interp, kind,
                  acc == "fp64" ? AccumulateFormat::fp64 : AccumulateFormat::fp32);

  const auto& offsets = j.at("offsets");
  if (static_cast<int>(offsets.size()) != m.offsets_.size()) {
    throw std::invalid_argument("offset table size mismatch");
  }
  for (int k = 0; k < m.offsets_.size(); ++k) {
    for (int mu = 0; mu < d; ++mu) {
      if (offsets.at(k).at(mu).get<int>() != m.offsets_.offset(k)[mu]) {
        throw std::invalid_argument("offset table does not match canonical order");
      }
    }
  }
  const auto& values = j.at("values");
  if (static_cast<std::int64_t>(values.size()) != grid.num_nodes()) {
    throw std::invalid_argument("value rows do not match node count");
  }
  const std::size_t per_node = static_cast<std::size_t>(m.offsets_.size()) * m.components();
  for (std::int64_t g = 0; g < grid.num_nodes(); ++g) {
    const auto& row = values.at(g);
    if (row.size() != per_node) throw std::invalid_argument("value row has wrong length");
    for (std::size_t k = 0; k < per_node; ++k) {
      m.values_[g * per_node + k] = row.at(k).get<double>();
    }
  }
  return m;
}

void deposit(StencilMatrix& store, const IntVec& cell, const LocalBlock& block,
             const DepositTable& table, double sigma) {
  const Grid& grid = store.grid();
  for (const auto& e : table.entries) {
    const std::int64_t node = node_id(grid, cell, e.anchor);
    for (int c = 0; c < block.components; ++c) {
      const double v = block.at(c, e.a, e.b);
      if (v != 0.0) store.add(node, e.offset_index, c, sigma * v);
    }
  }
}

}  // namespace tcmass
