#include "tcmass/shape.hpp"

#include <cmath>
#include <stdexcept>

namespace tcmass {

namespace {

void require_supported_order(int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("only interpolation orders 1 and 2 are supported");
  }
}

int ipow(int base, int exp) {
  int r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

}  // namespace

Interpolation::Interpolation(int order, int dim) : order_(order), dim_(dim) {
  require_supported_order(order);
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("interpolation dimension must be 1, 2 or 3");
  }
  support_size_ = ipow(order + 1, dim);
  max_groups_ = ipow(order, dim);
}

IntVec Interpolation::local_offset(int a) const {
  IntVec k{0, 0, 0};
  for (int mu = dim_ - 1; mu >= 0; --mu) {
    k[mu] = a % (order_ + 1);
    a /= order_ + 1;
  }
  return k;
}

IntVec Interpolation::group_base(int gamma) const {
  IntVec base{0, 0, 0};
  if (order_ == 1) return base;
  for (int mu = 0; mu < dim_; ++mu) base[mu] = ((gamma >> mu) & 1) ? 0 : -1;
  return base;
}

double bspline_1d(int order, double t) {
  require_supported_order(order);
  const double x = std::abs(t);
  if (order == 1) return x <= 1.0 ? 1.0 - x : 0.0;
  if (x <= 0.5) return 0.75 - x * x;
  if (x <= 1.5) {
    const double r = 1.5 - x;
    return 0.5 * r * r;
  }
  return 0.0;
}

int support_base_1d(int order, double frac) {
  require_supported_order(order);
  if (order == 1) return 0;
  return frac < 0.5 ? -1 : 0;
}

IntVec support_base(const Interpolation& interp, const CellLocation& loc) {
  IntVec base{0, 0, 0};
  for (int mu = 0; mu < interp.dim(); ++mu) {
    base[mu] = support_base_1d(interp.order(), loc.frac[mu]);
  }
  return base;
}

WeightStencil weights(const Interpolation& interp, const CellLocation& loc) {
  const int n = interp.order();
  const int d = interp.dim();

  WeightStencil w;
  w.base = support_base(interp, loc);

  std::array<std::array<double, 3>, kMaxDim> axis{};
  for (int mu = 0; mu < d; ++mu) {
    for (int k = 0; k <= n; ++k) {
      axis[mu][k] = bspline_1d(n, loc.frac[mu] - (w.base[mu] + k));
    }
  }

  for (int a = 0; a < interp.support_size(); ++a) {
    const IntVec k = interp.local_offset(a);
    double v = 1.0;
    for (int mu = 0; mu < d; ++mu) v *= axis[mu][k[mu]];
    w.weights[a] = v;
  }
  return w;
}

int group_id(const Interpolation& interp, const CellLocation& loc) {
  if (interp.order() == 1) return 0;
  int gamma = 0;
  for (int mu = 0; mu < interp.dim(); ++mu) {
    if (support_base_1d(interp.order(), loc.frac[mu]) == 0) gamma |= 1 << mu;
  }
  return gamma;
}

}  // namespace tcmass
