#include "tcmass/response.hpp"

#include <stdexcept>
#include <string>

namespace tcmass {

Mat3 identity3() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      r[3 * i + j] = s;
    }
  }
  return r;
}

Mat3 cross_matrix(const RealVec& w) {
  return {0.0, -w[2], w[1],
          w[2], 0.0, -w[0],
          -w[1], w[0], 0.0};
}

Mat3 alpha(const RealVec& w) {
  const double scale = 1.0 / (1.0 + w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  const Mat3 c = cross_matrix(w);
  Mat3 a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      a[3 * i + j] = (delta - c[3 * i + j] + w[i] * w[j]) * scale;
    }
  }
  return a;
}

std::string_view to_string(CoefficientKind kind) {
  return kind == CoefficientKind::scalar ? "scalar" : "tensorial";
}

CoefficientKind parse_kind(std::string_view text) {
  if (text == "scalar") return CoefficientKind::scalar;
  if (text == "tensorial") return CoefficientKind::tensorial;
  throw std::invalid_argument("unknown coefficient kind: " + std::string(text));
}

CoefficientTensor coefficient(CoefficientKind kind, double charge,
                              const std::optional<RealVec>& omega) {
  CoefficientTensor s;
  s.kind = kind;
  if (kind == CoefficientKind::scalar) {
    s.values[0] = charge;
    return s;
  }
  if (!omega) {
    throw std::invalid_argument("tensorial coefficient requires an omega vector");
  }
  s.values = alpha(*omega);
  for (auto& v : s.values) v *= charge;
  return s;
}

}  // namespace tcmass
