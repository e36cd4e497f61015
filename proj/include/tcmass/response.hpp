#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "tcmass/geometry.hpp"

namespace tcmass {

/// Row-major 3x3 matrix.
using Mat3 = std::array<double, 9>;

Mat3 identity3();
Mat3 multiply(const Mat3& a, const Mat3& b);
/// Matrix of u -> omega x u.
Mat3 cross_matrix(const RealVec& omega);

/// Rotation-response tensor (I - C(omega) + omega omega^T) / (1 + |omega|^2).
///
/// This is the inverse of I + C(omega), so alpha(omega) * (I + C(omega)) = I.
Mat3 alpha(const RealVec& omega);

enum class CoefficientKind { scalar, tensorial };

/// 1 for scalar mass matrices, 9 for the 3x3 block (component = 3*i + j).
constexpr int component_count(CoefficientKind kind) {
  return kind == CoefficientKind::scalar ? 1 : 9;
}

std::string_view to_string(CoefficientKind kind);
CoefficientKind parse_kind(std::string_view text);

struct CoefficientTensor {
  CoefficientKind kind = CoefficientKind::scalar;
  Mat3 values{};  ///< scalar kind uses values[0] only

  double operator[](int component) const { return values[component]; }
};

/// Scalar: q. Tensorial: q * alpha(omega); throws if omega is missing.
CoefficientTensor coefficient(CoefficientKind kind, double charge,
                              const std::optional<RealVec>& omega);

struct SpeciesParams {
  double charge = 1.0;
  double mass = 1.0;
  double dt = 1.0;
  double c = 1.0;

  /// beta_s = q_s dt / (2 m_s)
  double beta() const { return charge * dt / (2.0 * mass); }
  /// Constant prefactor beta_s / (c V_g) of the ECSIM mass matrix.
  double sigma(double cell_volume) const { return beta() / (c * cell_volume); }
};

}  // namespace tcmass
