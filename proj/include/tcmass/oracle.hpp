#pragma once

#include "tcmass/geometry.hpp"
#include "tcmass/response.hpp"
#include "tcmass/shape.hpp"
#include "tcmass/stencil.hpp"

namespace tcmass {

enum class Arithmetic { fp64, fp32 };

/// Reference particle-by-particle scatter loop.
///
/// For every particle (in input order) and every local pair a <= b of its
/// support, adds sigma * s^c * W_a * W_b to the slot chosen by the same
/// deposit tables the tiled path uses. Never looks at cell-sort metadata.
/// The fp32 variant keeps weights in FP64 and rounds each term and each
/// accumulation to FP32.
StencilMatrix assemble_naive(const Grid& grid, const ParticleSet& particles,
                             const Interpolation& interp, CoefficientKind kind, double sigma,
                             Arithmetic arithmetic = Arithmetic::fp64);

/// Same loop with |sigma * s^c * W_a * W_b| summed: the magnitude of
/// everything that went into each entry. Used to normalize entry errors.
StencilMatrix assemble_magnitude(const Grid& grid, const ParticleSet& particles,
                                 const Interpolation& interp, CoefficientKind kind,
                                 double sigma);

}  // namespace tcmass
