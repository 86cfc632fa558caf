#pragma once

#include <translab/geometry.hpp>
#include <translab/kernel.hpp>

namespace fixtures {

using namespace translab;

/// Unit disk, concentric inclusion of radius 0.3, k = (1, 2), damping shell
/// covering the outer ring of Ω₁.
inline GeometryDescriptor golden_annulus() {
  GeometryDescriptor d;
  d.outer = CircleSpec{{0, 0}, 1.0};
  d.inner = CircleSpec{{0, 0}, 0.3};
  d.k1 = 1.0;
  d.k2 = 2.0;
  d.damping.center = {0, 0};
  d.damping.value = 1.0;
  d.damping.radial_inner = 0.65;
  d.damping.radial_outer = 1.05;
  d.damping.radial_ramp = 0.1;
  return d;
}

/// Same circles; damping confined to a sector of a mid ring, leaving
/// whispering-gallery chords near ∂Ω undamped.
inline GeometryDescriptor trapped_annulus() {
  GeometryDescriptor d = golden_annulus();
  d.damping.radial_inner = 0.5;
  d.damping.radial_outer = 0.7;
  d.damping.radial_ramp = 0.05;
  d.damping.angular = std::pair{-2.0, 2.0};
  d.damping.angular_ramp = 0.2;
  return d;
}

inline GeometryDescriptor undamped(GeometryDescriptor d) {
  d.damping.value = 0.0;
  return d;
}

inline MemoryKernel golden_kernel() { return build_kernel({{1.5, 0.3}}); }

}  // namespace fixtures
