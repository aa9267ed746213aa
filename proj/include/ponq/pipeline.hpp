#pragma once

// End-to-end reconstruction: sample a mesh, fit PoNQ, mesh the elements.

#include <cstdint>
#include <vector>

#include "ponq/extraction.hpp"
#include "ponq/fitting.hpp"
#include "ponq/mesh.hpp"
#include "ponq/sampling.hpp"

namespace ponq {

struct ReconstructOptions {
  FitConfig fit;
  /// Surface samples; 0 selects samples_for_resolution(fit.grid_res).
  std::size_t samples = 0;
  /// Boundary samples for open surfaces; 0 disables the augmentation.
  std::size_t boundary_samples = 0;
  std::uint64_t sample_seed = 0;
  MeshOptions mesh;
};

struct Reconstruction {
  std::vector<SurfaceSample> samples;
  FitResult fit;
  MeshResult mesh;
};

/// Surface samples, plus boundary samples and their rotated copies when requested.
inline std::vector<SurfaceSample> augmented_samples(const TriMesh& mesh, std::size_t count,
                                                    std::size_t boundary_count, std::uint64_t seed) {
  auto s = sample_surface(mesh, count, seed);
  if (boundary_count > 0) {
    const auto b = sample_boundary(mesh, boundary_count, seed + 1);
    s.insert(s.end(), b.samples.begin(), b.samples.end());
    s.insert(s.end(), b.rotated.begin(), b.rotated.end());
  }
  return s;
}

inline Reconstruction reconstruct(const TriMesh& input, const ReconstructOptions& opt) {
  Reconstruction r;
  const std::size_t n = opt.samples > 0 ? opt.samples : samples_for_resolution(opt.fit.grid_res);
  r.samples = augmented_samples(input, n, opt.boundary_samples, opt.sample_seed);
  r.fit = fit_ponq(r.samples, opt.fit);
  MeshOptions mo = opt.mesh;
  if (!(mo.h > 0.0)) mo.h = 1.0 / (r.fit.frame.spacing * r.fit.frame.spacing);
  mo.open_surface = mo.open_surface || opt.boundary_samples > 0;
  r.mesh = mesh_elements(r.fit.elements, mo);
  return r;
}

}  // namespace ponq
