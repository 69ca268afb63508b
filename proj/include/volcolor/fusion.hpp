#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "volcolor/error.hpp"
#include "volcolor/solver.hpp"
#include "volcolor/sparse.hpp"
#include "volcolor/volume.hpp"

namespace volcolor {

// Screened Poisson fusion: keep the edge differences of one volume and the
// intensities of another. Minimizes
//   sum_{6-edges (p,q)} (f_p - f_q - (m_p - m_q))^2 + lambda * sum_p (f_p - c_p)^2
// over foreground voxels.
enum class FusionDomain { foreground, full_grid };

struct FusionConfig {
  double lambda = 0.1;
  FusionDomain domain = FusionDomain::foreground;
  // Only meaningful for lambda == 0: resolve the constant null space by
  // matching the mean of the gradient source on each connected component.
  bool pin_mean = false;
  bool clamp_output = true;
  SolverConfig solver;
};

struct FusionSystem {
  Dims dims;
  SparseMatrix matrix;                   // lambda*I + L
  Vector rhs;                            // lambda*c + L*m
  std::vector<std::size_t> voxel_of;     // unknown -> linear voxel index
  std::vector<std::int64_t> unknown_of;  // voxel -> unknown, -1 if excluded
};

namespace fusion_detail {
inline constexpr int face_offsets[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

inline std::vector<std::uint8_t> domain_of(const Dims& d, const VolumeMask* mask, FusionDomain domain) {
  std::vector<std::uint8_t> in(d.size(), 1);
  if (mask && domain == FusionDomain::foreground) in = mask->data;
  return in;
}
}  // namespace fusion_detail

inline FusionSystem build_fusion_system(const ScalarVolume& m, const ScalarVolume& c, const VolumeMask* mask,
                                        double lambda, FusionDomain domain = FusionDomain::foreground) {
  require_same_dims(m.dims, c.dims, "fusion inputs");
  if (mask) require_same_dims(m.dims, mask->dims, "fusion mask");
  if (!(lambda >= 0.0)) throw validation_error("bad_config", "fusion lambda must be >= 0");
  const Dims d = m.dims;
  auto in = fusion_detail::domain_of(d, mask, domain);

  FusionSystem sys;
  sys.dims = d;
  sys.unknown_of.assign(d.size(), -1);
  for (std::size_t n = 0; n < d.size(); ++n)
    if (in[n]) {
      sys.unknown_of[n] = static_cast<std::int64_t>(sys.voxel_of.size());
      sys.voxel_of.push_back(n);
    }
  const std::size_t nu = sys.voxel_of.size();
  sys.rhs.assign(nu, 0.0);
  sys.matrix = zero_matrix(nu, nu);
  sys.matrix.col_index.reserve(nu * 7);
  sys.matrix.values.reserve(nu * 7);

  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t u = 0; u < nu; ++u) {
    const std::size_t n = sys.voxel_of[u];
    const VoxelIndex p = voxel_at(d, n);
    row.clear();
    double diag = lambda;
    double lm = 0.0;
    for (const auto& o : fusion_detail::face_offsets) {
      int i = p.i + o[0], j = p.j + o[1], k = p.k + o[2];
      if (!in_bounds(d, i, j, k)) continue;
      std::size_t q = linear_index(d, i, j, k);
      if (!in[q]) continue;
      diag += 1.0;
      lm += double(m[n]) - double(m[q]);
      row.push_back({static_cast<std::uint32_t>(sys.unknown_of[q]), -1.0});
    }
    // an isolated voxel at lambda = 0 is a free constant; pin its row so the
    // matrix keeps a positive diagonal (the mean shift restores its value)
    if (diag == 0.0) diag = 1.0;
    row.push_back({static_cast<std::uint32_t>(u), diag});
    std::sort(row.begin(), row.end());
    for (auto [col, v] : row) {
      if (v == 0.0) continue;
      sys.matrix.col_index.push_back(col);
      sys.matrix.values.push_back(v);
    }
    sys.matrix.row_start[u + 1] = sys.matrix.values.size();
    sys.rhs[u] = lambda * double(c[n]) + lm;
  }
  return sys;
}

// Value of the fusion energy for f over the given domain.
inline double fusion_energy(const ScalarVolume& f, const ScalarVolume& m, const ScalarVolume& c,
                            const VolumeMask* mask, double lambda, FusionDomain domain = FusionDomain::foreground) {
  const Dims d = m.dims;
  auto in = fusion_detail::domain_of(d, mask, domain);
  double e = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (!in[n]) continue;
    const VoxelIndex p = voxel_at(d, n);
    // forward neighbours only, so each edge is counted once
    const int fwd[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (const auto& o : fwd) {
      int i = p.i + o[0], j = p.j + o[1], k = p.k + o[2];
      if (!in_bounds(d, i, j, k)) continue;
      std::size_t q = linear_index(d, i, j, k);
      if (!in[q]) continue;
      double r = (double(f[n]) - f[q]) - (double(m[n]) - m[q]);
      e += r * r;
    }
    double t = double(f[n]) - c[n];
    e += lambda * t * t;
  }
  return e;
}

// 6-connected components over the unknowns of a fusion system.
inline std::vector<std::uint32_t> fusion_components(const FusionSystem& sys, std::uint32_t& count) {
  const std::size_t nu = sys.voxel_of.size();
  std::vector<std::uint32_t> comp(nu, std::numeric_limits<std::uint32_t>::max());
  count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < nu; ++s) {
    if (comp[s] != std::numeric_limits<std::uint32_t>::max()) continue;
    comp[s] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t p = sys.matrix.row_start[u]; p < sys.matrix.row_start[u + 1]; ++p) {
        std::size_t v = sys.matrix.col_index[p];
        if (comp[v] == std::numeric_limits<std::uint32_t>::max()) {
          comp[v] = count;
          stack.push_back(v);
        }
      }
    }
    ++count;
  }
  return comp;
}

struct FusionResult {
  ScalarVolume volume;
  SolveReport report;
};

inline FusionResult fuse(const ScalarVolume& gradient_source, const ScalarVolume& intensity_source,
                         const VolumeMask* mask, const FusionConfig& cfg) {
  require_same_dims(gradient_source.dims, intensity_source.dims, "fuse");
  if (mask) require_same_dims(gradient_source.dims, mask->dims, "fuse mask");
  if (!(cfg.lambda >= 0.0)) throw validation_error("bad_config", "fusion lambda must be >= 0");
  if (cfg.lambda == 0.0 && !cfg.pin_mean)
    throw validation_error("bad_config", "fusion with lambda = 0 has no intensity constraint; set lambda > 0 or pin_mean");

  FusionSystem sys = build_fusion_system(gradient_source, intensity_source, mask, cfg.lambda, cfg.domain);
  if (sys.voxel_of.empty()) throw validation_error("empty_foreground", "fusion mask has no foreground voxels");

  SolverConfig scfg = cfg.solver;
  if (cfg.lambda == 0.0) scfg.project_constant_nullspace = true;
  std::vector<double> x(sys.voxel_of.size(), 0.0);
  FusionResult out;
  out.report = solve(sys.matrix, sys.rhs, x, scfg);

  if (cfg.lambda == 0.0) {
    std::uint32_t ncomp = 0;
    auto comp = fusion_components(sys, ncomp);
    std::vector<double> sum_x(ncomp, 0.0), sum_m(ncomp, 0.0), cnt(ncomp, 0.0);
    for (std::size_t u = 0; u < x.size(); ++u) {
      sum_x[comp[u]] += x[u];
      sum_m[comp[u]] += gradient_source[sys.voxel_of[u]];
      cnt[comp[u]] += 1.0;
    }
    for (std::size_t u = 0; u < x.size(); ++u) x[u] += (sum_m[comp[u]] - sum_x[comp[u]]) / cnt[comp[u]];
  }

  out.volume = ScalarVolume(gradient_source.dims, 0.0f);
  out.volume.spacing = gradient_source.spacing;
  for (std::size_t u = 0; u < x.size(); ++u) {
    const std::size_t n = sys.voxel_of[u];
    if (mask && !(*mask)[n]) continue;
    double v = cfg.clamp_output ? std::clamp(x[u], 0.0, 1.0) : x[u];
    out.volume[n] = static_cast<float>(v);
  }
  return out;
}

}  // namespace volcolor
