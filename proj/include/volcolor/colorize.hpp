#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "volcolor/error.hpp"
#include "volcolor/slice.hpp"
#include "volcolor/solver.hpp"
#include "volcolor/sparse.hpp"
#include "volcolor/volume.hpp"

namespace volcolor {

// ------------------------------------------------------------------ hints

// A chroma slice pinned at (axis, index). Planes follow the in-plane layout of
// plane_shape(); invalid pixels carry no constraint.
struct Hint {
  Axis axis = Axis::Z;
  int index = 0;
  Plane u, v;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
};

struct HintSet {
  std::vector<Hint> hints;

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (const auto& h : hints) n += h.valid_count();
    return n;
  }
};

struct HintImage {
  Axis axis = Axis::Z;
  int index = 0;
  SliceImage image;
};

// RGB pixels become (U, V) constraints; alpha < 128 marks a pixel as unhinted.
inline HintSet hints_from_slices(const std::vector<HintImage>& images, const Dims& dims) {
  HintSet set;
  std::vector<std::pair<Axis, int>> seen;
  for (const auto& hi : images) {
    check_slice_index(dims, hi.axis, hi.index);
    auto [w, h] = plane_shape(dims, hi.axis);
    if (hi.image.width != w || hi.image.height != h)
      throw validation_error("size_mismatch", std::string("hint image for axis ") + axis_name(hi.axis) + " index " +
                                                  std::to_string(hi.index) + " is " + std::to_string(hi.image.width) +
                                                  "x" + std::to_string(hi.image.height) + ", slice plane is " +
                                                  std::to_string(w) + "x" + std::to_string(h));
    if (std::find(seen.begin(), seen.end(), std::pair{hi.axis, hi.index}) != seen.end())
      throw validation_error("duplicate_hint", std::string("duplicate hint slice for axis ") + axis_name(hi.axis) +
                                                   " index " + std::to_string(hi.index));
    seen.push_back({hi.axis, hi.index});

    Hint hint{hi.axis, hi.index, Plane(w, h), Plane(w, h), std::vector<std::uint8_t>(std::size_t(w) * h, 0)};
    for (std::size_t n = 0; n < hi.image.pixels(); ++n) {
      const std::uint8_t* px = &hi.image.rgb[3 * n];
      auto t = yuv::from_rgb(px[0] / 255.0, px[1] / 255.0, px[2] / 255.0);
      hint.u.data[n] = static_cast<float>(t.b);
      hint.v.data[n] = static_cast<float>(t.c);
      hint.valid[n] = (!hi.image.has_alpha() || hi.image.alpha[n] >= 128) ? 1 : 0;
    }
    set.hints.push_back(std::move(hint));
  }
  return set;
}

// ---------------------------------------------------------------- weights

struct WeightParams {
  double sigma_floor = 1e-4;  // lower bound on the local variance of Y
};

struct NeighborWeight {
  VoxelIndex q;
  std::size_t index;  // linear index of q
  double weight;
};

namespace colorize_detail {

inline bool fg(const VolumeMask* mask, std::size_t n) { return !mask || (*mask)[n]; }

// Normalized affinities of p to its foreground 26-neighbours; empty if none.
// sigma^2 is the population variance of Y over the neighbours and p itself.
inline void weights_into(const ScalarVolume& y, const VolumeMask* mask, VoxelIndex p, const WeightParams& params,
                         std::vector<NeighborWeight>& out) {
  out.clear();
  const Dims& d = y.dims;
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0 && dk == 0) continue;
        int i = p.i + di, j = p.j + dj, k = p.k + dk;
        if (!in_bounds(d, i, j, k)) continue;
        std::size_t q = linear_index(d, i, j, k);
        if (!fg(mask, q)) continue;
        out.push_back({{i, j, k}, q, 0.0});
      }
  if (out.empty()) return;
  const double yp = y[linear_index(d, p)];
  double mean = yp;
  for (const auto& nw : out) mean += y[nw.index];
  mean /= double(out.size() + 1);
  double var = (yp - mean) * (yp - mean);
  for (const auto& nw : out) var += (y[nw.index] - mean) * (y[nw.index] - mean);
  var /= double(out.size() + 1);
  var = std::max(var, params.sigma_floor);
  double total = 0.0;
  for (auto& nw : out) {
    double dy = yp - y[nw.index];
    nw.weight = std::exp(-dy * dy / (2.0 * var));
    total += nw.weight;
  }
  for (auto& nw : out) nw.weight /= total;
}

}  // namespace colorize_detail

inline std::vector<NeighborWeight> compute_weights(const ScalarVolume& y, const VolumeMask* mask, VoxelIndex p,
                                                   const WeightParams& params = {}) {
  if (!in_bounds(y.dims, p.i, p.j, p.k)) throw validation_error("out_of_bounds", "voxel outside the volume");
  if (mask) require_same_dims(y.dims, mask->dims, "compute_weights");
  if (!(params.sigma_floor > 0)) throw validation_error("bad_config", "sigma floor must be > 0");
  std::vector<NeighborWeight> out;
  colorize_detail::weights_into(y, mask, p, params, out);
  if (out.empty()) throw validation_error("isolated_voxel", "voxel has no foreground neighbours");
  return out;
}

// ------------------------------------------------------- slice selection

inline int default_min_separation(int extent, int k) {
  return std::max(1, (extent + 2 * k - 1) / (2 * k));
}

// Population standard deviation of foreground Y on every slice along axis.
inline std::vector<double> slice_std_profile(const ScalarVolume& y, const VolumeMask* mask, Axis axis) {
  const Dims& d = y.dims;
  const int extent = d.extent(static_cast<int>(axis));
  std::vector<double> sum(extent, 0.0), sum2(extent, 0.0), cnt(extent, 0.0);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (!colorize_detail::fg(mask, n)) continue;
    VoxelIndex p = voxel_at(d, n);
    int s = axis == Axis::X ? p.i : (axis == Axis::Y ? p.j : p.k);
    double v = y[n];
    sum[s] += v;
    sum2[s] += v * v;
    cnt[s] += 1.0;
  }
  std::vector<double> out(extent, 0.0);
  for (int s = 0; s < extent; ++s) {
    if (cnt[s] == 0) continue;
    double mean = sum[s] / cnt[s];
    out[s] = std::sqrt(std::max(0.0, sum2[s] / cnt[s] - mean * mean));
  }
  return out;
}

// Greedy pick of the highest-contrast slices; each pick excludes |i - pick| < d.
inline std::vector<int> select_from_profile(const std::vector<double>& profile, int k, int d) {
  const int extent = static_cast<int>(profile.size());
  if (k < 1 || d < 1) throw validation_error("bad_config", "hint selection needs k >= 1 and d >= 1");
  if (static_cast<long>(k) * d > extent)
    throw validation_error("bad_config", "k*d = " + std::to_string(long(k) * d) + " exceeds axis extent " +
                                             std::to_string(extent));
  std::vector<std::uint8_t> excluded(extent, 0);
  std::vector<int> picked;
  for (int round = 0; round < k; ++round) {
    int best = -1;
    for (int s = 0; s < extent; ++s)
      if (!excluded[s] && (best < 0 || profile[s] > profile[best])) best = s;
    if (best < 0)
      throw validation_error("bad_config", "cannot place " + std::to_string(k) + " slices " + std::to_string(d) +
                                               " apart on an axis of extent " + std::to_string(extent));
    picked.push_back(best);
    for (int s = std::max(0, best - d + 1); s <= std::min(extent - 1, best + d - 1); ++s) excluded[s] = 1;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

inline std::vector<int> select_hint_slices(const ScalarVolume& y, const VolumeMask* mask, Axis axis, int k, int d) {
  if (mask) {
    require_same_dims(y.dims, mask->dims, "select_hint_slices");
    if (mask->count() == 0) throw validation_error("empty_foreground", "mask has no foreground voxels");
  }
  return select_from_profile(slice_std_profile(y, mask, axis), k, d);
}

// ------------------------------------------------------- system assembly

enum class VoxelRole : std::uint8_t {
  background,
  hint,      // pinned by a hint pixel
  free,      // unknown of the linear system
  fallback,  // component without hints: nearest-hint chroma
};

// Colorization normal equations with hint voxels eliminated.
//   residual  : rows of (I - W) for every foreground voxel of a hinted
//               component, restricted to the free columns
//   residual_rhs_* : -(I - W)[:, hinted] * hint chroma
//   normal    : residual^T residual, shared by U and V
//   rhs_*     : residual^T residual_rhs_*
struct ColorizationSystem {
  Dims dims;
  std::vector<VoxelRole> role;
  std::vector<std::size_t> voxel_of;     // unknown -> voxel
  std::vector<std::int64_t> unknown_of;  // voxel -> unknown or -1
  std::vector<float> fixed_u, fixed_v;   // chroma of hint and fallback voxels
  SparseMatrix residual;
  Vector residual_rhs_u, residual_rhs_v;
  SparseMatrix normal;
  bool normal_assembled = false;
  Vector rhs_u, rhs_v;

  std::size_t free_count() const noexcept { return voxel_of.size(); }
};

namespace colorize_detail {

inline void validate_hints(const HintSet& hints, const Dims& d) {
  for (const auto& h : hints.hints) {
    check_slice_index(d, h.axis, h.index);
    auto [w, ht] = plane_shape(d, h.axis);
    const std::size_t np = std::size_t(w) * ht;
    if (h.u.width != w || h.u.height != ht || h.v.width != w || h.v.height != ht || h.valid.size() != np)
      throw validation_error("size_mismatch", "hint planes do not match the slice shape");
    for (std::size_t n = 0; n < np; ++n) {
      if (!h.valid[n]) continue;
      if (!std::isfinite(h.u.data[n]) || !std::isfinite(h.v.data[n]) ||
          std::abs(h.u.data[n]) > yuv::u_max + 1e-6 || std::abs(h.v.data[n]) > yuv::v_max + 1e-6)
        throw validation_error("bad_hint", "hint chroma outside the YUV gamut");
    }
  }
}

// 26-connected components of the foreground; background gets UINT32_MAX.
inline std::vector<std::uint32_t> components(const Dims& d, const VolumeMask* mask, std::uint32_t& count) {
  constexpr auto none = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(d.size(), none);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t s = 0; s < d.size(); ++s) {
    if (comp[s] != none || !fg(mask, s)) continue;
    comp[s] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      VoxelIndex p = voxel_at(d, stack.back());
      stack.pop_back();
      for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int i = p.i + di, j = p.j + dj, k = p.k + dk;
            if (!in_bounds(d, i, j, k)) continue;
            std::size_t q = linear_index(d, i, j, k);
            if (comp[q] == none && fg(mask, q)) {
              comp[q] = count;
              stack.push_back(q);
            }
          }
    }
    ++count;
  }
  return comp;
}

}  // namespace colorize_detail

// assemble_normal = false keeps only the residual operator (matrix-free solve).
inline ColorizationSystem build_colorization_system(const ScalarVolume& y, const HintSet& hints,
                                                    const VolumeMask* mask, const WeightParams& params,
                                                    bool assemble_normal = true) {
  using namespace colorize_detail;
  const Dims d = y.dims;
  if (mask) require_same_dims(d, mask->dims, "colorization mask");
  if (!(params.sigma_floor > 0)) throw validation_error("bad_config", "sigma floor must be > 0");
  validate_hints(hints, d);
  if (hints.valid_count() == 0) throw validation_error("no_valid_hints", "hint set has no valid hint pixels");

  ColorizationSystem sys;
  sys.dims = d;
  sys.role.assign(d.size(), VoxelRole::background);
  sys.fixed_u.assign(d.size(), 0.0f);
  sys.fixed_v.assign(d.size(), 0.0f);
  sys.unknown_of.assign(d.size(), -1);

  // Rasterize hints; later hints win where slices cross. Background hints are dropped.
  std::vector<std::size_t> hint_voxels;
  for (const auto& h : hints.hints) {
    auto [w, ht] = plane_shape(d, h.axis);
    for (int v = 0; v < ht; ++v)
      for (int u = 0; u < w; ++u) {
        std::size_t pix = std::size_t(v) * w + u;
        if (!h.valid[pix]) continue;
        std::size_t n = linear_index(d, plane_voxel(h.axis, h.index, u, v));
        if (!fg(mask, n)) continue;
        if (sys.role[n] != VoxelRole::hint) hint_voxels.push_back(n);
        sys.role[n] = VoxelRole::hint;
        sys.fixed_u[n] = h.u.data[pix];
        sys.fixed_v[n] = h.v.data[pix];
      }
  }
  if (hint_voxels.empty())
    throw validation_error("no_valid_hints", "no valid hint pixel falls on the foreground");
  std::sort(hint_voxels.begin(), hint_voxels.end());

  std::uint32_t ncomp = 0;
  auto comp = components(d, mask, ncomp);
  std::vector<std::uint8_t> comp_hinted(ncomp, 0);
  for (auto n : hint_voxels) comp_hinted[comp[n]] = 1;

  for (std::size_t n = 0; n < d.size(); ++n) {
    if (!fg(mask, n) || sys.role[n] == VoxelRole::hint) continue;
    if (comp_hinted[comp[n]]) {
      sys.role[n] = VoxelRole::free;
      sys.unknown_of[n] = static_cast<std::int64_t>(sys.voxel_of.size());
      sys.voxel_of.push_back(n);
    } else {
      // nearest valid hint voxel, Euclidean in voxel units, ties to the lowest index
      sys.role[n] = VoxelRole::fallback;
      VoxelIndex p = voxel_at(d, n);
      long best = std::numeric_limits<long>::max();
      std::size_t arg = hint_voxels.front();
      for (auto h : hint_voxels) {
        VoxelIndex q = voxel_at(d, h);
        long di = p.i - q.i, dj = p.j - q.j, dk = p.k - q.k;
        long dist = di * di + dj * dj + dk * dk;
        if (dist < best) {
          best = dist;
          arg = h;
        }
      }
      sys.fixed_u[n] = sys.fixed_u[arg];
      sys.fixed_v[n] = sys.fixed_v[arg];
    }
  }

  // Residual operator rows, one per foreground voxel of a hinted component.
  const std::size_t nfree = sys.voxel_of.size();
  sys.residual = zero_matrix(0, nfree);
  sys.residual.row_start.clear();
  sys.residual.row_start.push_back(0);
  std::vector<NeighborWeight> nw;
  std::vector<std::pair<std::uint32_t, double>> row;
  std::size_t nrows = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (sys.role[n] != VoxelRole::free && sys.role[n] != VoxelRole::hint) continue;
    weights_into(y, mask, voxel_at(d, n), params, nw);
    row.clear();
    double gu = 0.0, gv = 0.0;
    if (sys.role[n] == VoxelRole::free) {
      row.push_back({static_cast<std::uint32_t>(sys.unknown_of[n]), 1.0});
    } else {
      gu -= sys.fixed_u[n];
      gv -= sys.fixed_v[n];
    }
    for (const auto& e : nw) {
      if (sys.role[e.index] == VoxelRole::free) {
        row.push_back({static_cast<std::uint32_t>(sys.unknown_of[e.index]), -e.weight});
      } else {
        gu += e.weight * sys.fixed_u[e.index];
        gv += e.weight * sys.fixed_v[e.index];
      }
    }
    std::sort(row.begin(), row.end());
    for (auto [c, v] : row) {
      sys.residual.col_index.push_back(c);
      sys.residual.values.push_back(v);
    }
    sys.residual.row_start.push_back(sys.residual.values.size());
    sys.residual_rhs_u.push_back(gu);
    sys.residual_rhs_v.push_back(gv);
    ++nrows;
  }
  sys.residual.rows = nrows;

  SparseMatrix rt = transpose(sys.residual);
  sys.rhs_u = matvec(rt, sys.residual_rhs_u);
  sys.rhs_v = matvec(rt, sys.residual_rhs_v);
  if (assemble_normal) {
    sys.normal = multiply(rt, sys.residual);
    sys.normal_assembled = true;
  }
  return sys;
}

// ------------------------------------------------------------- solving

enum class OperatorMode {
  automatic,    // assemble the normal matrix unless it would exceed the nonzero budget
  assembled,
  matrix_free,  // apply residual^T (residual x); amg runs on a sparse surrogate
};

struct HintSelectionParams {
  Axis axis = Axis::Z;
  int count = 8;
  int min_separation = 0;  // 0: ceil(extent / (2 * count))
};

struct ColorizeConfig {
  WeightParams weights;
  SolverConfig solver;
  HintSelectionParams selection;
  OperatorMode operator_mode = OperatorMode::automatic;
  std::size_t max_assembled_nonzeros = 16'000'000;
};

struct ColorizeResult {
  ColorVolume yuv;
  SolveReport report_u, report_v;
  std::size_t free_unknowns = 0;
  bool assembled = false;
};

// Upper bound on nnz of residual^T residual: each free voxel couples to its 5x5x5 box.
inline std::size_t estimate_normal_nonzeros(std::size_t free_unknowns) { return free_unknowns * 125; }

namespace colorize_detail {

struct MatrixFreeNormal {
  const SparseMatrix& r;
  SparseMatrix rt;
  mutable Vector tmp;

  explicit MatrixFreeNormal(const SparseMatrix& residual) : r(residual), rt(transpose(residual)), tmp(residual.rows) {}

  void apply(std::span<const double> x, std::span<double> y) const {
    matvec(r, x, tmp);
    matvec(rt, tmp, y);
  }

  Vector diagonal() const {
    Vector d(r.cols, 0.0);
    for (std::size_t i = 0; i < rt.rows; ++i)
      for (std::size_t p = rt.row_start[i]; p < rt.row_start[i + 1]; ++p) d[i] += rt.values[p] * rt.values[p];
    return d;
  }
};

// Sparse SPD stand-in for the normal matrix: the graph Laplacian with
// symmetrized weights (w_pq + w_qp) / 2 on the free voxels, hint voxels acting
// as Dirichlet nodes. Its square is close to residual^T residual, so two
// V-cycles on it make a preconditioner without forming the 125-point product.
inline SparseMatrix symmetric_surrogate(const ColorizationSystem& sys, const SparseMatrix& rt) {
  const SparseMatrix& r = sys.residual;
  const std::size_t n = sys.free_count();
  // residual rows follow voxel order over free and hint voxels
  std::vector<std::int64_t> unknown_of_row(r.rows, -1);
  std::vector<std::size_t> row_of_unknown(n);
  {
    std::size_t row = 0;
    for (std::size_t v = 0; v < sys.role.size(); ++v) {
      if (sys.role[v] == VoxelRole::free) {
        unknown_of_row[row] = sys.unknown_of[v];
        row_of_unknown[std::size_t(sys.unknown_of[v])] = row;
      }
      if (sys.role[v] == VoxelRole::free || sys.role[v] == VoxelRole::hint) ++row;
    }
  }
  SparseMatrix s = zero_matrix(n, n);
  s.col_index.reserve(r.nnz());
  s.values.reserve(r.nnz());
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t i = 0; i < n; ++i) {
    entries.clear();
    double diag = 0.0, wsum = 0.0;
    const std::size_t ri = row_of_unknown[i];
    for (std::size_t p = r.row_start[ri]; p < r.row_start[ri + 1]; ++p) {
      if (r.col_index[p] == i) continue;
      const double w = -r.values[p];
      entries.push_back({r.col_index[p], -0.5 * w});
      diag += 0.5 * w;
      wsum += w;
    }
    diag += 0.5 * (1.0 - wsum);  // weights onto hint neighbours
    for (std::size_t p = rt.row_start[i]; p < rt.row_start[i + 1]; ++p) {
      const std::int64_t j = unknown_of_row[rt.col_index[p]];
      if (j == std::int64_t(i)) continue;
      const double w = -rt.values[p];
      if (j >= 0) entries.push_back({std::uint32_t(j), -0.5 * w});
      diag += 0.5 * w;
    }
    entries.push_back({std::uint32_t(i), diag});
    std::sort(entries.begin(), entries.end());
    for (std::size_t t = 0; t < entries.size();) {
      std::uint32_t c = entries[t].first;
      double v = 0.0;
      for (; t < entries.size() && entries[t].first == c; ++t) v += entries[t].second;
      if (v == 0.0) continue;
      s.col_index.push_back(c);
      s.values.push_back(v);
    }
    s.row_start[i + 1] = s.values.size();
  }
  return s;
}

}  // namespace colorize_detail

inline std::pair<SolveReport, SolveReport> solve_chroma(const ColorizationSystem& sys, const SolverConfig& cfg,
                                                        Vector& u, Vector& v) {
  const std::size_t n = sys.free_count();
  u.assign(n, 0.0);
  v.assign(n, 0.0);
  if (n == 0) {
    SolveReport done;
    done.converged = true;
    done.preconditioner = cfg.preconditioner;
    return {done, done};
  }
  if (sys.normal_assembled) {
    PreparedSolver solver(sys.normal, cfg);
    return {solver.solve(sys.rhs_u, u), solver.solve(sys.rhs_v, v)};
  }
  colorize_detail::MatrixFreeNormal op(sys.residual);
  auto apply_a = [&](std::span<const double> in, std::span<double> out) { op.apply(in, out); };
  const SolverConfig& mf = cfg;
  Vector inv_diag, tmp(n);
  std::optional<AmgHierarchy> amg;
  if (mf.preconditioner == Preconditioner::jacobi) {
    inv_diag = op.diagonal();
    for (auto& x : inv_diag) x = x > 0 ? 1.0 / x : 1.0;
  } else if (mf.preconditioner == Preconditioner::amg) {
    amg = amg_build(colorize_detail::symmetric_surrogate(sys, op.rt), cfg.amg);
  }
  auto apply_m = [&](std::span<const double> in, std::span<double> out) {
    switch (mf.preconditioner) {
      case Preconditioner::none: std::copy(in.begin(), in.end(), out.begin()); break;
      case Preconditioner::jacobi:
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = inv_diag[i] * in[i];
        break;
      case Preconditioner::amg:
        amg->apply(in, tmp);
        amg->apply(tmp, out);
        break;
    }
  };
  auto ru = pcg(n, apply_a, apply_m, sys.rhs_u, u, mf);
  auto rv = pcg(n, apply_a, apply_m, sys.rhs_v, v, mf);
  ru.preconditioner = rv.preconditioner = mf.preconditioner;
  ru.amg_levels = rv.amg_levels = amg ? amg->num_levels() : 0;
  return {ru, rv};
}

// Propagates hint chroma through the volume. Y is copied unchanged; U and V
// come from the least-squares solve and are clamped to the YUV gamut;
// background voxels get zero chroma. Non-convergence is reported, not thrown.
inline ColorizeResult colorize(const ScalarVolume& y, const HintSet& hints, const VolumeMask* mask,
                               const ColorizeConfig& cfg) {
  cfg.solver.validate();
  bool assemble = cfg.operator_mode == OperatorMode::assembled;
  if (cfg.operator_mode == OperatorMode::automatic) {
    std::size_t fg = mask ? mask->count() : y.size();
    assemble = estimate_normal_nonzeros(fg) <= cfg.max_assembled_nonzeros;
  }
  ColorizationSystem sys = build_colorization_system(y, hints, mask, cfg.weights, assemble);

  Vector u, v;
  ColorizeResult out;
  std::tie(out.report_u, out.report_v) = solve_chroma(sys, cfg.solver, u, v);
  out.free_unknowns = sys.free_count();
  out.assembled = sys.normal_assembled;

  ScalarVolume cu(y.dims, 0.0f), cv(y.dims, 0.0f);
  cu.spacing = cv.spacing = y.spacing;
  for (std::size_t n = 0; n < y.size(); ++n) {
    double un = 0.0, vn = 0.0;
    switch (sys.role[n]) {
      case VoxelRole::background: continue;
      case VoxelRole::hint:
      case VoxelRole::fallback:
        un = sys.fixed_u[n];
        vn = sys.fixed_v[n];
        break;
      case VoxelRole::free:
        un = u[static_cast<std::size_t>(sys.unknown_of[n])];
        vn = v[static_cast<std::size_t>(sys.unknown_of[n])];
        break;
    }
    cu[n] = static_cast<float>(std::clamp(un, -yuv::u_max, yuv::u_max));
    cv[n] = static_cast<float>(std::clamp(vn, -yuv::v_max, yuv::v_max));
  }
  out.yuv = ColorVolume{{y, std::move(cu), std::move(cv)}, ColorSpace::YUV};
  return out;
}

}  // namespace volcolor
