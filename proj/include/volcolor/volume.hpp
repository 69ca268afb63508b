#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "volcolor/error.hpp"

namespace volcolor {

// Grid extent in voxels. Linear layout is x-fastest: idx = i + nx*(j + ny*k).
struct Dims {
  int nx = 0, ny = 0, nz = 0;

  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  constexpr bool valid() const noexcept { return nx > 0 && ny > 0 && nz > 0; }
  constexpr int extent(int axis) const noexcept {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;

  std::string str() const {
    std::ostringstream os;
    os << nx << "x" << ny << "x" << nz;
    return os.str();
  }
};

struct VoxelIndex {
  int i = 0, j = 0, k = 0;
  friend constexpr bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

constexpr std::size_t linear_index(const Dims& d, int i, int j, int k) noexcept {
  return static_cast<std::size_t>(i) +
         static_cast<std::size_t>(d.nx) *
             (static_cast<std::size_t>(j) + static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(k));
}

constexpr std::size_t linear_index(const Dims& d, VoxelIndex p) noexcept {
  return linear_index(d, p.i, p.j, p.k);
}

constexpr VoxelIndex voxel_at(const Dims& d, std::size_t idx) noexcept {
  const auto nx = static_cast<std::size_t>(d.nx), ny = static_cast<std::size_t>(d.ny);
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
          static_cast<int>(idx / (nx * ny))};
}

constexpr bool in_bounds(const Dims& d, int i, int j, int k) noexcept {
  return i >= 0 && j >= 0 && k >= 0 && i < d.nx && j < d.ny && k < d.nz;
}

enum class Axis { X = 0, Y = 1, Z = 2 };

inline Axis parse_axis(const std::string& s) {
  if (s == "x" || s == "X") return Axis::X;
  if (s == "y" || s == "Y") return Axis::Y;
  if (s == "z" || s == "Z") return Axis::Z;
  throw validation_error("bad_axis", "unknown axis '" + s + "' (expected x, y or z)");
}

inline char axis_name(Axis a) { return "xyz"[static_cast<int>(a)]; }

// Scalar field on a voxel grid. Samples are single precision in [0,1] by
// convention; spacing is carried as metadata only.
struct ScalarVolume {
  Dims dims;
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::vector<float> data;

  ScalarVolume() = default;
  explicit ScalarVolume(Dims d, float fill = 0.0f) : dims(d), data(d.size(), fill) {
    if (!d.valid()) throw validation_error("bad_dims", "volume dims must be positive, got " + d.str());
  }

  std::size_t size() const noexcept { return data.size(); }
  float& operator()(int i, int j, int k) { return data[linear_index(dims, i, j, k)]; }
  float operator()(int i, int j, int k) const { return data[linear_index(dims, i, j, k)]; }
  float& operator[](std::size_t idx) { return data[idx]; }
  float operator[](std::size_t idx) const { return data[idx]; }
};

// true = foreground
struct VolumeMask {
  Dims dims;
  std::vector<std::uint8_t> data;

  VolumeMask() = default;
  explicit VolumeMask(Dims d, bool fill = true) : dims(d), data(d.size(), fill ? 1 : 0) {}

  bool operator[](std::size_t idx) const { return data[idx] != 0; }
  bool operator()(int i, int j, int k) const { return data[linear_index(dims, i, j, k)] != 0; }
  void set(std::size_t idx, bool v) { data[idx] = v ? 1 : 0; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
  }
};

enum class ColorSpace { RGB, YUV };

struct ColorVolume {
  std::array<ScalarVolume, 3> channels;
  ColorSpace space = ColorSpace::RGB;

  const Dims& dims() const noexcept { return channels[0].dims; }
  ScalarVolume& operator[](int c) { return channels[c]; }
  const ScalarVolume& operator[](int c) const { return channels[c]; }
};

inline void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b))
    throw validation_error("dims_mismatch",
                           std::string(what) + ": dimension mismatch " + a.str() + " vs " + b.str());
}

inline void check_channels(const ColorVolume& c) {
  for (int ch = 0; ch < 3; ++ch) {
    if (c[ch].data.size() != c[ch].dims.size())
      throw validation_error("bad_volume", "channel payload length does not match dims");
    require_same_dims(c[0].dims, c[ch].dims, "color volume channels");
  }
}

// Up to 26 in-bounds neighbours of p (p excluded), ordered by (dk, dj, di).
inline std::vector<VoxelIndex> neighborhood(VoxelIndex p, const Dims& d) {
  std::vector<VoxelIndex> out;
  out.reserve(26);
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0 && dk == 0) continue;
        int i = p.i + di, j = p.j + dj, k = p.k + dk;
        if (in_bounds(d, i, j, k)) out.push_back({i, j, k});
      }
  return out;
}

// BT.601 analog YUV.
namespace yuv {
inline constexpr double kr = 0.299, kg = 0.587, kb = 0.114;
inline constexpr double u_scale = 0.492, v_scale = 0.877;
inline constexpr double u_max = 0.436, v_max = 0.615;

struct Triple {
  double a, b, c;
};

constexpr Triple from_rgb(double r, double g, double b) noexcept {
  double y = kr * r + kg * g + kb * b;
  return {y, u_scale * (b - y), v_scale * (r - y)};
}

constexpr Triple to_rgb(double y, double u, double v) noexcept {
  double b = y + u / u_scale;
  double r = y + v / v_scale;
  double g = (y - kr * r - kb * b) / kg;
  return {r, g, b};
}
}  // namespace yuv

inline ColorVolume rgb_to_yuv(const ColorVolume& c) {
  if (c.space != ColorSpace::RGB) throw validation_error("bad_space", "rgb_to_yuv expects an RGB volume");
  check_channels(c);
  ColorVolume out{{c[0], c[1], c[2]}, ColorSpace::YUV};
  for (std::size_t n = 0; n < c[0].size(); ++n) {
    auto t = yuv::from_rgb(c[0][n], c[1][n], c[2][n]);
    out[0][n] = static_cast<float>(t.a);
    out[1][n] = static_cast<float>(t.b);
    out[2][n] = static_cast<float>(t.c);
  }
  return out;
}

inline ColorVolume yuv_to_rgb(const ColorVolume& c) {
  if (c.space != ColorSpace::YUV) throw validation_error("bad_space", "yuv_to_rgb expects a YUV volume");
  check_channels(c);
  ColorVolume out{{c[0], c[1], c[2]}, ColorSpace::RGB};
  for (std::size_t n = 0; n < c[0].size(); ++n) {
    auto t = yuv::to_rgb(c[0][n], c[1][n], c[2][n]);
    out[0][n] = static_cast<float>(std::clamp(t.a, 0.0, 1.0));
    out[1][n] = static_cast<float>(std::clamp(t.b, 0.0, 1.0));
    out[2][n] = static_cast<float>(std::clamp(t.c, 0.0, 1.0));
  }
  return out;
}

inline ScalarVolume normalize(const ScalarVolume& v, double lo, double hi) {
  if (!(hi > lo)) throw validation_error("bad_range", "normalize requires hi > lo");
  ScalarVolume out = v;
  const double inv = 1.0 / (hi - lo);
  for (auto& x : out.data) x = static_cast<float>(std::clamp((x - lo) * inv, 0.0, 1.0));
  return out;
}

inline ScalarVolume apply_mask(const ScalarVolume& v, const VolumeMask& m, float fill) {
  require_same_dims(v.dims, m.dims, "apply_mask");
  ScalarVolume out = v;
  for (std::size_t n = 0; n < out.size(); ++n)
    if (!m[n]) out[n] = fill;
  return out;
}

inline ColorVolume make_color(const ScalarVolume& a, const ScalarVolume& b, const ScalarVolume& c,
                              ColorSpace space) {
  require_same_dims(a.dims, b.dims, "make_color");
  require_same_dims(a.dims, c.dims, "make_color");
  return ColorVolume{{a, b, c}, space};
}

}  // namespace volcolor
