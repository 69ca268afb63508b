#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "volcolor/volume.hpp"

namespace volcolor {

// In-plane layout of an axis-aligned slice:
//   Z-slice: u = x (width), v = y (height)
//   Y-slice: u = x, v = z
//   X-slice: u = y, v = z
struct PlaneShape {
  int width = 0, height = 0;
};

constexpr PlaneShape plane_shape(const Dims& d, Axis axis) noexcept {
  switch (axis) {
    case Axis::X: return {d.ny, d.nz};
    case Axis::Y: return {d.nx, d.nz};
    case Axis::Z: break;
  }
  return {d.nx, d.ny};
}

constexpr VoxelIndex plane_voxel(Axis axis, int index, int u, int v) noexcept {
  switch (axis) {
    case Axis::X: return {index, u, v};
    case Axis::Y: return {u, index, v};
    case Axis::Z: break;
  }
  return {u, v, index};
}

inline void check_slice_index(const Dims& d, Axis axis, int index) {
  int extent = d.extent(static_cast<int>(axis));
  if (index < 0 || index >= extent)
    throw validation_error("slice_out_of_range", std::string("slice index ") + std::to_string(index) +
                                                     " out of range for axis " + axis_name(axis) +
                                                     " with extent " + std::to_string(extent));
}

// Single-precision 2D field, row-major (u fastest).
struct Plane {
  int width = 0, height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f) : width(w), height(h), data(std::size_t(w) * std::size_t(h), fill) {}

  float& operator()(int u, int v) { return data[std::size_t(v) * std::size_t(width) + std::size_t(u)]; }
  float operator()(int u, int v) const { return data[std::size_t(v) * std::size_t(width) + std::size_t(u)]; }
};

inline Plane extract_plane(const ScalarVolume& vol, Axis axis, int index) {
  check_slice_index(vol.dims, axis, index);
  auto [w, h] = plane_shape(vol.dims, axis);
  Plane p(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) p(u, v) = vol.data[linear_index(vol.dims, plane_voxel(axis, index, u, v))];
  return p;
}

inline void insert_plane(ScalarVolume& vol, Axis axis, int index, const Plane& p) {
  check_slice_index(vol.dims, axis, index);
  auto [w, h] = plane_shape(vol.dims, axis);
  if (p.width != w || p.height != h) throw validation_error("size_mismatch", "plane does not match slice shape");
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) vol.data[linear_index(vol.dims, plane_voxel(axis, index, u, v))] = p(u, v);
}

// 8-bit RGB image with optional alpha.
struct SliceImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;    // 3 * width * height, interleaved
  std::vector<std::uint8_t> alpha;  // empty or width * height

  SliceImage() = default;
  SliceImage(int w, int h, bool with_alpha = false)
      : width(w), height(h), rgb(std::size_t(w) * std::size_t(h) * 3, 0) {
    if (with_alpha) alpha.assign(std::size_t(w) * std::size_t(h), 255);
  }

  bool has_alpha() const noexcept { return !alpha.empty(); }
  std::size_t pixels() const noexcept { return std::size_t(width) * std::size_t(height); }
  std::uint8_t* px(int u, int v) { return &rgb[(std::size_t(v) * std::size_t(width) + std::size_t(u)) * 3]; }
  const std::uint8_t* px(int u, int v) const {
    return &rgb[(std::size_t(v) * std::size_t(width) + std::size_t(u)) * 3];
  }
  friend bool operator==(const SliceImage&, const SliceImage&) = default;
};

// Nearest-integer quantization of [0,1] onto 0..max; exact half steps round down.
inline std::uint32_t quantize_unit(double x, std::uint32_t max) {
  double s = std::clamp(x, 0.0, 1.0) * max;
  return static_cast<std::uint32_t>(std::ceil(s - 0.5));
}

inline std::uint8_t to_u8(double x) { return static_cast<std::uint8_t>(quantize_unit(x, 255)); }

inline SliceImage extract_slice(const ScalarVolume& vol, Axis axis, int index) {
  Plane p = extract_plane(vol, axis, index);
  SliceImage img(p.width, p.height);
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    auto g = to_u8(p.data[n]);
    img.rgb[3 * n] = img.rgb[3 * n + 1] = img.rgb[3 * n + 2] = g;
  }
  return img;
}

// Expects an RGB volume; a YUV volume is converted first.
inline SliceImage extract_slice(const ColorVolume& vol, Axis axis, int index) {
  const ColorVolume rgb = vol.space == ColorSpace::RGB ? vol : yuv_to_rgb(vol);
  std::array<Plane, 3> planes{extract_plane(rgb[0], axis, index), extract_plane(rgb[1], axis, index),
                              extract_plane(rgb[2], axis, index)};
  SliceImage img(planes[0].width, planes[0].height);
  for (std::size_t n = 0; n < img.pixels(); ++n)
    for (int c = 0; c < 3; ++c) img.rgb[3 * n + c] = to_u8(planes[c].data[n]);
  return img;
}

}  // namespace volcolor
