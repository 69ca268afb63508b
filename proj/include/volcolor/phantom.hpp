#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "volcolor/error.hpp"
#include "volcolor/volume.hpp"

namespace volcolor {

// Synthetic volumes with known regions and colors.
enum class PhantomKind { two_blob, concentric_shells, ramp, checker };

inline PhantomKind parse_phantom_kind(const std::string& s) {
  if (s == "two-blob") return PhantomKind::two_blob;
  if (s == "concentric-shells") return PhantomKind::concentric_shells;
  if (s == "ramp") return PhantomKind::ramp;
  if (s == "checker") return PhantomKind::checker;
  throw validation_error("bad_config", "unknown phantom kind '" + s + "'");
}

inline const char* phantom_kind_name(PhantomKind k) {
  switch (k) {
    case PhantomKind::two_blob: return "two-blob";
    case PhantomKind::concentric_shells: return "concentric-shells";
    case PhantomKind::ramp: return "ramp";
    case PhantomKind::checker: return "checker";
  }
  return "?";
}

struct PhantomSpec {
  PhantomKind kind = PhantomKind::two_blob;
  Dims dims{32, 32, 32};
  std::vector<double> levels;  // empty: per-kind defaults
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Phantom {
  ScalarVolume y;
  VolumeMask mask;
  std::vector<std::int32_t> labels;  // -1 on background
  ColorVolume reference;             // YUV: phantom Y, one chroma per label
  int label_count = 0;
};

inline constexpr std::array<std::array<double, 2>, 6> phantom_palette{{
    {-0.15, 0.25}, {0.20, -0.20}, {0.10, 0.30}, {-0.20, -0.15}, {0.25, 0.05}, {-0.05, -0.30}}};

inline std::array<double, 2> label_chroma(int label) {
  return phantom_palette[std::size_t(label) % phantom_palette.size()];
}

namespace phantom_detail {

inline std::vector<double> default_levels(PhantomKind k) {
  switch (k) {
    case PhantomKind::two_blob: return {0.2, 0.8};
    case PhantomKind::concentric_shells: return {0.3, 0.6, 0.9};
    case PhantomKind::ramp: return {0.1, 0.9};
    case PhantomKind::checker: return {0.25, 0.75};
  }
  return {};
}

// Box-Muller on raw 53-bit draws; independent of library distributions.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = unit(), u2 = unit();
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    spare_ = r * std::sin(2 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2 * std::numbers::pi * u2);
  }

 private:
  double unit() { return double(rng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 rng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace phantom_detail

inline Phantom generate_phantom(const PhantomSpec& spec) {
  const Dims d = spec.dims;
  if (d.nx < 4 || d.ny < 4 || d.nz < 4)
    throw validation_error("bad_dims", "phantom dims must be >= 4 on every axis, got " + d.str());
  if (!(spec.noise_sigma >= 0.0)) throw validation_error("bad_config", "noise sigma must be >= 0");
  const auto levels = spec.levels.empty() ? phantom_detail::default_levels(spec.kind) : spec.levels;
  for (double l : levels)
    if (!(l >= 0.0 && l <= 1.0)) throw validation_error("bad_config", "phantom levels must lie in [0,1]");
  const std::size_t need = spec.kind == PhantomKind::concentric_shells ? 1 : 2;
  if (levels.size() < need) throw validation_error("bad_config", "phantom needs at least " + std::to_string(need) + " levels");

  Phantom ph;
  ph.y = ScalarVolume(d, 0.0f);
  ph.mask = VolumeMask(d, false);
  ph.labels.assign(d.size(), -1);
  const double cx = (d.nx - 1) / 2.0, cy = (d.ny - 1) / 2.0, cz = (d.nz - 1) / 2.0;
  const double rmin = std::min({d.nx, d.ny, d.nz}) / 2.0;

  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        int label = -1;
        double value = 0.0;
        switch (spec.kind) {
          case PhantomKind::two_blob: {
            // two overlapping spheres along x; the overlap goes to the nearer centre
            const double ax = 0.36 * (d.nx - 1), bx = 0.64 * (d.nx - 1), r = 0.52 * rmin;
            const double dy2 = (j - cy) * (j - cy) + (k - cz) * (k - cz);
            const double da2 = (i - ax) * (i - ax) + dy2, db2 = (i - bx) * (i - bx) + dy2;
            if (std::min(da2, db2) <= r * r) label = da2 <= db2 ? 0 : 1;
            if (label >= 0) value = levels[std::size_t(label)];
            break;
          }
          case PhantomKind::concentric_shells: {
            const double rr = std::sqrt((i - cx) * (i - cx) + (j - cy) * (j - cy) + (k - cz) * (k - cz));
            const double rmax = 0.9 * rmin;
            if (rr < rmax) {
              label = std::min(int(levels.size()) - 1, int(rr / rmax * double(levels.size())));
              value = levels[std::size_t(label)];
            }
            break;
          }
          case PhantomKind::ramp: {
            const double t = double(i) / double(d.nx - 1);
            label = 2 * i < d.nx ? 0 : 1;
            value = levels[0] + (levels[1] - levels[0]) * t;
            break;
          }
          case PhantomKind::checker: {
            const int b = std::max(2, std::min({d.nx, d.ny, d.nz}) / 4);
            label = (i / b + j / b + k / b) % 2;
            value = levels[std::size_t(label)];
            break;
          }
        }
        const std::size_t n = linear_index(d, i, j, k);
        ph.labels[n] = label;
        if (label >= 0) {
          ph.mask.set(n, true);
          ph.y[n] = float(value);
          ph.label_count = std::max(ph.label_count, label + 1);
        }
      }

  if (spec.noise_sigma > 0.0) {
    phantom_detail::Gaussian g(spec.seed);
    for (std::size_t n = 0; n < d.size(); ++n)
      if (ph.mask[n]) ph.y[n] = float(std::clamp(double(ph.y[n]) + spec.noise_sigma * g(), 0.0, 1.0));
  }

  ph.reference = ColorVolume{{ph.y, ScalarVolume(d, 0.0f), ScalarVolume(d, 0.0f)}, ColorSpace::YUV};
  for (std::size_t n = 0; n < d.size(); ++n)
    if (ph.labels[n] >= 0) {
      auto c = label_chroma(ph.labels[n]);
      ph.reference[1][n] = float(c[0]);
      ph.reference[2][n] = float(c[1]);
    }
  return ph;
}

// "MRI" proxy: phantom Y plus a smooth low-frequency bias field, clamped to [0,1].
inline ScalarVolume mri_proxy(const Phantom& ph, double amplitude = 0.15) {
  const Dims d = ph.y.dims;
  ScalarVolume out = ph.y;
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        const std::size_t n = linear_index(d, i, j, k);
        if (!ph.mask[n]) continue;
        const double x = double(i) / (d.nx - 1), y = double(j) / (d.ny - 1), z = double(k) / (d.nz - 1);
        const double bias = amplitude * (0.6 * std::cos(std::numbers::pi * x) + 0.4 * std::sin(std::numbers::pi * (y + 0.5 * z)));
        out[n] = float(std::clamp(double(out[n]) + bias, 0.0, 1.0));
      }
  return out;
}

}  // namespace volcolor
