#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "volcolor/error.hpp"
#include "volcolor/parallel.hpp"
#include "volcolor/slice.hpp"
#include "volcolor/volume.hpp"

namespace volcolor {

// Example-based hint generation: jittered luminance-statistics samples from a
// style photograph, matched per pixel against a grayscale slice.

struct StyleSample {
  double mean = 0, std = 0;  // luminance over the s x s window
  double u = 0, v = 0;       // chroma at the window centre
  int x = 0, y = 0;          // window centre in the style image
};

struct StyleSamples {
  std::vector<StyleSample> samples;
  int window = 5;
  std::uint64_t seed = 0;
  double global_mean = 0, global_std = 0;  // luminance of the whole style image
};

struct HintgenParams {
  int samples = 256;
  int window = 5;
  std::uint64_t seed = 0;
};

namespace hintgen_detail {

inline double pixel_luma(const SliceImage& img, std::size_t n) {
  return yuv::from_rgb(img.rgb[3 * n] / 255.0, img.rgb[3 * n + 1] / 255.0, img.rgb[3 * n + 2] / 255.0).a;
}

// Fisher-Yates with a plain modulo draw, so the permutation does not depend
// on the standard library's distribution implementations.
inline std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng() % i]);
  return p;
}

inline void mean_std(const std::vector<double>& x, double& mean, double& sd) {
  long double s = 0;
  for (double v : x) s += v;
  mean = double(s / x.size());
  long double q = 0;
  for (double v : x) q += (v - mean) * (v - mean);
  sd = std::sqrt(double(q / x.size()));
}

}  // namespace hintgen_detail

inline Plane luminance_plane(const SliceImage& img) {
  Plane p(img.width, img.height);
  for (std::size_t n = 0; n < img.pixels(); ++n) p.data[n] = float(hintgen_detail::pixel_luma(img, n));
  return p;
}

inline StyleSamples sample_style(const SliceImage& style, int n = 256, int s = 5, std::uint64_t seed = 0) {
  if (n < 1) throw validation_error("bad_config", "sample count must be >= 1");
  if (s < 1) throw validation_error("bad_config", "window size must be >= 1");
  if (style.width < s || style.height < s)
    throw validation_error("style_too_small", "style image " + std::to_string(style.width) + "x" +
                                                  std::to_string(style.height) + " is smaller than the " +
                                                  std::to_string(s) + "x" + std::to_string(s) + " window");
  const int w = style.width, h = style.height;
  std::vector<double> luma(style.pixels());
  for (std::size_t p = 0; p < luma.size(); ++p) luma[p] = hintgen_detail::pixel_luma(style, p);

  StyleSamples out;
  out.window = s;
  out.seed = seed;
  hintgen_detail::mean_std(luma, out.global_mean, out.global_std);

  // Jitter grid over admissible window origins, so every window lies inside the image.
  const int span_x = w - s + 1, span_y = h - s + 1;
  const int g = int(std::ceil(std::sqrt(double(n))));
  std::mt19937_64 rng(seed);
  auto order = hintgen_detail::permutation(std::size_t(g) * g, rng);
  auto cell_range = [g](int c, int span, int& lo, int& len) {
    lo = int(std::int64_t(c) * span / g);
    int hi = int(std::int64_t(c + 1) * span / g);
    if (lo >= span) lo = span - 1;
    len = std::max(1, hi - lo);
  };
  std::vector<double> win(std::size_t(s) * s);
  out.samples.reserve(std::size_t(n));
  for (int t = 0; t < n; ++t) {
    const std::size_t cell = order[std::size_t(t)];
    int x0, lx, y0, ly;
    cell_range(int(cell % g), span_x, x0, lx);
    cell_range(int(cell / g), span_y, y0, ly);
    x0 += int(rng() % std::uint64_t(lx));
    y0 += int(rng() % std::uint64_t(ly));
    for (int b = 0; b < s; ++b)
      for (int a = 0; a < s; ++a) win[std::size_t(b) * s + a] = luma[std::size_t(y0 + b) * w + (x0 + a)];
    StyleSample smp;
    hintgen_detail::mean_std(win, smp.mean, smp.std);
    smp.x = x0 + s / 2;
    smp.y = y0 + s / 2;
    const std::size_t c = std::size_t(smp.y) * w + smp.x;
    auto t3 = yuv::from_rgb(style.rgb[3 * c] / 255.0, style.rgb[3 * c + 1] / 255.0, style.rgb[3 * c + 2] / 255.0);
    smp.u = t3.b;
    smp.v = t3.c;
    out.samples.push_back(smp);
  }
  return out;
}

// Affine map of the slice luminance onto the style's global mean and std.
inline Plane luminance_remap(const Plane& gray, const StyleSamples& samples) {
  if (samples.samples.empty()) throw validation_error("empty_samples", "style samples are empty");
  std::vector<double> x(gray.data.begin(), gray.data.end());
  double m = 0, sd = 0;
  if (!x.empty()) hintgen_detail::mean_std(x, m, sd);
  Plane out = gray;
  for (auto& v : out.data) {
    double r = sd > 0 ? samples.global_mean + samples.global_std / sd * (double(v) - m) : samples.global_mean;
    v = float(r);
  }
  return out;
}

struct ColoredSlice {
  Plane y, u, v;
  std::vector<std::uint32_t> sample_of;  // chosen sample per pixel
};

inline ColoredSlice transfer_colors(const Plane& gray, const StyleSamples& samples, int s = 5) {
  if (samples.samples.empty()) throw validation_error("empty_samples", "style samples are empty");
  if (s < 1) throw validation_error("bad_config", "window size must be >= 1");
  if (gray.width < s || gray.height < s)
    throw validation_error("slice_too_small", "slice is smaller than the matching window");
  const int w = gray.width, h = gray.height;
  const Plane remapped = luminance_remap(gray, samples);

  ColoredSlice out{gray, Plane(w, h), Plane(w, h), std::vector<std::uint32_t>(gray.data.size())};
  const int lo = -(s / 2), hi = s - 1 - s / 2;
  parallel_for(gray.data.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> win(std::size_t(s) * s);
    for (std::size_t p = b; p < e; ++p) {
      const int pu = int(p % std::size_t(w)), pv = int(p / std::size_t(w));
      std::size_t t = 0;
      for (int dv = lo; dv <= hi; ++dv)
        for (int du = lo; du <= hi; ++du)
          win[t++] = remapped(std::clamp(pu + du, 0, w - 1), std::clamp(pv + dv, 0, h - 1));
      double m, sd;
      hintgen_detail::mean_std(win, m, sd);
      std::uint32_t best = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < samples.samples.size(); ++q) {
        const auto& smp = samples.samples[q];
        double cost = 0.5 * std::abs(m - smp.mean) + 0.5 * std::abs(sd - smp.std);
        if (cost < best_cost) {
          best_cost = cost;
          best = std::uint32_t(q);
        }
      }
      out.sample_of[p] = best;
      out.u.data[p] = float(samples.samples[best].u);
      out.v.data[p] = float(samples.samples[best].v);
    }
  }, 256);
  return out;
}

// RGBA hint image (alpha 255 everywhere).
inline SliceImage to_hint_image(const ColoredSlice& c) {
  SliceImage img(c.y.width, c.y.height, true);
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    auto rgb = yuv::to_rgb(c.y.data[n], c.u.data[n], c.v.data[n]);
    img.rgb[3 * n] = to_u8(rgb.a);
    img.rgb[3 * n + 1] = to_u8(rgb.b);
    img.rgb[3 * n + 2] = to_u8(rgb.c);
  }
  return img;
}

}  // namespace volcolor
