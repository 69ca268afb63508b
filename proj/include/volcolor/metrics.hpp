#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "volcolor/error.hpp"
#include "volcolor/parallel.hpp"
#include "volcolor/volume.hpp"

namespace volcolor {

enum class SsimMode { global, windowed };

struct MetricsConfig {
  double dynamic_range = 1.0;
  double c1 = 1e-4;  // (0.01 L)^2
  double c2 = 9e-4;  // (0.03 L)^2
  SsimMode mode = SsimMode::global;
  int window = 11;
  double window_sigma = 1.5;

  void validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw validation_error("bad_config", "ssim constants must be positive");
    if (!(dynamic_range > 0.0)) throw validation_error("bad_config", "dynamic range must be positive");
    if (window < 1 || window % 2 == 0) throw validation_error("bad_config", "ssim window must be odd and positive");
    if (!(window_sigma > 0.0)) throw validation_error("bad_config", "ssim window sigma must be positive");
  }
};

namespace metrics_detail {

inline double ssim_quotient(double ma, double mb, double va, double vb, double cov, double c1, double c2) {
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

// Separable Gaussian smoothing; the kernel is truncated at the volume border
// and renormalized over the samples that remain.
class GaussianSmoother {
 public:
  GaussianSmoother(const Dims& d, int window, double sigma) : d_(d), r_(window / 2) {
    taps_.resize(std::size_t(2 * r_ + 1));
    for (int t = -r_; t <= r_; ++t) taps_[std::size_t(t + r_)] = std::exp(-double(t) * t / (2 * sigma * sigma));
  }

  std::vector<double> operator()(std::vector<double> f) const {
    std::vector<double> tmp(f.size());
    for (int axis = 0; axis < 3; ++axis) {
      pass(f, tmp, axis);
      f.swap(tmp);
    }
    return f;
  }

 private:
  void pass(const std::vector<double>& in, std::vector<double>& out, int axis) const {
    const int ext = d_.extent(axis);
    const std::size_t stride = axis == 0 ? 1 : axis == 1 ? std::size_t(d_.nx) : std::size_t(d_.nx) * d_.ny;
    parallel_for(in.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t n = b; n < e; ++n) {
        const VoxelIndex p = voxel_at(d_, n);
        const int c = axis == 0 ? p.i : axis == 1 ? p.j : p.k;
        double s = 0.0, w = 0.0;
        for (int t = std::max(-r_, -c); t <= std::min(r_, ext - 1 - c); ++t) {
          const double tw = taps_[std::size_t(t + r_)];
          s += tw * in[std::size_t(std::ptrdiff_t(n) + std::ptrdiff_t(t) * std::ptrdiff_t(stride))];
          w += tw;
        }
        out[n] = s / w;
      }
    });
  }

  Dims d_;
  int r_;
  std::vector<double> taps_;
};

}  // namespace metrics_detail

inline double ssim(const ScalarVolume& a, const ScalarVolume& b, const MetricsConfig& cfg = {}) {
  require_same_dims(a.dims, b.dims, "ssim");
  cfg.validate();
  const std::size_t n = a.size();
  if (cfg.mode == SsimMode::global) {
    long double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) ma += a[i], mb += b[i];
    ma /= n;
    mb /= n;
    long double va = 0, vb = 0, cov = 0;
    for (std::size_t i = 0; i < n; ++i) {
      long double da = a[i] - ma, db = b[i] - mb;
      va += da * da;
      vb += db * db;
      cov += da * db;
    }
    return metrics_detail::ssim_quotient(double(ma), double(mb), double(va / n), double(vb / n), double(cov / n),
                                         cfg.c1, cfg.c2);
  }

  metrics_detail::GaussianSmoother blur(a.dims, cfg.window, cfg.window_sigma);
  std::vector<double> fa(n), fb(n), faa(n), fbb(n), fab(n);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = a[i];
    fb[i] = b[i];
    faa[i] = double(a[i]) * a[i];
    fbb[i] = double(b[i]) * b[i];
    fab[i] = double(a[i]) * b[i];
  }
  auto ma = blur(std::move(fa)), mb = blur(std::move(fb));
  auto saa = blur(std::move(faa)), sbb = blur(std::move(fbb)), sab = blur(std::move(fab));
  long double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double va = saa[i] - ma[i] * ma[i], vb = sbb[i] - mb[i] * mb[i], cov = sab[i] - ma[i] * mb[i];
    total += metrics_detail::ssim_quotient(ma[i], mb[i], va, vb, cov, cfg.c1, cfg.c2);
  }
  return double(total / n);
}

inline double mse(const ScalarVolume& a, const ScalarVolume& b) {
  require_same_dims(a.dims, b.dims, "mse");
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    long double d = (long double)a[i] - b[i];
    s += d * d;
  }
  return double(s / a.size());
}

inline double psnr_from_mse(double m, double dynamic_range = 1.0) {
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dynamic_range * dynamic_range / m);
}

inline double psnr(const ScalarVolume& a, const ScalarVolume& b, const MetricsConfig& cfg = {}) {
  return psnr_from_mse(mse(a, b), cfg.dynamic_range);
}

struct ChannelMetrics {
  double ssim = 0, psnr = 0, mse = 0;
};

struct MetricsReport {
  std::array<ChannelMetrics, 3> per_channel;
  double ssim = 0, psnr = 0, mse = 0;  // channel means
};

inline MetricsReport evaluate(const ColorVolume& a, const ColorVolume& b, const MetricsConfig& cfg = {}) {
  if (a.space != ColorSpace::RGB || b.space != ColorSpace::RGB)
    throw validation_error("bad_space", "metrics expect RGB volumes");
  check_channels(a);
  check_channels(b);
  require_same_dims(a.dims(), b.dims(), "metrics");
  MetricsReport r;
  for (int c = 0; c < 3; ++c) {
    auto& m = r.per_channel[std::size_t(c)];
    m.ssim = ssim(a[c], b[c], cfg);
    m.mse = mse(a[c], b[c]);
    m.psnr = psnr_from_mse(m.mse, cfg.dynamic_range);
    r.ssim += m.ssim / 3.0;
    r.mse += m.mse / 3.0;
    r.psnr += m.psnr / 3.0;
  }
  return r;
}

// JSON has no infinity; it is written as the string "inf".
inline nlohmann::json number_or_inf(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json pc;
  const char* names[3] = {"r", "g", "b"};
  for (int c = 0; c < 3; ++c) {
    const auto& m = r.per_channel[std::size_t(c)];
    pc[names[c]] = {{"ssim", m.ssim}, {"psnr", number_or_inf(m.psnr)}, {"mse", m.mse}};
  }
  return {{"ssim", r.ssim}, {"psnr", number_or_inf(r.psnr)}, {"mse", r.mse}, {"per_channel", pc}};
}

}  // namespace volcolor
