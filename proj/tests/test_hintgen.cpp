#include <gtest/gtest.h>

#include <random>
#include <set>

#include "volcolor/hintgen.hpp"

using namespace volcolor;

namespace {

SliceImage noise_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  SliceImage img(w, h);
  for (auto& b : img.rgb) b = std::uint8_t(rng() & 0xff);
  return img;
}

StyleSamples two_samples() {
  StyleSamples s;
  s.samples = {{0.2, 0.0, -0.1, 0.2, 0, 0}, {0.8, 0.0, 0.15, -0.3, 0, 0}};
  s.global_mean = 0.5;
  s.global_std = 0.3;
  return s;
}

}  // namespace

TEST(SampleStyle, SolidColorGivesIdenticalSamples) {
  SliceImage img(20, 15);
  for (std::size_t n = 0; n < img.pixels(); ++n) img.rgb[3 * n] = 200, img.rgb[3 * n + 1] = 40, img.rgb[3 * n + 2] = 90;
  auto s = sample_style(img, 64, 5, 7);
  ASSERT_EQ(s.samples.size(), 64u);
  auto ref = yuv::from_rgb(200 / 255.0, 40 / 255.0, 90 / 255.0);
  for (const auto& smp : s.samples) {
    EXPECT_NEAR(smp.mean, ref.a, 1e-12);
    EXPECT_NEAR(smp.std, 0.0, 1e-7);
    EXPECT_EQ(smp.u, ref.b);
    EXPECT_EQ(smp.v, ref.c);
  }
  EXPECT_NEAR(s.global_std, 0.0, 1e-7);
}

TEST(SampleStyle, SingleSampleInBounds) {
  auto img = noise_image(9, 7, 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = sample_style(img, 1, 5, seed);
    ASSERT_EQ(s.samples.size(), 1u);
    EXPECT_GE(s.samples[0].x, 2);
    EXPECT_LE(s.samples[0].x, 6);
    EXPECT_GE(s.samples[0].y, 2);
    EXPECT_LE(s.samples[0].y, 4);
  }
}

TEST(SampleStyle, DeterministicAndSpread) {
  auto img = noise_image(64, 48, 2);
  auto a = sample_style(img, 256, 5, 42), b = sample_style(img, 256, 5, 42), c = sample_style(img, 256, 5, 43);
  ASSERT_EQ(a.samples.size(), 256u);
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].x, b.samples[i].x);
    EXPECT_EQ(a.samples[i].y, b.samples[i].y);
    EXPECT_EQ(a.samples[i].mean, b.samples[i].mean);
    differs |= a.samples[i].x != c.samples[i].x || a.samples[i].y != c.samples[i].y;
  }
  EXPECT_TRUE(differs);
  // one sample per jitter cell: 16 x 16 grid over the 60 x 44 origin range
  auto cell_of = [](int o, int span) {
    int c = 0;
    while ((c + 1) * span / 16 <= o) ++c;
    return c;
  };
  std::set<std::pair<int, int>> cells;
  for (const auto& smp : a.samples) cells.insert({cell_of(smp.x - 2, 60), cell_of(smp.y - 2, 44)});
  EXPECT_EQ(cells.size(), 256u);
}

TEST(SampleStyle, Errors) {
  EXPECT_THROW(sample_style(SliceImage(4, 8), 16, 5, 0), Error);
  EXPECT_THROW(sample_style(SliceImage(8, 8), 0, 5, 0), Error);
}

TEST(LuminanceRemap, IdentityConstantAndAffine) {
  Plane p(4, 1);
  p.data = {0.2f, 0.4f, 0.2f, 0.4f};  // mean 0.3, std 0.1
  StyleSamples s = two_samples();
  s.global_mean = 0.3;
  s.global_std = 0.1;
  auto id = luminance_remap(p, s);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_NEAR(id.data[n], p.data[n], 1e-6);

  s.global_mean = 0.6;
  s.global_std = 0.2;
  auto r = luminance_remap(p, s);
  EXPECT_NEAR(r.data[1], 0.8, 1e-6);  // 0.6 + 2 (0.4 - 0.3)
  EXPECT_NEAR(r.data[0], 0.4, 1e-6);

  auto c = luminance_remap(Plane(3, 3, 0.7f), s);
  for (float x : c.data) EXPECT_NEAR(x, 0.6, 1e-7);
  EXPECT_THROW(luminance_remap(p, StyleSamples{}), Error);
}

TEST(TransferColors, SingleSampleFillsSlice) {
  StyleSamples s;
  s.samples = {{0.4, 0.1, 0.05, -0.07, 0, 0}};
  s.global_mean = 0.4;
  s.global_std = 0.1;
  std::mt19937 rng(3);
  Plane g(10, 8);
  for (auto& x : g.data) x = float(rng() % 1000) / 1000.0f;
  auto out = transfer_colors(g, s, 5);
  EXPECT_EQ(out.y.data, g.data);
  for (std::size_t n = 0; n < g.data.size(); ++n) {
    EXPECT_EQ(out.u.data[n], 0.05f);
    EXPECT_EQ(out.v.data[n], -0.07f);
  }
}

TEST(TransferColors, BinaryTargetPicksByBrightness) {
  Plane g(16, 16);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 16; ++u) g(u, v) = u < 8 ? 0.2f : 0.8f;
  auto s = two_samples();
  auto out = transfer_colors(g, s, 5);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 16; ++u) {
      if (u >= 6 && u <= 9) continue;  // windows straddling the edge
      const auto& want = u < 8 ? s.samples[0] : s.samples[1];
      EXPECT_EQ(out.u(u, v), float(want.u));
      EXPECT_EQ(out.v(u, v), float(want.v));
    }
  // every chroma is one of the sample chromas
  for (std::size_t n = 0; n < g.data.size(); ++n) {
    auto k = out.sample_of[n];
    EXPECT_EQ(out.u.data[n], float(s.samples[k].u));
  }
}

TEST(TransferColors, TiesGoToLowestIndex) {
  StyleSamples s;
  s.samples = {{0.5, 0.0, 0.1, 0.1, 0, 0}, {0.5, 0.0, -0.1, -0.1, 0, 0}};
  s.global_mean = 0.5;
  auto out = transfer_colors(Plane(6, 6, 0.5f), s, 5);
  for (auto k : out.sample_of) EXPECT_EQ(k, 0u);
}

TEST(TransferColors, HintImageIsOpaqueAndDeterministic) {
  auto style = noise_image(40, 40, 4);
  auto s = sample_style(style, 64, 5, 9);
  Plane g(12, 12);
  for (std::size_t n = 0; n < g.data.size(); ++n) g.data[n] = float(n % 13) / 12.0f;
  auto a = to_hint_image(transfer_colors(g, s));
  auto b = to_hint_image(transfer_colors(g, sample_style(style, 64, 5, 9)));
  EXPECT_EQ(a, b);
  ASSERT_TRUE(a.has_alpha());
  for (auto x : a.alpha) EXPECT_EQ(x, 255);
  EXPECT_THROW(transfer_colors(Plane(4, 4), s, 5), Error);
  EXPECT_THROW(transfer_colors(g, StyleSamples{}, 5), Error);
}
