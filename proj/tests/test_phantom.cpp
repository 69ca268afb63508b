#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "volcolor/fusion.hpp"
#include "volcolor/phantom.hpp"

using namespace volcolor;

TEST(Phantom, TwoBlobHasTwoLabels) {
  auto ph = generate_phantom({PhantomKind::two_blob, {16, 16, 16}, {0.2, 0.8}, 0.0, 1});
  std::set<int> labels;
  std::set<float> values;
  for (std::size_t n = 0; n < ph.labels.size(); ++n) {
    EXPECT_EQ(ph.labels[n] >= 0, ph.mask[n]);
    if (ph.mask[n]) labels.insert(ph.labels[n]), values.insert(ph.y[n]);
    else EXPECT_EQ(ph.y[n], 0.0f);
  }
  EXPECT_EQ(labels, (std::set<int>{0, 1}));
  EXPECT_EQ(values, (std::set<float>{0.2f, 0.8f}));
  EXPECT_EQ(ph.label_count, 2);
}

TEST(Phantom, ShellsFollowRadius) {
  auto ph = generate_phantom({PhantomKind::concentric_shells, {32, 32, 32}, {}, 0.0, 0});
  const double c = 15.5, rmax = 0.9 * 16.0;
  for (int k = 0; k < 32; ++k)
    for (int j = 0; j < 32; ++j)
      for (int i = 0; i < 32; ++i) {
        double r = std::sqrt((i - c) * (i - c) + (j - c) * (j - c) + (k - c) * (k - c));
        int want = r < rmax ? std::min(2, int(r / rmax * 3)) : -1;
        EXPECT_EQ(ph.labels[linear_index(ph.y.dims, i, j, k)], want);
      }
}

TEST(Phantom, DeterministicAndNoisy) {
  PhantomSpec s{PhantomKind::two_blob, {12, 10, 8}, {0.2, 0.8}, 0.02, 77};
  auto a = generate_phantom(s), b = generate_phantom(s);
  EXPECT_EQ(a.y.data, b.y.data);
  s.seed = 78;
  auto c = generate_phantom(s);
  EXPECT_NE(a.y.data, c.y.data);
  double ss = 0;
  std::size_t n0 = 0;
  for (std::size_t n = 0; n < a.y.size(); ++n)
    if (a.labels[n] == 0) ss += (a.y[n] - 0.2) * (a.y[n] - 0.2), ++n0;
  EXPECT_NEAR(std::sqrt(ss / double(n0)), 0.02, 0.005);
}

TEST(Phantom, ReferenceChromaMatchesLabels) {
  for (auto kind : {PhantomKind::two_blob, PhantomKind::concentric_shells, PhantomKind::ramp, PhantomKind::checker}) {
    auto ph = generate_phantom({kind, {9, 8, 10}, {}, 0.01, 3});
    EXPECT_EQ(ph.reference.space, ColorSpace::YUV);
    EXPECT_EQ(ph.reference[0].data, ph.y.data);
    for (std::size_t n = 0; n < ph.labels.size(); ++n) {
      if (ph.labels[n] < 0) continue;
      auto c = label_chroma(ph.labels[n]);
      EXPECT_EQ(ph.reference[1][n], float(c[0]));
      EXPECT_EQ(ph.reference[2][n], float(c[1]));
    }
  }
}

TEST(Phantom, PiecewiseConstantWithoutNoise) {
  auto ph = generate_phantom({PhantomKind::checker, {8, 8, 8}, {0.1, 0.6}, 0.0, 0});
  for (std::size_t n = 0; n < ph.labels.size(); ++n) EXPECT_EQ(ph.y[n], ph.labels[n] == 0 ? 0.1f : 0.6f);
}

TEST(Phantom, Errors) {
  EXPECT_THROW(generate_phantom({PhantomKind::ramp, {3, 8, 8}, {}, 0, 0}), Error);
  EXPECT_THROW(generate_phantom({PhantomKind::ramp, {8, 8, 8}, {0.1, 1.5}, 0, 0}), Error);
  EXPECT_THROW(generate_phantom({PhantomKind::ramp, {8, 8, 8}, {0.5}, 0, 0}), Error);
  EXPECT_THROW(parse_phantom_kind("sphere"), Error);
  EXPECT_EQ(parse_phantom_kind("two-blob"), PhantomKind::two_blob);
}

TEST(Phantom, FusionSuppressesBias) {
  auto ph = generate_phantom({PhantomKind::concentric_shells, {16, 16, 16}, {}, 0.0, 0});
  auto mri = mri_proxy(ph);
  auto fused = fuse(mri, ph.y, &ph.mask, {});
  double before = 0, after = 0;
  for (std::size_t n = 0; n < ph.y.size(); ++n) {
    before += (mri[n] - ph.y[n]) * (mri[n] - ph.y[n]);
    after += (fused.volume[n] - ph.y[n]) * (fused.volume[n] - ph.y[n]);
  }
  EXPECT_LT(after, 0.25 * before);
}
