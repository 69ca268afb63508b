#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "volcolor/io.hpp"
#include "volcolor/slice.hpp"

using namespace volcolor;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("volcolor_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

private:
  fs::path path_;
};

void write_header(const fs::path& p, const std::string& json) {
  std::ofstream(p) << json;
}

void write_raw(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

ScalarVolume random_volume(Dims d, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ScalarVolume v(d);
  for (auto& x : v.data) x = u(rng);
  return v;
}

}  // namespace

TEST(ReadVolume, U8AllOnes) {
  TempDir dir;
  write_header(dir / "v.json", R"({"dims":[2,2,2],"spacing":[1,1,1],"dtype":"u8","channels":1,"offset":0})");
  write_raw(dir / "v.raw", std::vector<std::uint8_t>(8, 255));
  auto v = read_scalar_volume(dir / "v.json", dir / "v.raw");
  EXPECT_EQ(v.dims, (Dims{2, 2, 2}));
  for (auto x : v.data) EXPECT_EQ(x, 1.0f);
}

TEST(ReadVolume, SizeMismatch) {
  TempDir dir;
  write_header(dir / "v.json", R"({"dims":[2,2,2],"spacing":[1,1,1],"dtype":"u8","channels":1,"offset":0})");
  write_raw(dir / "v.raw", std::vector<std::uint8_t>(7, 0));
  try {
    read_volume(dir / "v.json", dir / "v.raw");
    FAIL() << "expected size mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "size_mismatch");
  }
}

TEST(ReadVolume, U16Midpoint) {
  TempDir dir;
  write_header(dir / "v.json", R"({"dims":[1,1,1],"spacing":[1,1,1],"dtype":"u16le","channels":1})");
  write_raw(dir / "v.raw", {0x00, 0x80});
  auto v = read_scalar_volume(dir / "v.json", dir / "v.raw");
  EXPECT_NEAR(v[0], 32768.0 / 65535.0, 1e-7);
  EXPECT_NEAR(v[0], 0.50000763, 1e-7);
}

TEST(ReadVolume, HeaderErrors) {
  TempDir dir;
  write_raw(dir / "v.raw", std::vector<std::uint8_t>(8, 0));
  write_header(dir / "bad.json", R"({"dims":[2,2,2],"dtype":"u12"})");
  EXPECT_THROW(read_volume(dir / "bad.json", dir / "v.raw"), Error);
  write_header(dir / "bad2.json", R"({"dims":[2,2],"dtype":"u8"})");
  EXPECT_THROW(read_volume(dir / "bad2.json", dir / "v.raw"), Error);
  write_header(dir / "bad3.json", "not json");
  EXPECT_THROW(read_volume(dir / "bad3.json", dir / "v.raw"), Error);
  write_header(dir / "bad4.json", R"({"dims":[2,2,2],"dtype":"u8","channels":2})");
  EXPECT_THROW(read_volume(dir / "bad4.json", dir / "v.raw"), Error);
}

TEST(ReadVolume, HonoursOffset) {
  TempDir dir;
  write_header(dir / "v.json", R"({"dims":[1,1,2],"dtype":"u8","channels":1,"offset":3})");
  write_raw(dir / "v.raw", {9, 9, 9, 0, 255});
  auto v = read_scalar_volume(dir / "v.json", dir / "v.raw");
  EXPECT_EQ(v[0], 0.0f);
  EXPECT_EQ(v[1], 1.0f);
}

TEST(WriteVolume, F32RoundTripIsBitExact) {
  TempDir dir;
  auto v = random_volume({5, 3, 4}, 1);
  v.spacing = {0.5, 1.0, 2.0};
  write_volume(v, dir / "v.json", dir / "v.raw", DType::f32le);
  auto back = read_scalar_volume(dir / "v.json", dir / "v.raw");
  EXPECT_EQ(back.data, v.data);
  EXPECT_EQ(back.spacing, v.spacing);
}

TEST(WriteVolume, U8HalfQuantizesDown) {
  TempDir dir;
  ScalarVolume v({1, 1, 1}, 0.5f);
  write_volume(v, dir / "v.json", dir / "v.raw", DType::u8);
  auto back = read_scalar_volume(dir / "v.json", dir / "v.raw");
  EXPECT_NEAR(back[0], 127.0 / 255.0, 1e-7);
  EXPECT_NEAR(back[0], 0.49803922, 1e-7);
}

TEST(WriteVolume, QuantizationBounds) {
  TempDir dir;
  auto v = random_volume({8, 8, 8}, 2);
  write_volume(v, dir / "a.json", dir / "a.raw", DType::u16le);
  auto b16 = read_scalar_volume(dir / "a.json", dir / "a.raw");
  write_volume(v, dir / "b.json", dir / "b.raw", DType::u8);
  auto b8 = read_scalar_volume(dir / "b.json", dir / "b.raw");
  for (std::size_t n = 0; n < v.size(); ++n) {
    EXPECT_LE(std::abs(double(b16[n]) - v[n]), 1.0 / (2 * 65535.0) + 1e-7);
    EXPECT_LE(std::abs(double(b8[n]) - v[n]), 1.0 / (2 * 255.0) + 1e-7);
  }
}

TEST(WriteVolume, ColorVolumeIsInterleaved) {
  TempDir dir;
  Dims d{2, 1, 1};
  ColorVolume c{{ScalarVolume(d, 1.0f), ScalarVolume(d, 0.0f), ScalarVolume(d, 0.0f)}, ColorSpace::RGB};
  c[2][1] = 1.0f;
  write_volume(c, dir / "c.json", dir / "c.raw", DType::u8);
  auto bytes = read_bytes(dir / "c.raw");
  EXPECT_EQ(bytes, (std::vector<std::uint8_t>{255, 0, 0, 255, 0, 255}));
  auto back = read_color_volume(dir / "c.json", dir / "c.raw");
  EXPECT_EQ(back[2][1], 1.0f);
  EXPECT_THROW(read_scalar_volume(dir / "c.json", dir / "c.raw"), Error);
}

TEST(SlicePng, RgbaRoundTrip) {
  TempDir dir;
  SliceImage img(2, 2, true);
  for (std::size_t n = 0; n < img.pixels(); ++n) img.rgb[3 * n] = 255;
  img.alpha[3] = 7;
  write_slice_png(img, dir / "red.png");
  auto back = read_slice_png(dir / "red.png");
  EXPECT_EQ(back, img);
}

TEST(SlicePng, RgbRoundTripHasNoAlpha) {
  TempDir dir;
  SliceImage img(3, 2);
  for (std::size_t n = 0; n < img.rgb.size(); ++n) img.rgb[n] = static_cast<std::uint8_t>(n * 13);
  write_slice_png(img, dir / "rgb.png");
  auto back = read_slice_png(dir / "rgb.png");
  EXPECT_FALSE(back.has_alpha());
  EXPECT_EQ(back, img);
}

namespace {
void write_png_raw(const fs::path& path, int color_type, int bit_depth) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, 2, 2, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<std::uint8_t> row(2 * channels * (bit_depth / 8), 0x40);
  for (int y = 0; y < 2; ++y) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}
}  // namespace

TEST(SlicePng, RejectsGrayscale) {
  TempDir dir;
  write_png_raw(dir / "g.png", PNG_COLOR_TYPE_GRAY, 8);
  try {
    read_slice_png(dir / "g.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported: expected RGB/RGBA"), std::string::npos);
  }
}

TEST(SlicePng, RejectsSixteenBit) {
  TempDir dir;
  write_png_raw(dir / "d.png", PNG_COLOR_TYPE_RGB, 16);
  try {
    read_slice_png(dir / "d.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bit depth"), std::string::npos);
  }
}

TEST(SlicePng, RejectsNonPng) {
  TempDir dir;
  write_header(dir / "x.png", "definitely not a png");
  EXPECT_THROW(read_slice_png(dir / "x.png"), Error);
}

TEST(ExtractSlice, SingleVoxel) {
  ScalarVolume v({1, 1, 1}, 1.0f);
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    auto img = extract_slice(v, a, 0);
    EXPECT_EQ(img.width, 1);
    EXPECT_EQ(img.height, 1);
    EXPECT_EQ(img.rgb, (std::vector<std::uint8_t>{255, 255, 255}));
  }
}

TEST(ExtractSlice, ZRampSliceIsConstant) {
  Dims d{4, 5, 6};
  ScalarVolume v(d);
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) v(i, j, k) = float(k) / float(d.nz - 1);
  for (int k = 0; k < d.nz; ++k) {
    auto p = extract_plane(v, Axis::Z, k);
    for (auto x : p.data) EXPECT_EQ(x, p.data[0]);
    auto img = extract_slice(v, Axis::Z, k);
    EXPECT_EQ(img.width, 4);
    EXPECT_EQ(img.height, 5);
  }
}

TEST(ExtractSlice, XSliceLayout) {
  Dims d{3, 4, 5};
  ScalarVolume v(d);
  for (std::size_t n = 0; n < d.size(); ++n) v[n] = float(n);
  for (int index = 0; index < 3; ++index) {
    auto p = extract_plane(v, Axis::X, index);
    ASSERT_EQ(p.width, 4);
    ASSERT_EQ(p.height, 5);
    for (int u = 0; u < 4; ++u)
      for (int w = 0; w < 5; ++w) EXPECT_EQ(p(u, w), v(index, u, w));
  }
  auto py = extract_plane(v, Axis::Y, 2);
  EXPECT_EQ(py.width, 3);
  EXPECT_EQ(py.height, 5);
  EXPECT_EQ(py(1, 4), v(1, 2, 4));
  EXPECT_THROW(extract_plane(v, Axis::X, 3), Error);
  EXPECT_THROW(extract_slice(v, Axis::Z, -1), Error);
}

TEST(ExtractSlice, ReinsertionIsExact) {
  auto v = random_volume({4, 3, 5}, 9);
  for (Axis a : {Axis::X, Axis::Y, Axis::Z})
    for (int idx = 0; idx < v.dims.extent(int(a)); ++idx) {
      ScalarVolume w = v;
      auto p = extract_plane(v, a, idx);
      for (std::size_t n = 0; n < w.size(); ++n) w[n] = -1.0f;
      insert_plane(w, a, idx, p);
      EXPECT_EQ(extract_plane(w, a, idx).data, p.data);
    }
}
