#pragma once

#include <png.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "volcolor/slice.hpp"
#include "volcolor/volume.hpp"

namespace volcolor {

static_assert(std::endian::native == std::endian::little, "raw volume I/O assumes a little-endian host");

enum class DType { u8, u16le, f32le };

inline std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::u8: return 1;
    case DType::u16le: return 2;
    case DType::f32le: return 4;
  }
  return 0;
}

inline const char* dtype_name(DType t) {
  switch (t) {
    case DType::u8: return "u8";
    case DType::u16le: return "u16le";
    case DType::f32le: return "f32le";
  }
  return "?";
}

inline DType parse_dtype(const std::string& s) {
  if (s == "u8") return DType::u8;
  if (s == "u16le") return DType::u16le;
  if (s == "f32le") return DType::f32le;
  throw validation_error("unknown_dtype", "unknown dtype '" + s + "'");
}

// JSON sidecar describing a raw payload.
struct VolumeHeader {
  Dims dims;
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  DType dtype = DType::f32le;
  int channels = 1;
  std::uint64_t offset = 0;

  std::size_t payload_bytes() const { return dims.size() * std::size_t(channels) * dtype_size(dtype); }
};

inline nlohmann::json header_to_json(const VolumeHeader& h) {
  return {{"dims", {h.dims.nx, h.dims.ny, h.dims.nz}},
          {"spacing", {h.spacing[0], h.spacing[1], h.spacing[2]}},
          {"dtype", dtype_name(h.dtype)},
          {"channels", h.channels},
          {"offset", h.offset}};
}

inline VolumeHeader header_from_json(const nlohmann::json& j) {
  VolumeHeader h;
  try {
    auto d = j.at("dims");
    if (!d.is_array() || d.size() != 3) throw validation_error("bad_header", "header 'dims' must be [nx,ny,nz]");
    h.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
    if (j.contains("spacing")) {
      auto s = j.at("spacing");
      if (!s.is_array() || s.size() != 3) throw validation_error("bad_header", "header 'spacing' must have 3 entries");
      for (int a = 0; a < 3; ++a) h.spacing[a] = s[a].get<double>();
    }
    h.dtype = parse_dtype(j.at("dtype").get<std::string>());
    h.channels = j.value("channels", 1);
    h.offset = j.value("offset", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("bad_header", std::string("malformed volume header: ") + e.what());
  }
  if (!h.dims.valid()) throw validation_error("bad_header", "header dims must be positive");
  for (double s : h.spacing)
    if (!(s > 0)) throw validation_error("bad_header", "header spacing must be positive");
  if (h.channels != 1 && h.channels != 3) throw validation_error("bad_header", "header channels must be 1 or 3");
  return h;
}

inline VolumeHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("io", "cannot open header " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("bad_header", "header " + path.string() + " is not valid JSON: " + e.what());
  }
  return header_from_json(j);
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("io", "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("io", "cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw io_error("io", "short write to " + path.string());
}

using AnyVolume = std::variant<ScalarVolume, ColorVolume>;

namespace detail {

inline float decode_sample(const std::uint8_t* p, DType t) {
  switch (t) {
    case DType::u8: return static_cast<float>(p[0] / 255.0);
    case DType::u16le: return static_cast<float>((std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8)) / 65535.0);
    case DType::f32le: {
      float f;
      std::memcpy(&f, p, 4);
      return f;
    }
  }
  return 0.0f;
}

inline void encode_sample(std::uint8_t* p, float x, DType t) {
  switch (t) {
    case DType::u8: p[0] = static_cast<std::uint8_t>(quantize_unit(x, 255)); break;
    case DType::u16le: {
      auto q = quantize_unit(x, 65535);
      p[0] = static_cast<std::uint8_t>(q & 0xff);
      p[1] = static_cast<std::uint8_t>(q >> 8);
      break;
    }
    case DType::f32le: std::memcpy(p, &x, 4); break;
  }
}

}  // namespace detail

inline AnyVolume read_volume(const std::filesystem::path& header_path, const std::filesystem::path& raw_path) {
  VolumeHeader h = read_header(header_path);
  auto bytes = read_bytes(raw_path);
  if (bytes.size() < h.offset || bytes.size() - h.offset != h.payload_bytes())
    throw validation_error("size_mismatch", "raw payload " + raw_path.string() + " has " +
                                                std::to_string(bytes.size()) + " bytes; header " +
                                                h.dims.str() + " x" + std::to_string(h.channels) + " " +
                                                dtype_name(h.dtype) + " at offset " + std::to_string(h.offset) +
                                                " needs " + std::to_string(h.payload_bytes() + h.offset));
  const std::uint8_t* base = bytes.data() + h.offset;
  const std::size_t es = dtype_size(h.dtype);
  auto check_finite = [](float f) {
    if (!std::isfinite(f)) throw validation_error("non_finite", "volume contains NaN or Inf samples");
    return f;
  };
  if (h.channels == 1) {
    ScalarVolume v(h.dims);
    v.spacing = h.spacing;
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = check_finite(detail::decode_sample(base + n * es, h.dtype));
    return v;
  }
  ColorVolume c;
  c.space = ColorSpace::RGB;
  for (auto& ch : c.channels) {
    ch = ScalarVolume(h.dims);
    ch.spacing = h.spacing;
  }
  for (std::size_t n = 0; n < h.dims.size(); ++n)
    for (int ch = 0; ch < 3; ++ch) c[ch][n] = check_finite(detail::decode_sample(base + (3 * n + ch) * es, h.dtype));
  return c;
}

inline ScalarVolume read_scalar_volume(const std::filesystem::path& header_path, const std::filesystem::path& raw_path) {
  auto v = read_volume(header_path, raw_path);
  if (auto* s = std::get_if<ScalarVolume>(&v)) return std::move(*s);
  throw validation_error("bad_channels", "expected a single-channel volume in " + header_path.string());
}

inline ColorVolume read_color_volume(const std::filesystem::path& header_path, const std::filesystem::path& raw_path) {
  auto v = read_volume(header_path, raw_path);
  if (auto* c = std::get_if<ColorVolume>(&v)) return std::move(*c);
  throw validation_error("bad_channels", "expected a 3-channel volume in " + header_path.string());
}

namespace detail {
inline void write_header_file(const std::filesystem::path& header_path, const VolumeHeader& h) {
  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw io_error("io", "cannot write " + header_path.string());
  out << header_to_json(h).dump(2) << "\n";
  if (!out) throw io_error("io", "short write to " + header_path.string());
}
}  // namespace detail

inline void write_volume(const ScalarVolume& v, const std::filesystem::path& header_path,
                         const std::filesystem::path& raw_path, DType dtype) {
  VolumeHeader h{v.dims, v.spacing, dtype, 1, 0};
  std::vector<std::uint8_t> buf(h.payload_bytes());
  const std::size_t es = dtype_size(dtype);
  for (std::size_t n = 0; n < v.size(); ++n) detail::encode_sample(buf.data() + n * es, v[n], dtype);
  write_bytes(raw_path, buf.data(), buf.size());
  detail::write_header_file(header_path, h);
}

// Color volumes are written as RGB, channel-interleaved.
inline void write_volume(const ColorVolume& c, const std::filesystem::path& header_path,
                         const std::filesystem::path& raw_path, DType dtype) {
  const ColorVolume rgb = c.space == ColorSpace::RGB ? c : yuv_to_rgb(c);
  check_channels(rgb);
  VolumeHeader h{rgb.dims(), rgb[0].spacing, dtype, 3, 0};
  std::vector<std::uint8_t> buf(h.payload_bytes());
  const std::size_t es = dtype_size(dtype);
  for (std::size_t n = 0; n < h.dims.size(); ++n)
    for (int ch = 0; ch < 3; ++ch) detail::encode_sample(buf.data() + (3 * n + ch) * es, rgb[ch][n], dtype);
  write_bytes(raw_path, buf.data(), buf.size());
  detail::write_header_file(header_path, h);
}

inline void write_mask(const VolumeMask& m, const std::filesystem::path& header_path,
                       const std::filesystem::path& raw_path) {
  VolumeHeader h{m.dims, {1.0, 1.0, 1.0}, DType::u8, 1, 0};
  std::vector<std::uint8_t> buf(m.data.size());
  for (std::size_t n = 0; n < buf.size(); ++n) buf[n] = m.data[n] ? 255 : 0;
  write_bytes(raw_path, buf.data(), buf.size());
  detail::write_header_file(header_path, h);
}

// Any single-channel volume; samples >= 0.5 are foreground.
inline VolumeMask read_mask(const std::filesystem::path& header_path, const std::filesystem::path& raw_path) {
  ScalarVolume v = read_scalar_volume(header_path, raw_path);
  VolumeMask m(v.dims, false);
  for (std::size_t n = 0; n < v.size(); ++n) m.set(n, v[n] >= 0.5f);
  return m;
}

// Raw path convention used by the CLI: "<stem>.json" + "<stem>.raw".
inline std::filesystem::path raw_path_for(const std::filesystem::path& header_path) {
  auto p = header_path;
  return p.replace_extension(".raw");
}

// ---------------------------------------------------------------- PNG

namespace detail {
struct PngFile {
  FILE* fp = nullptr;
  ~PngFile() {
    if (fp) std::fclose(fp);
  }
};
}  // namespace detail

inline SliceImage read_slice_png(const std::filesystem::path& path) {
  detail::PngFile f{std::fopen(path.string().c_str(), "rb")};
  if (!f.fp) throw io_error("io", "cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw validation_error("not_png", path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw io_error("io", "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw io_error("io", "libpng init failed");
  }
  std::string failure;
  SliceImage img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  int color_type = 0, bit_depth = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw validation_error("bad_png", "failed to decode PNG " + path.string());
  }
  png_init_io(png, f.fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  color_type = png_get_color_type(png, info);
  bit_depth = png_get_bit_depth(png, info);
  if (bit_depth != 8) failure = "unsupported bit depth " + std::to_string(bit_depth) + ": expected 8-bit";
  else if (color_type != PNG_COLOR_TYPE_RGB && color_type != PNG_COLOR_TYPE_RGB_ALPHA)
    failure = "unsupported: expected RGB/RGBA";
  if (failure.empty()) {
    const int channels = color_type == PNG_COLOR_TYPE_RGB_ALPHA ? 4 : 3;
    raw.resize(std::size_t(w) * h * channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + std::size_t(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    img = SliceImage(static_cast<int>(w), static_cast<int>(h), channels == 4);
    for (std::size_t n = 0; n < img.pixels(); ++n) {
      for (int c = 0; c < 3; ++c) img.rgb[3 * n + c] = raw[n * channels + c];
      if (channels == 4) img.alpha[n] = raw[n * channels + 3];
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) throw validation_error("unsupported_png", path.string() + ": " + failure);
  return img;
}

inline void write_slice_png(const SliceImage& img, const std::filesystem::path& path) {
  if (img.rgb.size() != img.pixels() * 3 || (img.has_alpha() && img.alpha.size() != img.pixels()))
    throw validation_error("bad_image", "slice image buffers do not match its size");
  detail::PngFile f{std::fopen(path.string().c_str(), "wb")};
  if (!f.fp) throw io_error("io", "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw io_error("io", "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw io_error("io", "libpng init failed");
  }
  const int channels = img.has_alpha() ? 4 : 3;
  std::vector<std::uint8_t> raw(img.pixels() * channels);
  for (std::size_t n = 0; n < img.pixels(); ++n) {
    for (int c = 0; c < 3; ++c) raw[n * channels + c] = img.rgb[3 * n + c];
    if (channels == 4) raw[n * channels + 3] = img.alpha[n];
  }
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + std::size_t(y) * img.width * channels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error("io", "failed to encode PNG " + path.string());
  }
  png_init_io(png, f.fp);
  png_set_IHDR(png, info, img.width, img.height, 8, img.has_alpha() ? PNG_COLOR_TYPE_RGB_ALPHA : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace volcolor
