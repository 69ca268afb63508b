#pragma once

// End-to-end orchestration: optional fusion, hint-slice selection, hint
// generation or ingestion, colorization, previews and metrics.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "volcolor/colorize.hpp"
#include "volcolor/error.hpp"
#include "volcolor/fusion.hpp"
#include "volcolor/hintgen.hpp"
#include "volcolor/io.hpp"
#include "volcolor/metrics.hpp"
#include "volcolor/phantom.hpp"

namespace volcolor {

namespace fs = std::filesystem;

struct HintFile {
  fs::path path;
  Axis axis = Axis::Z;
  int index = 0;
};

struct PipelineConfig {
  fs::path volume;  // grayscale input; unused when fusion is enabled
  fs::path mask;

  bool fuse = false;
  fs::path gradient_source, intensity_source;
  FusionConfig fusion;

  HintSelectionParams selection;
  std::vector<int> slices;  // explicit slice indices; empty means automatic selection
  fs::path style;
  HintgenParams hintgen;
  std::vector<HintFile> hint_files;  // pre-made hints; take precedence over style

  ColorizeConfig colorize;
  fs::path reference;  // RGB volume for metrics
  MetricsConfig metrics;

  fs::path out = "out";
  std::uint64_t seed = 0;
};

// ----------------------------------------------------------------- JSON

namespace pipeline_detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() || base.empty() ? q : base / q;
}

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("bad_config", std::string("config field '") + key + "': " + e.what());
  }
}

inline void get_path(const nlohmann::json& j, const char* key, const fs::path& base, fs::path& out) {
  std::string s;
  get_if(j, key, s);
  if (!s.empty()) out = resolve(base, s);
}

inline void require_file(const fs::path& p, const char* what) {
  if (!p.empty() && !fs::exists(p)) throw validation_error("missing_file", std::string(what) + " not found: " + p.string());
}

}  // namespace pipeline_detail

inline std::vector<HintFile> parse_hint_manifest(const nlohmann::json& j, const fs::path& base) {
  using namespace pipeline_detail;
  const nlohmann::json& list = j.is_object() && j.contains("hints") ? j.at("hints") : j;
  if (!list.is_array()) throw validation_error("bad_config", "hint manifest must be a list");
  std::vector<HintFile> out;
  for (const auto& e : list) {
    HintFile h;
    std::string axis = "z";
    get_if(e, "axis", axis);
    h.axis = parse_axis(axis);
    get_if(e, "index", h.index);
    get_path(e, "path", base, h.path);
    if (h.path.empty()) throw validation_error("bad_config", "hint manifest entry without a path");
    out.push_back(h);
  }
  return out;
}

inline nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("io", "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("bad_json", path.string() + ": " + e.what());
  }
}

inline void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("io", "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

inline std::vector<HintFile> read_hint_manifest(const fs::path& path) {
  return parse_hint_manifest(read_json_file(path), path.parent_path());
}

inline void write_hint_manifest(const fs::path& path, const std::vector<HintFile>& hints) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& h : hints)
    list.push_back({{"axis", std::string(1, axis_name(h.axis))},
                    {"index", h.index},
                    {"path", fs::relative(h.path, path.parent_path()).generic_string()}});
  write_json_file(path, {{"hints", list}});
}

// Reads the config document; relative paths resolve against base_dir.
inline PipelineConfig parse_pipeline_config(const nlohmann::json& j, const fs::path& base_dir) {
  using namespace pipeline_detail;
  if (!j.is_object()) throw validation_error("bad_config", "config must be a JSON object");
  PipelineConfig c;
  get_path(j, "volume", base_dir, c.volume);
  get_path(j, "mask", base_dir, c.mask);
  get_path(j, "reference", base_dir, c.reference);
  get_path(j, "out", base_dir, c.out);
  get_if(j, "seed", c.seed);

  if (j.contains("fusion")) {
    const auto& f = j.at("fusion");
    c.fuse = true;
    get_if(f, "enabled", c.fuse);
    get_path(f, "gradient", base_dir, c.gradient_source);
    get_path(f, "intensity", base_dir, c.intensity_source);
    get_if(f, "lambda", c.fusion.lambda);
    get_if(f, "pin_mean", c.fusion.pin_mean);
    get_if(f, "clamp", c.fusion.clamp_output);
  }
  if (j.contains("hints")) {
    const auto& h = j.at("hints");
    std::string axis(1, axis_name(c.selection.axis));
    get_if(h, "axis", axis);
    c.selection.axis = parse_axis(axis);
    get_if(h, "k", c.selection.count);
    get_if(h, "min_sep", c.selection.min_separation);
    get_if(h, "slices", c.slices);
    get_path(h, "style", base_dir, c.style);
    get_if(h, "samples", c.hintgen.samples);
    get_if(h, "window", c.hintgen.window);
    if (h.contains("images")) c.hint_files = parse_hint_manifest(h.at("images"), base_dir);
    fs::path manifest;
    get_path(h, "manifest", base_dir, manifest);
    if (!manifest.empty()) c.hint_files = read_hint_manifest(manifest);
  }
  if (j.contains("weights")) get_if(j.at("weights"), "epsilon", c.colorize.weights.sigma_floor);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    get_if(s, "tol", c.colorize.solver.rel_tolerance);
    get_if(s, "max_iter", c.colorize.solver.max_iterations);
    std::string pre = preconditioner_name(c.colorize.solver.preconditioner);
    get_if(s, "preconditioner", pre);
    c.colorize.solver.preconditioner = parse_preconditioner(pre);
    std::string op = "automatic";
    get_if(s, "operator", op);
    if (op == "automatic") c.colorize.operator_mode = OperatorMode::automatic;
    else if (op == "assembled") c.colorize.operator_mode = OperatorMode::assembled;
    else if (op == "matrix-free") c.colorize.operator_mode = OperatorMode::matrix_free;
    else throw validation_error("bad_config", "unknown operator mode '" + op + "'");
    get_if(s, "max_assembled_nonzeros", c.colorize.max_assembled_nonzeros);
    c.fusion.solver.rel_tolerance = c.colorize.solver.rel_tolerance;
    c.fusion.solver.max_iterations = c.colorize.solver.max_iterations;
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    std::string mode = "global";
    get_if(m, "mode", mode);
    if (mode == "global") c.metrics.mode = SsimMode::global;
    else if (mode == "windowed") c.metrics.mode = SsimMode::windowed;
    else throw validation_error("bad_config", "unknown ssim mode '" + mode + "'");
    get_if(m, "c1", c.metrics.c1);
    get_if(m, "c2", c.metrics.c2);
  }
  return c;
}

inline PipelineConfig load_pipeline_config(const fs::path& path) {
  return parse_pipeline_config(read_json_file(path), path.parent_path());
}

inline nlohmann::json to_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"relative_residual", r.relative_residual},
          {"converged", r.converged},
          {"breakdown", r.breakdown},
          {"preconditioner", preconditioner_name(r.preconditioner)},
          {"amg_levels", r.amg_levels}};
}

// ---------------------------------------------------------------- steps

inline std::optional<VolumeMask> load_optional_mask(const fs::path& p) {
  if (p.empty()) return std::nullopt;
  return read_mask(p, raw_path_for(p));
}

inline void check_unit_range(const ScalarVolume& v, const char* what) {
  for (float x : v.data)
    if (!(x >= 0.0f && x <= 1.0f))
      throw validation_error("out_of_range", std::string(what) + " samples must lie in [0,1]");
}

// Writes the middle slice along each axis as "<prefix>_<axis>.png".
inline std::vector<fs::path> write_previews(const ColorVolume& c, const fs::path& dir, const std::string& prefix) {
  std::vector<fs::path> out;
  const ColorVolume rgb = c.space == ColorSpace::RGB ? c : yuv_to_rgb(c);
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    fs::path p = dir / (prefix + "_" + axis_name(a) + ".png");
    write_slice_png(extract_slice(rgb, a, rgb.dims().extent(int(a)) / 2), p);
    out.push_back(p);
  }
  return out;
}

inline std::string hint_file_name(Axis axis, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "hint_%c_%03d.png", axis_name(axis), index);
  return buf;
}

struct GeneratedHints {
  HintSet hints;
  std::vector<HintFile> files;
};

// Classical hint generation on the given slices; PNGs go to dir when non-empty.
inline GeneratedHints generate_hints(const ScalarVolume& y, Axis axis, const std::vector<int>& slices,
                                     const SliceImage& style, const HintgenParams& params, const fs::path& dir) {
  GeneratedHints g;
  const StyleSamples samples = sample_style(style, params.samples, params.window, params.seed);
  for (int idx : slices) {
    const Plane gray = extract_plane(y, axis, idx);
    ColoredSlice cs = transfer_colors(gray, samples, params.window);
    if (!dir.empty()) {
      HintFile f{dir / hint_file_name(axis, idx), axis, idx};
      write_slice_png(to_hint_image(cs), f.path);
      g.files.push_back(f);
    }
    g.hints.hints.push_back(Hint{axis, idx, std::move(cs.u), std::move(cs.v),
                                 std::vector<std::uint8_t>(gray.data.size(), 1)});
  }
  return g;
}

inline HintSet load_hints(const std::vector<HintFile>& files, const Dims& dims) {
  std::vector<HintImage> images;
  for (const auto& f : files) images.push_back({f.axis, f.index, read_slice_png(f.path)});
  return hints_from_slices(images, dims);
}

struct PipelineResult {
  ScalarVolume gray;
  ColorizeResult color;
  std::vector<int> slices;
  std::optional<SolveReport> fusion_report;
  std::optional<MetricsReport> metrics;
  nlohmann::json report;

  bool converged() const {
    return color.report_u.converged && color.report_v.converged && (!fusion_report || fusion_report->converged);
  }
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };
  using pipeline_detail::require_file;
  require_file(cfg.volume, "volume");
  require_file(cfg.mask, "mask");
  require_file(cfg.style, "style image");
  require_file(cfg.reference, "reference volume");
  for (const auto& h : cfg.hint_files) require_file(h.path, "hint image");
  if (cfg.hint_files.empty() && cfg.style.empty())
    throw validation_error("missing_hints", "pipeline needs either a style image or hint images");

  PipelineResult res;
  nlohmann::json timing;
  fs::create_directories(cfg.out);
  const auto mask = load_optional_mask(cfg.mask);
  const VolumeMask* mp = mask ? &*mask : nullptr;

  auto t0 = clock::now();
  if (cfg.fuse) {
    require_file(cfg.gradient_source, "fusion gradient source");
    require_file(cfg.intensity_source, "fusion intensity source");
    if (cfg.gradient_source.empty() || cfg.intensity_source.empty())
      throw validation_error("bad_config", "fusion needs gradient and intensity volumes");
    auto m = read_scalar_volume(cfg.gradient_source, raw_path_for(cfg.gradient_source));
    auto c = read_scalar_volume(cfg.intensity_source, raw_path_for(cfg.intensity_source));
    auto f = fuse(m, c, mp, cfg.fusion);
    res.gray = std::move(f.volume);
    res.fusion_report = f.report;
  } else {
    if (cfg.volume.empty()) throw validation_error("bad_config", "config names no input volume");
    res.gray = read_scalar_volume(cfg.volume, raw_path_for(cfg.volume));
  }
  if (mp) {
    require_same_dims(res.gray.dims, mp->dims, "volume and mask");
    res.gray = apply_mask(res.gray, *mp, 0.0f);
  }
  check_unit_range(res.gray, "grayscale volume");
  write_volume(res.gray, cfg.out / "gray.json", cfg.out / "gray.raw", DType::f32le);
  timing["fuse"] = seconds(t0);

  t0 = clock::now();
  HintSet hints;
  std::vector<HintFile> files;
  if (!cfg.hint_files.empty()) {
    hints = load_hints(cfg.hint_files, res.gray.dims);
    files = cfg.hint_files;
    for (const auto& h : files) res.slices.push_back(h.index);
  } else {
    const int extent = res.gray.dims.extent(int(cfg.selection.axis));
    if (!cfg.slices.empty()) {
      res.slices = cfg.slices;
    } else {
      const int d = cfg.selection.min_separation > 0 ? cfg.selection.min_separation
                                                     : default_min_separation(extent, cfg.selection.count);
      res.slices = select_hint_slices(res.gray, mp, cfg.selection.axis, cfg.selection.count, d);
    }
    HintgenParams hp = cfg.hintgen;
    hp.seed = cfg.seed;
    auto g = generate_hints(res.gray, cfg.selection.axis, res.slices, read_slice_png(cfg.style), hp, cfg.out);
    hints = std::move(g.hints);
    files = std::move(g.files);
    write_hint_manifest(cfg.out / "hints.json", files);
  }
  timing["hints"] = seconds(t0);

  t0 = clock::now();
  res.color = colorize(res.gray, hints, mp, cfg.colorize);
  timing["colorize"] = seconds(t0);
  const ColorVolume rgb = yuv_to_rgb(res.color.yuv);
  write_volume(rgb, cfg.out / "color.json", cfg.out / "color.raw", DType::f32le);
  write_previews(rgb, cfg.out, "preview");

  if (!cfg.reference.empty()) {
    t0 = clock::now();
    ColorVolume ref = read_color_volume(cfg.reference, raw_path_for(cfg.reference));
    res.metrics = evaluate(rgb, ref, cfg.metrics);
    write_json_file(cfg.out / "metrics.json", to_json(*res.metrics));
    timing["metrics"] = seconds(t0);
  }

  nlohmann::json rep{{"dims", {res.gray.dims.nx, res.gray.dims.ny, res.gray.dims.nz}},
                     {"slices", res.slices},
                     {"axis", std::string(1, axis_name(hints.hints.empty() ? Axis::Z : hints.hints[0].axis))},
                     {"free_unknowns", res.color.free_unknowns},
                     {"assembled", res.color.assembled},
                     {"solve_u", to_json(res.color.report_u)},
                     {"solve_v", to_json(res.color.report_v)},
                     {"seconds", timing}};
  if (res.fusion_report) rep["fusion"] = to_json(*res.fusion_report);
  if (res.metrics) rep["metrics"] = to_json(*res.metrics);
  res.report = rep;
  write_json_file(cfg.out / "report.json", rep);
  return res;
}

// Demo fixture set: grayscale phantom, mask, MRI proxy, RGB reference and a
// style image taken from the reference's middle axial slice.
inline void write_phantom_fixture(const PhantomSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  Phantom ph = generate_phantom(spec);
  write_volume(ph.y, dir / "gray.json", dir / "gray.raw", DType::f32le);
  write_mask(ph.mask, dir / "mask.json", dir / "mask.raw");
  write_volume(mri_proxy(ph), dir / "mri.json", dir / "mri.raw", DType::f32le);
  const ColorVolume rgb = yuv_to_rgb(ph.reference);
  write_volume(rgb, dir / "reference.json", dir / "reference.raw", DType::f32le);
  write_slice_png(extract_slice(rgb, Axis::Z, spec.dims.nz / 2), dir / "style.png");
}

}  // namespace volcolor
