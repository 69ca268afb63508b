// volcolor command-line front end.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
// Failures print one line to stderr: "error <code>: <message>".

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "volcolor/pipeline.hpp"

namespace fs = std::filesystem;
using namespace volcolor;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string axis;
  std::optional<int> k, min_sep;
  std::optional<double> lambda, tol;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--axis", o.axis, "hint axis")->check(CLI::IsMember({"x", "y", "z"}));
  cmd->add_option("--k", o.k, "number of hint slices");
  cmd->add_option("--min-sep", o.min_sep, "minimum slice separation (0 = automatic)");
  cmd->add_option("--lambda", o.lambda, "fusion intensity weight");
  cmd->add_option("--tol", o.tol, "relative residual tolerance");
}

PipelineConfig make_config(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_pipeline_config(o.config);
  if (!o.out.empty()) c.out = o.out;
  if (o.seed) c.seed = *o.seed;
  if (!o.axis.empty()) c.selection.axis = parse_axis(o.axis);
  if (o.k) c.selection.count = *o.k;
  if (o.min_sep) c.selection.min_separation = *o.min_sep;
  if (o.lambda) c.fusion.lambda = *o.lambda;
  if (o.tol) c.colorize.solver.rel_tolerance = c.fusion.solver.rel_tolerance = *o.tol;
  return c;
}

void set_path(fs::path& dst, const std::string& s) {
  if (!s.empty()) dst = s;
}

int resolve_min_sep(const PipelineConfig& c, const Dims& d) {
  return c.selection.min_separation > 0 ? c.selection.min_separation
                                        : default_min_separation(d.extent(int(c.selection.axis)), c.selection.count);
}

int report_unconverged(const char* what) {
  std::cerr << "error not_converged: " << what << " did not reach the requested tolerance\n";
  return kExitNumerical;
}

ScalarVolume load_gray(const PipelineConfig& c) {
  if (c.volume.empty()) throw validation_error("bad_config", "no input volume given");
  auto v = read_scalar_volume(c.volume, raw_path_for(c.volume));
  if (!c.mask.empty()) {
    auto m = read_mask(c.mask, raw_path_for(c.mask));
    require_same_dims(v.dims, m.dims, "volume and mask");
    v = apply_mask(v, m, 0.0f);
  }
  check_unit_range(v, "grayscale volume");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hint-based colorization of grayscale volumes"};
  app.require_subcommand(1);
  Overrides o;

  // fuse
  auto* fuse_cmd = app.add_subcommand("fuse", "fuse the gradients of one volume with the intensities of another");
  add_common(fuse_cmd, o);
  std::string gradient, intensity, fuse_mask;
  fuse_cmd->add_option("--gradient", gradient, "gradient source volume header");
  fuse_cmd->add_option("--intensity", intensity, "intensity source volume header");
  fuse_cmd->add_option("--mask", fuse_mask, "foreground mask header");

  // select-hints
  auto* sel_cmd = app.add_subcommand("select-hints", "choose high-contrast hint slices");
  add_common(sel_cmd, o);
  std::string sel_volume, sel_mask;
  bool export_slices = false;
  sel_cmd->add_option("--volume", sel_volume, "grayscale volume header");
  sel_cmd->add_option("--mask", sel_mask, "foreground mask header");
  sel_cmd->add_flag("--export", export_slices, "write the chosen slices as PNG into --out");

  // hintgen
  auto* gen_cmd = app.add_subcommand("hintgen", "generate colored hint slices from a style image");
  add_common(gen_cmd, o);
  std::string gen_volume, gen_mask, gen_style;
  std::vector<int> gen_slices;
  gen_cmd->add_option("--volume", gen_volume, "grayscale volume header");
  gen_cmd->add_option("--mask", gen_mask, "foreground mask header");
  gen_cmd->add_option("--style", gen_style, "style image (PNG)");
  gen_cmd->add_option("--slices", gen_slices, "explicit slice indices");

  // colorize
  auto* col_cmd = app.add_subcommand("colorize", "propagate hint colors through a volume");
  add_common(col_cmd, o);
  std::string col_volume, col_mask, col_hints;
  col_cmd->add_option("--volume", col_volume, "grayscale volume header");
  col_cmd->add_option("--mask", col_mask, "foreground mask header");
  col_cmd->add_option("--hints", col_hints, "hint manifest (JSON)");

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "compare two RGB volumes");
  add_common(met_cmd, o);
  std::string met_a, met_b, met_mode = "global";
  met_cmd->add_option("a", met_a, "first volume header")->required();
  met_cmd->add_option("b", met_b, "second volume header")->required();
  met_cmd->add_option("--mode", met_mode, "ssim mode")->check(CLI::IsMember({"global", "windowed"}));

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "fuse, select, generate hints, colorize and evaluate");
  add_common(pipe_cmd, o);

  // phantom (hidden)
  auto* ph_cmd = app.add_subcommand("phantom", "");
  ph_cmd->group("");
  std::string ph_kind = "two-blob", ph_out = "phantom";
  int ph_size = 32;
  double ph_noise = 0.0;
  std::uint64_t ph_seed = 0;
  ph_cmd->add_option("--kind", ph_kind);
  ph_cmd->add_option("--size", ph_size);
  ph_cmd->add_option("--noise", ph_noise);
  ph_cmd->add_option("--seed", ph_seed);
  ph_cmd->add_option("--out", ph_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error bad_arguments: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*ph_cmd) {
      PhantomSpec spec{parse_phantom_kind(ph_kind), {ph_size, ph_size, ph_size}, {}, ph_noise, ph_seed};
      write_phantom_fixture(spec, ph_out);
      return 0;
    }

    PipelineConfig cfg = make_config(o);

    if (*fuse_cmd) {
      set_path(cfg.gradient_source, gradient);
      set_path(cfg.intensity_source, intensity);
      set_path(cfg.mask, fuse_mask);
      if (cfg.gradient_source.empty() || cfg.intensity_source.empty())
        throw validation_error("bad_config", "fuse needs --gradient and --intensity");
      auto m = read_scalar_volume(cfg.gradient_source, raw_path_for(cfg.gradient_source));
      auto c = read_scalar_volume(cfg.intensity_source, raw_path_for(cfg.intensity_source));
      auto mask = load_optional_mask(cfg.mask);
      auto r = fuse(m, c, mask ? &*mask : nullptr, cfg.fusion);
      fs::create_directories(cfg.out);
      write_volume(r.volume, cfg.out / "fused.json", cfg.out / "fused.raw", DType::f32le);
      write_json_file(cfg.out / "fuse_report.json", to_json(r.report));
      return r.report.converged ? 0 : report_unconverged("fusion solve");
    }

    if (*sel_cmd) {
      set_path(cfg.volume, sel_volume);
      set_path(cfg.mask, sel_mask);
      auto y = load_gray(cfg);
      auto mask = load_optional_mask(cfg.mask);
      auto idx = select_hint_slices(y, mask ? &*mask : nullptr, cfg.selection.axis, cfg.selection.count,
                                    resolve_min_sep(cfg, y.dims));
      if (export_slices) {
        fs::create_directories(cfg.out);
        for (int i : idx) {
          char name[32];
          std::snprintf(name, sizeof name, "slice_%c_%03d.png", axis_name(cfg.selection.axis), i);
          write_slice_png(extract_slice(y, cfg.selection.axis, i), cfg.out / name);
        }
      }
      std::cout << nlohmann::json(idx).dump() << "\n";
      return 0;
    }

    if (*gen_cmd) {
      set_path(cfg.volume, gen_volume);
      set_path(cfg.mask, gen_mask);
      set_path(cfg.style, gen_style);
      if (!gen_slices.empty()) cfg.slices = gen_slices;
      if (cfg.style.empty()) throw validation_error("missing_style", "hintgen needs --style");
      auto y = load_gray(cfg);
      std::vector<int> idx = cfg.slices;
      if (idx.empty()) {
        auto mask = load_optional_mask(cfg.mask);
        idx = select_hint_slices(y, mask ? &*mask : nullptr, cfg.selection.axis, cfg.selection.count,
                                 resolve_min_sep(cfg, y.dims));
      }
      HintgenParams hp = cfg.hintgen;
      hp.seed = cfg.seed;
      fs::create_directories(cfg.out);
      auto g = generate_hints(y, cfg.selection.axis, idx, read_slice_png(cfg.style), hp, cfg.out);
      write_hint_manifest(cfg.out / "hints.json", g.files);
      std::cout << nlohmann::json(idx).dump() << "\n";
      return 0;
    }

    if (*col_cmd) {
      set_path(cfg.volume, col_volume);
      set_path(cfg.mask, col_mask);
      if (!col_hints.empty()) cfg.hint_files = read_hint_manifest(col_hints);
      if (cfg.hint_files.empty()) throw validation_error("missing_hints", "colorize needs --hints");
      auto y = load_gray(cfg);
      auto mask = load_optional_mask(cfg.mask);
      auto hints = load_hints(cfg.hint_files, y.dims);
      auto r = colorize(y, hints, mask ? &*mask : nullptr, cfg.colorize);
      fs::create_directories(cfg.out);
      const ColorVolume rgb = yuv_to_rgb(r.yuv);
      write_volume(rgb, cfg.out / "color.json", cfg.out / "color.raw", DType::f32le);
      write_previews(rgb, cfg.out, "preview");
      write_json_file(cfg.out / "colorize_report.json",
                      {{"free_unknowns", r.free_unknowns},
                       {"assembled", r.assembled},
                       {"solve_u", to_json(r.report_u)},
                       {"solve_v", to_json(r.report_v)}});
      return r.report_u.converged && r.report_v.converged ? 0 : report_unconverged("chroma solve");
    }

    if (*met_cmd) {
      cfg.metrics.mode = met_mode == "windowed" ? SsimMode::windowed : SsimMode::global;
      auto a = read_color_volume(met_a, raw_path_for(met_a));
      auto b = read_color_volume(met_b, raw_path_for(met_b));
      auto j = to_json(evaluate(a, b, cfg.metrics));
      if (!o.out.empty()) {
        fs::create_directories(cfg.out);
        write_json_file(cfg.out / "metrics.json", j);
      }
      std::cout << j.dump() << "\n";
      return 0;
    }

    if (*pipe_cmd) {
      if (o.config.empty()) throw validation_error("bad_config", "pipeline needs --config");
      auto r = run_pipeline(cfg);
      std::cout << r.report.dump() << "\n";
      return r.converged() ? 0 : report_unconverged("pipeline solve");
    }
  } catch (const Error& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::numerical ? kExitNumerical : kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error io: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::bad_alloc&) {
    std::cerr << "error out_of_memory: allocation failed\n";
    return kExitNumerical;
  }
  return 0;
}
