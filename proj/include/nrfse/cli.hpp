#pragma once

#include <algorithm>
#include <cmath>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fftw3.h>
#include <openssl/crypto.h>
#include <opencv2/core/version.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "nrfse/error.hpp"
#include "nrfse/evaluation.hpp"
#include "nrfse/io.hpp"
#include "nrfse/motion.hpp"
#include "nrfse/pipeline.hpp"
#include "nrfse/sampling.hpp"
#include "nrfse/synthetic.hpp"
#include "nrfse/version.hpp"

namespace nrfse::cli {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config file: one `key = value` per line, '#' starts a comment. Keys name a
// long option with '_' or '-' separators.

struct ConfigEntry {
  std::string key;  // normalised to dashes
  std::string value;
  int line = 0;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& name) {
  std::vector<ConfigEntry> out;
  std::set<std::string> seen;
  std::string raw;
  for (int line = 1; std::getline(in, raw); ++line) {
    const std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = name + ":" + std::to_string(line);
    require(eq != std::string::npos, ErrorCode::Config,
            where + ": expected 'key = value'");
    std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    require(!key.empty() && !value.empty(), ErrorCode::Config,
            where + ": empty key or value");
    for (char& c : key) {
      require(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-',
              ErrorCode::Config, where + ": invalid key '" + key + "'");
      if (c == '_') c = '-';
    }
    require(seen.insert(key).second, ErrorCode::Config,
            where + ": duplicate key '" + key + "'");
    out.push_back({key, value, line});
  }
  return out;
}

inline std::vector<ConfigEntry> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config '" + path + "'");
  return parse_config(in, path);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && item[0] != '-', ErrorCode::Config,
            "invalid seed '" + item + "'");
    out.push_back(v);
  }
  require(!out.empty(), ErrorCode::Config, "seed list is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Video files: paths containing '%' are printf patterns of graymap frames,
// anything else is raw planar 8-bit video.

struct VideoOptions {
  int width = 0;
  int height = 0;
  int frames = 0;  // 0 = all available
  std::string pixel_format = "gray";
  int first_index = 0;

  bool is_pattern(const std::string& path) const {
    return path.find('%') != std::string::npos;
  }

  VideoVolume load(const std::string& path) const {
    if (is_pattern(path)) return io::read_pgm_sequence(path, first_index, frames);
    require(width > 0 && height > 0, ErrorCode::Config,
            "raw video '" + path + "' needs --width and --height");
    return io::read_raw_video(path, width, height, frames,
                              io::parse_pixel_format(pixel_format));
  }

  void save(const std::string& path, const VideoVolume& video) const {
    if (is_pattern(path)) return io::write_pgm_sequence(path, first_index, video);
    io::write_raw_video(path, video, io::parse_pixel_format(pixel_format));
  }

  // Files making up `path`, for digests.
  std::vector<std::string> files(const std::string& path, int count) const {
    if (!is_pattern(path)) return {path};
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) out.push_back(io::frame_path(path, first_index + i));
    return out;
  }
};

inline void add_video_options(CLI::App* app, VideoOptions& v) {
  app->add_option("--width", v.width, "Frame width of raw input");
  app->add_option("--height", v.height, "Frame height of raw input");
  app->add_option("--frames", v.frames, "Frames to read (0 = all)")->capture_default_str();
  app->add_option("--pixel-format", v.pixel_format, "Raw layout: gray or yuv420")
      ->capture_default_str();
  app->add_option("--first-index", v.first_index, "First index of a frame pattern")
      ->capture_default_str();
}

inline void add_fse_options(CLI::App* app, ReconstructionConfig& c) {
  app->add_option("--rho-hat", c.weight.rho_hat, "Weight decay base")->capture_default_str();
  app->add_option("--delta", c.weight.delta, "Weight factor of reconstructed area")
      ->capture_default_str();
  app->add_option("--gamma", c.fse.gamma, "Orthogonality deficiency compensation")
      ->capture_default_str();
  app->add_option("--border", c.fse.border, "Spatial window border")->capture_default_str();
  app->add_option("--block-width", c.fse.block.width)->capture_default_str();
  app->add_option("--block-height", c.fse.block.height)->capture_default_str();
  app->add_option("--block-frames", c.fse.block.frames)->capture_default_str();
  app->add_option("--temporal-window", c.fse.temporal_window, "Frames per window")
      ->capture_default_str();
  app->add_option("--fft-width", c.fse.fft.width)->capture_default_str();
  app->add_option("--fft-height", c.fse.fft.height)->capture_default_str();
  app->add_option("--fft-frames", c.fse.fft.frames)->capture_default_str();
  app->add_option("--max-iterations", c.fse.max_iterations)->capture_default_str();
  app->add_option("--min-gain", c.fse.min_gain)->capture_default_str();
  app->add_option("--threads", c.threads)->capture_default_str();
}

inline void add_flow_options(CLI::App* app, FlowParams& f) {
  app->add_option("--flow-levels", f.levels)->capture_default_str();
  app->add_option("--flow-window-radius", f.window_radius)->capture_default_str();
  app->add_option("--flow-iterations", f.iterations_per_level)->capture_default_str();
  app->add_option("--flow-poly-radius", f.poly_radius)->capture_default_str();
  app->add_option("--flow-sigma", f.smoothing_sigma)->capture_default_str();
}

// ---------------------------------------------------------------------------
// Run manifest

inline Json library_versions() {
  return Json{{"nrfse", std::string(version)},
              {"opencv", std::string(CV_VERSION)},
              {"fftw", std::string(fftw_version)},
              {"openssl", OpenSSL_version(OPENSSL_VERSION)}};
}

inline Json fse_json(const FseParams& p) {
  return Json{{"block", {p.block.width, p.block.height, p.block.frames}},
              {"border", p.border},
              {"temporal_window", p.temporal_window},
              {"fft", {p.fft.width, p.fft.height, p.fft.frames}},
              {"gamma", p.gamma},
              {"max_iterations", p.max_iterations},
              {"min_gain", p.min_gain}};
}

inline Json config_json(const ReconstructionConfig& c) {
  return Json{{"fse", fse_json(c.effective_fse())},
              {"weight", {{"rho_hat", c.weight.rho_hat}, {"delta", c.weight.delta}}},
              {"flow", {{"levels", c.flow.levels},
                        {"window_radius", c.flow.window_radius},
                        {"iterations_per_level", c.flow.iterations_per_level},
                        {"poly_radius", c.flow.poly_radius},
                        {"smoothing_sigma", c.flow.smoothing_sigma}}},
              {"threads", c.threads}};
}

inline Json digests(const std::vector<std::string>& files) {
  Json out = Json::array();
  for (const auto& f : files) out.push_back({{"path", f}, {"sha256", io::sha256_file(f)}});
  return out;
}

inline void write_manifest(const std::string& path, const Json& body) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::Io, "cannot create manifest '" + path + "'");
  os << body.dump(2) << '\n';
  if (!os) fail(ErrorCode::Io, "failed writing manifest '" + path + "'");
}

inline Json manifest_head(const std::string& command) {
  return Json{{"command", command}, {"versions", library_versions()}};
}

inline std::string default_manifest(const std::string& output) {
  std::string base = output;
  std::replace(base.begin(), base.end(), '%', '_');
  return base + ".manifest.json";
}

// ---------------------------------------------------------------------------
// Subcommands

struct MaskArgs {
  int width = 0, height = 0, frames = 1;
  std::uint64_t seed = 1;
  std::string output, manifest;
};

inline void run_mask(const MaskArgs& a, std::ostream& out) {
  const SamplingMask mask =
      generate_quadrant_mask(a.width, a.height, a.frames, MaskSeed{a.seed});
  {
    std::ofstream os(a.output, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot create '" + a.output + "'");
    write_mask(os, mask);
  }
  Json m = manifest_head("mask");
  m["size"] = {a.width, a.height, a.frames};
  m["seeds"] = {a.seed};
  m["density"] = mask.density();
  m["outputs"] = digests({a.output});
  write_manifest(a.manifest.empty() ? default_manifest(a.output) : a.manifest, m);
  out << "mask " << a.output << " density=" << mask.density() << '\n';
}

inline SamplingMask load_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open mask '" + path + "'");
  return read_mask(in);
}

inline void require_match(const SamplingMask& mask, const VideoVolume& video) {
  require(mask.matches(video), ErrorCode::DimensionMismatch,
          "mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
              "x" + std::to_string(mask.frames()) + " but video is " +
              std::to_string(video.width()) + "x" + std::to_string(video.height()) + "x" +
              std::to_string(video.frames()));
}

struct SampleArgs {
  VideoOptions video;
  std::string input, mask, output, manifest;
};

inline void run_sample(const SampleArgs& a, std::ostream& out) {
  const VideoVolume original = a.video.load(a.input);
  const SamplingMask mask = load_mask(a.mask);
  require_match(mask, original);
  const VideoVolume sampled = apply_mask(original, mask);
  a.video.save(a.output, sampled);
  Json m = manifest_head("sample");
  m["inputs"] = digests(a.video.files(a.input, original.frames()));
  m["inputs"].push_back({{"path", a.mask}, {"sha256", io::sha256_file(a.mask)}});
  m["outputs"] = digests(a.video.files(a.output, sampled.frames()));
  write_manifest(a.manifest.empty() ? default_manifest(a.output) : a.manifest, m);
  out << "sampled " << sampled.frames() << " frames\n";
}

struct ReconstructArgs {
  VideoOptions video;
  ReconstructionConfig config;
  std::string mode = "fse3d-mcw";
  std::string input, mask, output, manifest;
};

inline void run_reconstruct(ReconstructArgs a, std::ostream& out) {
  a.config.mode = parse_mode(a.mode);
  a.config.validate();
  const VideoVolume sampled = a.video.load(a.input);
  const SamplingMask mask = load_mask(a.mask);
  require_match(mask, sampled);

  ReconstructionStats stats;
  const auto start = std::chrono::steady_clock::now();
  const VideoVolume result = reconstruct(sampled, mask, a.config, nullptr, &stats);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  a.video.save(a.output, result);

  Json m = manifest_head("reconstruct");
  m["mode"] = std::string(mode_name(a.config.mode));
  m["parameters"] = config_json(a.config);
  m["seeds"] = Json::array();
  m["inputs"] = digests(a.video.files(a.input, sampled.frames()));
  m["inputs"].push_back({{"path", a.mask}, {"sha256", io::sha256_file(a.mask)}});
  m["outputs"] = digests(a.video.files(a.output, result.frames()));
  m["stats"] = {{"blocks", stats.blocks},
                {"batches", stats.batches},
                {"empty_support_blocks", stats.empty_support_blocks},
                {"iterations", stats.iterations},
                {"runtime_s", seconds}};
  write_manifest(a.manifest.empty() ? default_manifest(a.output) : a.manifest, m);
  out << "reconstructed " << result.frames() << " frames, " << stats.blocks
      << " blocks, " << seconds << " s\n";
}

struct FlowArgs {
  VideoOptions video;
  FlowParams flow;
  int frame = 0;
  std::string input, mask, output, manifest;
};

inline void run_flow(const FlowArgs& a, std::ostream& out) {
  VideoVolume video = a.video.load(a.input);
  if (!a.mask.empty()) {
    const SamplingMask mask = load_mask(a.mask);
    require_match(mask, video);
    video = bilinear_init(video, mask);
  }
  require(a.frame >= 0 && a.frame + 1 < video.frames(), ErrorCode::InvalidArgument,
          "flow needs frames " + std::to_string(a.frame) + " and " +
              std::to_string(a.frame + 1));
  const VectorField field = estimate_flow(FrameView::of(video, a.frame),
                                          FrameView::of(video, a.frame + 1), a.flow);
  {
    std::ofstream os(a.output, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot create '" + a.output + "'");
    write_flow(os, field);
  }
  const MotionVector mean = slice_average(field, {0, 0, field.width, field.height});
  Json m = manifest_head("flow");
  m["frame"] = a.frame;
  m["parameters"] = {{"levels", a.flow.levels},
                     {"window_radius", a.flow.window_radius},
                     {"iterations_per_level", a.flow.iterations_per_level},
                     {"poly_radius", a.flow.poly_radius},
                     {"smoothing_sigma", a.flow.smoothing_sigma}};
  m["inputs"] = digests(a.video.files(a.input, video.frames()));
  m["outputs"] = digests({a.output});
  m["mean_motion"] = {mean.x, mean.y};
  write_manifest(a.manifest.empty() ? default_manifest(a.output) : a.manifest, m);
  out << "flow " << a.frame << "->" << a.frame + 1 << " mean=(" << mean.x << ", "
      << mean.y << ")\n";
}

struct BenchArgs {
  VideoOptions video;
  ReconstructionConfig config;
  std::vector<std::string> sequences;  // name=path or path
  bool synthetic = false;
  int synthetic_shift = 2;
  std::string modes = "bilinear,fse2d,fse3d,fse3d-mcw";
  std::string seeds = "1,2,3";
  std::string csv, table, manifest;
};

inline void run_bench(BenchArgs a, std::ostream& out, std::ostream& err) {
  std::vector<Mode> modes;
  for (const auto& m : split_list(a.modes)) modes.push_back(parse_mode(m));
  require(!modes.empty(), ErrorCode::Config, "mode list is empty");
  const auto seeds = parse_seeds(a.seeds);
  for (Mode m : modes) {
    ReconstructionConfig c = a.config;
    c.mode = m;
    c.validate();
  }

  std::vector<BenchInput> inputs;
  Json input_info = Json::array();
  for (const auto& spec : a.sequences) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const VideoOptions video = a.video;
    inputs.push_back({name, [video, path] { return video.load(path); }});
    input_info.push_back({{"name", name}, {"path", path}});
  }
  if (a.synthetic) {
    const int w = a.video.width > 0 ? a.video.width : 128;
    const int h = a.video.height > 0 ? a.video.height : 128;
    const int f = a.video.frames > 0 ? a.video.frames : 15;
    const int shift = a.synthetic_shift;
    inputs.push_back({"synthetic", [=] {
                        return synthetic::translating_texture(w, h, f, shift, 0, 2024);
                      }});
    input_info.push_back({{"name", "synthetic"},
                          {"size", {w, h, f}},
                          {"shift", {shift, 0}},
                          {"texture_seed", 2024}});
  }
  require(!inputs.empty(), ErrorCode::Config, "bench needs --sequence or --synthetic");

  BenchProgress progress{[&](const BenchCell& c) {
    err << c.sequence << ' ' << mode_name(c.mode) << " seed=" << c.seed
        << " psnr=" << c.psnr_db << " dB (" << c.runtime_s << " s)\n";
  }};
  const BenchReport report = run_benchmark(inputs, modes, seeds, a.config, progress);

  if (!a.csv.empty()) {
    std::ofstream os(a.csv);
    if (!os) fail(ErrorCode::Io, "cannot create '" + a.csv + "'");
    write_csv(os, report);
  }
  if (!a.table.empty()) {
    std::ofstream os(a.table);
    if (!os) fail(ErrorCode::Io, "cannot create '" + a.table + "'");
    write_table(os, report);
  }
  write_table(out, report);

  Json m = manifest_head("bench");
  m["modes"] = Json::array();
  for (Mode mode : modes) m["modes"].push_back(std::string(mode_name(mode)));
  m["parameters"] = config_json(a.config);
  m["seeds"] = seeds;
  m["inputs"] = input_info;
  m["missing"] = report.missing;
  Json averages = Json::object();
  for (const auto& seq : report.sequences)
    for (Mode mode : modes)
      averages[seq][std::string(mode_name(mode))] = report.average(seq, mode);
  m["averages"] = averages;
  const std::string manifest =
      !a.manifest.empty() ? a.manifest
      : !a.csv.empty()    ? default_manifest(a.csv)
                          : std::string("bench.manifest.json");
  write_manifest(manifest, m);
}

struct PsnrArgs {
  VideoOptions video;
  std::string reference, test, mask, manifest;
};

inline void run_psnr(const PsnrArgs& a, std::ostream& out) {
  const VideoVolume ref = a.video.load(a.reference);
  const VideoVolume test = a.video.load(a.test);
  require(ref.same_shape(test), ErrorCode::DimensionMismatch,
          "reference and test differ in shape");
  Json m = manifest_head("psnr");
  auto inputs = a.video.files(a.reference, ref.frames());
  for (auto& f : a.video.files(a.test, test.frames())) inputs.push_back(std::move(f));
  m["psnr_db"] = psnr(ref, test);
  out << "psnr_db=" << std::setprecision(10) << psnr(ref, test) << '\n';
  if (!a.mask.empty()) {
    const SamplingMask mask = load_mask(a.mask);
    require_match(mask, ref);
    inputs.push_back(a.mask);
    m["psnr_loss_db"] = psnr_loss_only(ref, test, mask);
    out << "psnr_loss_db=" << psnr_loss_only(ref, test, mask) << '\n';
  }
  m["inputs"] = digests(inputs);
  // Infinite PSNR has no JSON number; null marks identical inputs.
  for (const char* k : {"psnr_db", "psnr_loss_db"})
    if (m.contains(k) && !std::isfinite(m[k].get<double>())) m[k] = nullptr;
  write_manifest(a.manifest.empty() ? default_manifest(a.test + ".psnr") : a.manifest, m);
}

// ---------------------------------------------------------------------------

namespace detail {

inline bool given_on_command_line(const std::vector<std::string>& args,
                                  const std::string& key) {
  const std::string opt = "--" + key;
  for (const auto& a : args)
    if (a == opt || a.rfind(opt + "=", 0) == 0) return true;
  return false;
}

inline std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      require(i + 1 < args.size(), ErrorCode::Usage, "--config needs a path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace detail

/// Entry point of the command line tool. Returns the process exit status:
/// 0 on success, 1 on a runtime error, 2 on a usage error. Failures print a
/// single `error: <CODE>: <message>` line to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Reconstruction of non-regularly sampled video", "nrfse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));

  MaskArgs mask_args;
  SampleArgs sample_args;
  ReconstructArgs rec_args;
  FlowArgs flow_args;
  BenchArgs bench_args;
  PsnrArgs psnr_args;
  std::string config_path;

  auto* mask = app.add_subcommand("mask", "Generate a quarter-density sampling mask");
  mask->add_option("--width", mask_args.width, "Frame width")->required();
  mask->add_option("--height", mask_args.height, "Frame height")->required();
  mask->add_option("--frames", mask_args.frames, "Frame count")->capture_default_str();
  mask->add_option("--seed", mask_args.seed, "Random seed")->capture_default_str();
  mask->add_option("-o,--output", mask_args.output, "Mask file")->required();
  mask->add_option("--manifest", mask_args.manifest, "Manifest path");

  auto* sample = app.add_subcommand("sample", "Apply a mask to a video");
  add_video_options(sample, sample_args.video);
  sample->add_option("-i,--input", sample_args.input, "Input video")->required();
  sample->add_option("--mask", sample_args.mask, "Mask file")->required();
  sample->add_option("-o,--output", sample_args.output, "Output video")->required();
  sample->add_option("--manifest", sample_args.manifest, "Manifest path");

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a sampled video");
  add_video_options(rec, rec_args.video);
  add_fse_options(rec, rec_args.config);
  add_flow_options(rec, rec_args.config.flow);
  rec->add_option("--mode", rec_args.mode, "bilinear, fse2d, fse3d or fse3d-mcw")
      ->capture_default_str();
  rec->add_option("-i,--input", rec_args.input, "Sampled video")->required();
  rec->add_option("--mask", rec_args.mask, "Mask file")->required();
  rec->add_option("-o,--output", rec_args.output, "Output video")->required();
  rec->add_option("--manifest", rec_args.manifest, "Manifest path");

  auto* flow = app.add_subcommand("flow", "Dense flow between two adjacent frames");
  add_video_options(flow, flow_args.video);
  add_flow_options(flow, flow_args.flow);
  flow->add_option("-i,--input", flow_args.input, "Input video")->required();
  flow->add_option("--mask", flow_args.mask, "Interpolate with this mask first");
  flow->add_option("--frame", flow_args.frame, "First frame of the pair")
      ->capture_default_str();
  flow->add_option("-o,--output", flow_args.output, "Flow file")->required();
  flow->add_option("--manifest", flow_args.manifest, "Manifest path");

  auto* bench = app.add_subcommand("bench", "PSNR benchmark over sequences and modes");
  bench_args.video.frames = 50;
  add_video_options(bench, bench_args.video);
  add_fse_options(bench, bench_args.config);
  add_flow_options(bench, bench_args.config.flow);
  bench->add_option("--sequence", bench_args.sequences, "name=path of a sequence");
  bench->add_flag("--synthetic", bench_args.synthetic, "Add a translating texture");
  bench->add_option("--synthetic-shift", bench_args.synthetic_shift,
                    "Pixels per frame of the synthetic motion")
      ->capture_default_str();
  bench->add_option("--modes", bench_args.modes, "Comma separated modes")
      ->capture_default_str();
  bench->add_option("--seeds", bench_args.seeds, "Comma separated mask seeds")
      ->capture_default_str();
  bench->add_option("--csv", bench_args.csv, "CSV output");
  bench->add_option("--table", bench_args.table, "Table output");
  bench->add_option("--manifest", bench_args.manifest, "Manifest path");

  auto* ps = app.add_subcommand("psnr", "PSNR between two videos");
  add_video_options(ps, psnr_args.video);
  ps->add_option("--reference", psnr_args.reference, "Reference video")->required();
  ps->add_option("--test", psnr_args.test, "Test video")->required();
  ps->add_option("--mask", psnr_args.mask, "Also report loss-only PSNR");
  ps->add_option("--manifest", psnr_args.manifest, "Manifest path");

  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; }))
    sub->add_option("--config", config_path, "Config file of key = value lines");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Config entries become leading command line tokens of the subcommand
    // unless the same option is also given explicitly.
    if (const auto path = detail::find_config_path(args)) {
      const auto entries = load_config(*path);
      const auto sub_pos = std::find_if(args.begin(), args.end(), [&](const auto& a) {
        return app.get_subcommand_no_throw(a) != nullptr;
      });
      require(sub_pos != args.end(), ErrorCode::Usage, "no subcommand given");
      CLI::App* sub = app.get_subcommand(*sub_pos);
      std::vector<std::string> injected;
      for (const auto& e : entries) {
        CLI::Option* opt = sub->get_option_no_throw("--" + e.key);
        bool known_elsewhere = false;
        for (auto* other : app.get_subcommands([](CLI::App*) { return true; }))
          known_elsewhere |= other->get_option_no_throw("--" + e.key) != nullptr;
        require(known_elsewhere && e.key != "config", ErrorCode::Config,
                *path + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
        if (opt == nullptr || detail::given_on_command_line(args, e.key)) continue;
        if (opt->get_expected_min() == 0) {
          injected.push_back("--" + e.key + "=" + e.value);
        } else {
          injected.push_back("--" + e.key);
          injected.push_back(e.value);
        }
      }
      args.insert(sub_pos + 1, injected.begin(), injected.end());
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::Success& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      err << "error: " << error_code_name(ErrorCode::Usage) << ": " << e.what() << '\n'
          << app.help();
      return 2;
    }

    if (mask->parsed()) run_mask(mask_args, out);
    else if (sample->parsed()) run_sample(sample_args, out);
    else if (rec->parsed()) run_reconstruct(rec_args, out);
    else if (flow->parsed()) run_flow(flow_args, out);
    else if (bench->parsed()) run_bench(bench_args, out, err);
    else if (ps->parsed()) run_psnr(psnr_args, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::Usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: E_INTERNAL: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nrfse::cli
