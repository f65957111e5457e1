// Copyright 2026 The srnerv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command implementations behind the `srnerv` tool. Everything returns an
// exit code instead of terminating, so the commands can be driven in-process.
//
// Settings come from three layers, later ones winning: a key=value --config
// file, repeated --set key=value flags, then the dedicated flags.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "srnerv/checkpoint.hpp"
#include "srnerv/codec.hpp"
#include "srnerv/errors.hpp"
#include "srnerv/media_io.hpp"
#include "srnerv/metrics.hpp"
#include "srnerv/model.hpp"
#include "srnerv/trainer.hpp"

namespace srnerv::cli {

namespace fs = std::filesystem;
using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct Settings {
  ModelConfig model;
  TrainConfig train;
  SynthSpec synth;
  std::set<std::string> explicit_keys;
};

inline bool apply_synth_key(SynthSpec& s, const std::string& key, const std::string& value) {
  if (key == "kind") {
    s.kind = parse_synth_kind(value);
  } else if (key == "square_size") {
    s.square_size = parse_int_value(key, value);
  } else if (key == "velocity_x") {
    s.velocity_x = parse_int_value(key, value);
  } else if (key == "velocity_y") {
    s.velocity_y = parse_int_value(key, value);
  } else if (key == "cell_size") {
    s.cell_size = parse_int_value(key, value);
  } else if (key == "scene_length") {
    s.scene_length = parse_int_value(key, value);
  } else if (key == "pan_speed") {
    try {
      s.pan_speed = std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("'pan_speed' expects a number, got '" + value + "'");
    }
  } else {
    return false;
  }
  return true;
}

inline void apply_settings(Settings& s, const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    const bool known = apply_model_key(s.model, k, v) | apply_train_key(s.train, k, v) |
                       apply_synth_key(s.synth, k, v);
    if (!known) throw ConfigError("unknown setting '" + k + "'");
    s.explicit_keys.insert(k);
  }
  s.synth.frames = s.model.frames;
  s.synth.height = s.model.height;
  s.synth.width = s.model.width;
  s.synth.seed = s.train.seed;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Common flags shared by every subcommand.
struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  KeyValues flag_kv;  // dedicated flags, as key/value overrides
};

inline void add_common(CLI::App* app, Common& c, bool out_required) {
  app->add_option("--config", c.config, "key=value settings file");
  app->add_option("--set", c.sets, "override one setting (key=value), repeatable");
  app->add_option("--seed", c.seed, "random seed");
  auto* o = app->add_option("--out", c.out, "output path");
  if (out_required) o->required();
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

// Registers a flag that is forwarded as a setting when given.
inline void add_setting_flag(CLI::App* app, Common& c, const std::string& flag,
                             const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&c, key](const std::string& v) { c.flag_kv.emplace_back(key, v); }, help);
}

inline Settings resolve(const Common& c) {
  KeyValues kv;
  if (!c.config.empty()) kv = parse_key_values(read_text(c.config));
  for (const auto& s : c.sets) {
    auto one = parse_key_values(s);
    if (one.size() != 1) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv.push_back(one.front());
  }
  kv.insert(kv.end(), c.flag_kv.begin(), c.flag_kv.end());
  if (c.seed) kv.emplace_back("seed", std::to_string(*c.seed));
  Settings s;
  apply_settings(s, kv);
  return s;
}

// Fills the video-dependent model fields not pinned by the user.
inline ModelConfig fit_to_video(const Settings& s, const VideoTensor& v) {
  ModelConfig c = s.model;
  auto pinned = [&](const char* k) { return s.explicit_keys.count(k) > 0; };
  c.frames = pinned("frames") ? c.frames : v.frames;
  c.height = pinned("height") ? c.height : v.height;
  c.width = pinned("width") ? c.width : v.width;
  if (c.stages < 1 || c.stages > 12) throw ConfigError("stages must be in [1,12]");
  const int scale = 1 << c.stages;
  if (!pinned("grid_h")) {
    if (c.height % scale != 0) {
      throw ConfigError("height " + std::to_string(c.height) + " is not divisible by 2^stages");
    }
    c.grid_h = c.height / scale;
  }
  if (!pinned("grid_w")) {
    if (c.width % scale != 0) {
      throw ConfigError("width " + std::to_string(c.width) + " is not divisible by 2^stages");
    }
    c.grid_w = c.width / scale;
  }
  if (!pinned("grid_t")) c.grid_t = std::min(c.grid_t, c.frames);
  validate(c);
  check_video_matches(v, c);
  return c;
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// synth

inline int cmd_synth(const Settings& s, const Common& c, std::ostream& out) {
  const auto v = synth_video(s.synth);
  if (fs::path(c.out).has_parent_path()) ensure_dir(fs::path(c.out).parent_path());
  save_video(v, c.out);
  out << "wrote " << to_string(s.synth.kind) << " " << v.frames << "x" << v.height << "x"
      << v.width << " to " << c.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

inline int cmd_fit(const Settings& s, const Common& c, const std::string& input,
                   std::optional<long long> budget, std::ostream& out) {
  const auto video = load_video(input);
  auto mcfg = fit_to_video(s, video);
  if (budget) mcfg = match_budget(*budget, mcfg);
  const auto res = fit<float>(video, mcfg, s.train);
  ensure_dir(c.out);
  save_checkpoint(res.store, fs::path(c.out) / "model.ckpt");
  write_text_file(fs::path(c.out) / "train_log.csv", res.log.to_csv());
  const double final_psnr = psnr(render_video(res.store), video);
  out << "fit " << count_params(mcfg).total << " params, channels " << mcfg.channels
      << ", share " << to_string(mcfg.share) << ", " << res.log.rows.size() << " steps, psnr "
      << fmt("%.4f", final_psnr) << " dB\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compress

struct CompressReport {
  double bpp = 0;
  std::size_t file_bytes = 0, payload_bytes = 0;
  RateEstimate rate;
  double psnr = 0;
  long long params = 0;
  std::size_t pruned = 0;

  std::string to_csv() const {
    std::ostringstream o;
    o << "bpp,file_bytes,payload_bytes,est_sm_bits,est_cm_bits,est_other_bits,est_total_bits,"
         "psnr,params,pruned\n";
    char line[512];
    std::snprintf(line, sizeof line, "%.17g,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%zu\n", bpp,
                  file_bytes, payload_bytes, rate.spatial_bits, rate.channel_bits, rate.other_bits,
                  rate.total_bits, psnr, params, pruned);
    o << line;
    return o.str();
  }
};

struct Compressed {
  std::vector<std::uint8_t> bitstream;
  CompressReport report;
  TrainLog qat_log;
};

// prune -> QAT -> quantize -> serialize, then measure the decoder's output.
inline Compressed compress_store(ParameterStore<float> st, const VideoTensor& video,
                                 const TrainConfig& tcfg) {
  Compressed r;
  if (tcfg.prune_fraction > 0.0) prune_global(st, tcfg.prune_fraction);
  r.qat_log = qat_finetune(st, video, tcfg);
  const auto qm = quantize_store(st, tcfg.qat_bits);
  r.bitstream = serialize_quantized(qm);
  const auto& c = st.config;
  r.report.file_bytes = r.bitstream.size();
  r.report.payload_bytes = encode_payload(qm).size();
  r.report.bpp = bpp(8.0 * static_cast<double>(r.bitstream.size()), c.frames, c.height, c.width);
  r.report.rate = estimate_rate(qm);
  r.report.psnr = psnr(decode_video(r.bitstream), video);
  r.report.params = count_params(c).total;
  r.report.pruned = pruned_count(st);
  return r;
}

inline int cmd_compress(const Settings& s, const Common& c, const std::string& checkpoint,
                        const std::string& input, std::ostream& out) {
  auto st = load_checkpoint(checkpoint);
  const auto video = load_video(input);
  check_video_matches(video, st.config);
  const auto r = compress_store(std::move(st), video, s.train);
  ensure_dir(c.out);
  write_file_bytes(fs::path(c.out) / "model.srnv", r.bitstream);
  write_text_file(fs::path(c.out) / "report.csv", r.report.to_csv());
  write_text_file(fs::path(c.out) / "qat_log.csv", r.qat_log.to_csv());
  out << "compressed to " << r.report.file_bytes << " bytes, bpp " << fmt("%.6f", r.report.bpp)
      << ", psnr " << fmt("%.6f", r.report.psnr) << " dB\n";
  return 0;
}

// ---------------------------------------------------------------------------
// decompress

inline int cmd_decompress(const Common& c, const std::string& bitstream,
                          const std::string& reference, std::ostream& out) {
  const auto bytes = read_file_bytes(bitstream);
  const auto video = decode_video(bytes);
  if (fs::path(c.out).has_parent_path()) ensure_dir(fs::path(c.out).parent_path());
  save_video(video, c.out);
  out << "decoded " << video.frames << "x" << video.height << "x" << video.width << " to "
      << c.out << "\n";
  if (!reference.empty()) {
    out << "psnr " << fmt("%.9f", psnr(video, load_video(reference))) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

inline int cmd_eval(const Common& c, const std::string& a, const std::string& b,
                    const std::string& anchor, const std::string& test, std::ostream& out) {
  std::string csv;
  if (!anchor.empty() || !test.empty()) {
    if (anchor.empty() || test.empty() || !a.empty() || !b.empty()) {
      throw ConfigError("eval takes either --a/--b videos or --anchor/--test curves");
    }
    const auto fa = read_rd_csv(anchor), ft = read_rd_csv(test);
    for (const auto& w : fa.warnings) out << "warning: " << anchor << " " << w << "\n";
    for (const auto& w : ft.warnings) out << "warning: " << test << " " << w << "\n";
    const double bd = bd_rate(fa.points, ft.points);
    csv = "bd_rate_percent\n" + fmt("%.17g", bd) + "\n";
    out << "bd-rate " << fmt("%.4f", bd) << " %\n";
  } else {
    if (a.empty() || b.empty()) throw ConfigError("eval needs --a and --b, or --anchor and --test");
    const auto va = load_video(a), vb = load_video(b);
    if (va.frames != vb.frames || va.height != vb.height || va.width != vb.width) {
      throw ShapeError("eval: videos differ in dimensions");
    }
    const double p = psnr(va, vb), q = ssim(va, vb);
    csv = "psnr,ssim\n" + fmt("%.17g", p) + "," + fmt("%.17g", q) + "\n";
    out << "psnr " << fmt("%.6f", p) << " dB, ssim " << fmt("%.6f", q) << "\n";
  }
  if (!c.out.empty()) write_text_file(c.out, csv);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCell {
  ShareMode mode = ShareMode::kNone;
  long long budget = 0;
  int channels = 0;
  long long params = 0;
  std::size_t file_bytes = 0;
  double bpp = 0;
  double psnr = 0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::map<ShareMode, double> bd_rate;  // complete curves only
};

inline std::vector<long long> parse_budgets(const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--budgets expects positive integers, got '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--budgets is empty");
  return out;
}

inline std::vector<ShareMode> parse_modes(const std::string& text) {
  std::vector<ShareMode> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto m = parse_share_mode(item);
    if (std::find(out.begin(), out.end(), m) != out.end()) throw ConfigError("duplicate mode " + item);
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("--modes is empty");
  return out;
}

// One (mode, budget) cell: match_budget -> fit -> prune -> QAT -> serialize.
inline SweepCell run_cell(ShareMode mode, long long budget, const ModelConfig& tmpl,
                          const VideoTensor& video, const TrainConfig& tcfg,
                          const fs::path& cell_dir) {
  SweepCell cell;
  cell.mode = mode;
  cell.budget = budget;
  try {
    ModelConfig m = tmpl;
    m.share = mode;
    m = match_budget(budget, m);
    cell.channels = m.channels;
    cell.params = count_params(m).total;
    auto fitted = fit<float>(video, m, tcfg);
    const auto r = compress_store(std::move(fitted.store), video, tcfg);
    const std::string stem = std::string(to_string(mode)) + "_" + std::to_string(budget);
    write_file_bytes(cell_dir / (stem + ".srnv"), r.bitstream);
    write_text_file(cell_dir / (stem + "_train_log.csv"), fitted.log.to_csv());
    cell.file_bytes = r.report.file_bytes;
    cell.bpp = r.report.bpp;
    cell.psnr = r.report.psnr;
    cell.ok = true;
  } catch (const Error& e) {
    cell.error = e.what();
  }
  return cell;
}

// Runs every cell on up to `jobs` threads. With `tie_modes` every mode reuses
// the none-mode cells, which makes all curves identical.
inline SweepResult run_sweep(const VideoTensor& video, const ModelConfig& tmpl,
                             const TrainConfig& tcfg, const std::vector<long long>& budgets,
                             const std::vector<ShareMode>& modes, int jobs, bool tie_modes,
                             const fs::path& out_dir) {
  const fs::path cell_dir = out_dir / "cells";
  ensure_dir(cell_dir);
  std::vector<std::pair<ShareMode, long long>> work;
  const std::vector<ShareMode> run_modes = tie_modes ? std::vector<ShareMode>{ShareMode::kNone} : modes;
  for (auto m : run_modes) {
    for (auto b : budgets) work.emplace_back(m, b);
  }
  std::vector<SweepCell> done(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      done[i] = run_cell(work[i].first, work[i].second, tmpl, video, tcfg, cell_dir);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult res;
  for (auto m : modes) {
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      SweepCell cell = done[tie_modes ? b : static_cast<std::size_t>(
                                                std::find(run_modes.begin(), run_modes.end(), m) -
                                                run_modes.begin()) * budgets.size() + b];
      cell.mode = m;
      res.cells.push_back(cell);
    }
  }
  auto curve = [&](ShareMode m) {
    std::vector<RDPoint> pts;
    bool complete = true;
    for (const auto& c : res.cells) {
      if (c.mode != m) continue;
      if (c.ok) pts.push_back({c.bpp, c.psnr});
      else complete = false;
    }
    std::sort(pts.begin(), pts.end(), [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
    return std::make_pair(pts, complete);
  };
  const bool have_anchor = std::find(modes.begin(), modes.end(), ShareMode::kNone) != modes.end();
  const auto anchor = curve(ShareMode::kNone);
  for (auto m : modes) {
    const auto [pts, complete] = curve(m);
    write_rd_csv(pts, out_dir / ("rd_" + std::string(to_string(m)) + ".csv"));
    if (!have_anchor || !anchor.second || !complete || pts.size() < 4) continue;
    try {
      res.bd_rate[m] = bd_rate(anchor.first, pts);
    } catch (const ConfigError&) {
      // Degenerate curves (no overlap, repeated PSNR) have no BD value.
    }
  }
  return res;
}

inline std::string cells_csv(const SweepResult& r) {
  std::ostringstream o;
  o << "mode,budget,channels,params,file_bytes,bpp,psnr,status\n";
  char line[512];
  for (const auto& c : r.cells) {
    std::snprintf(line, sizeof line, "%s,%lld,%d,%lld,%zu,%.17g,%.17g,%s\n", to_string(c.mode),
                  c.budget, c.channels, c.params, c.file_bytes, c.bpp, c.psnr,
                  c.ok ? "ok" : "missing");
    o << line;
  }
  return o.str();
}

inline std::string bd_summary_csv(const SweepResult& r, const std::vector<ShareMode>& modes) {
  std::ostringstream o;
  o << "mode,bd_rate_percent,status\n";
  for (auto m : modes) {
    auto it = r.bd_rate.find(m);
    o << to_string(m) << ",";
    if (it == r.bd_rate.end()) o << "nan,incomplete\n";
    else o << fmt("%.17g", it->second) << (m == ShareMode::kNone ? ",anchor\n" : ",ok\n");
  }
  return o.str();
}

struct SweepArgs {
  std::string input;
  std::string budgets = "4000,8000,16000,32000";
  std::string modes = "none,hybrid,full";
  bool tie_modes = false;
};

inline int cmd_sweep(const Settings& s, const Common& c, const SweepArgs& a, std::ostream& out) {
  const auto video = a.input.empty() ? synth_video(s.synth) : load_video(a.input);
  const auto tmpl = fit_to_video(s, video);
  const auto budgets = parse_budgets(a.budgets);
  const auto modes = parse_modes(a.modes);
  if (budgets.size() < 4) out << "note: fewer than 4 budgets, BD-rate will not be computed\n";
  for (auto b : budgets) {
    ModelConfig probe = tmpl;
    for (auto m : modes) {
      probe.share = m;
      (void)match_budget(b, probe);  // reject impossible budgets before any training
    }
  }
  ensure_dir(c.out);
  const auto r = run_sweep(video, tmpl, s.train, budgets, modes, c.jobs, a.tie_modes, c.out);
  write_text_file(fs::path(c.out) / "cells.csv", cells_csv(r));
  write_text_file(fs::path(c.out) / "bd_summary.csv", bd_summary_csv(r, modes));
  for (const auto& cell : r.cells) {
    out << to_string(cell.mode) << " budget " << cell.budget << ": ";
    if (cell.ok) out << "bpp " << fmt("%.5f", cell.bpp) << ", psnr " << fmt("%.3f", cell.psnr) << " dB\n";
    else out << "missing (" << cell.error << ")\n";
  }
  for (auto m : modes) {
    auto it = r.bd_rate.find(m);
    out << "bd-rate " << to_string(m) << " vs none: "
        << (it == r.bd_rate.end() ? std::string("n/a") : fmt("%.3f", it->second) + " %") << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Entry point.

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Per-video neural representation codec", "srnerv"};
  app.require_subcommand(1, 1);

  Common common;
  std::string input, checkpoint, bitstream, reference, eval_a, eval_b, anchor, test;
  std::optional<long long> budget;
  SweepArgs sweep;

  auto* synth = app.add_subcommand("synth", "write a synthetic test video");
  add_common(synth, common, true);
  add_setting_flag(synth, common, "--kind", "kind", "static_bg_moving_square|text_grid|smooth_gradient_pan");
  add_setting_flag(synth, common, "--frames", "frames", "frame count");
  add_setting_flag(synth, common, "--height", "height", "frame height");
  add_setting_flag(synth, common, "--width", "width", "frame width");

  auto* fitc = app.add_subcommand("fit", "fit a model to a video");
  add_common(fitc, common, true);
  fitc->add_option("--input", input, "video (.rgb or PNG directory)")->required();
  fitc->add_option("--budget", budget, "parameter budget; picks the channel width");
  add_setting_flag(fitc, common, "--share", "share_mode", "none|full|hybrid");
  add_setting_flag(fitc, common, "--channels", "channels", "channel width");
  add_setting_flag(fitc, common, "--epochs", "epochs", "training epochs");

  auto* comp = app.add_subcommand("compress", "prune, fine-tune and encode a checkpoint");
  add_common(comp, common, true);
  comp->add_option("--checkpoint", checkpoint, "model.ckpt from fit")->required();
  comp->add_option("--input", input, "the fitted video")->required();
  add_setting_flag(comp, common, "--prune", "prune_fraction", "pruned weight fraction");
  add_setting_flag(comp, common, "--bits", "qat_bits", "quantization bits");
  add_setting_flag(comp, common, "--epochs", "epochs", "main schedule length (sets QAT length)");

  auto* dec = app.add_subcommand("decompress", "decode a bitstream to video");
  add_common(dec, common, true);
  dec->add_option("--bitstream", bitstream, "model.srnv")->required();
  dec->add_option("--reference", reference, "original video for PSNR");

  auto* ev = app.add_subcommand("eval", "compare two videos or two RD curves");
  add_common(ev, common, false);
  ev->add_option("--a", eval_a, "first video");
  ev->add_option("--b", eval_b, "second video");
  ev->add_option("--anchor", anchor, "anchor RD csv");
  ev->add_option("--test", test, "test RD csv");

  auto* sw = app.add_subcommand("sweep", "rate-distortion sweep over budgets and share modes");
  add_common(sw, common, true);
  sw->add_option("--input", sweep.input, "video; a synthetic one is generated when omitted");
  sw->add_option("--budgets", sweep.budgets, "comma-separated parameter budgets");
  sw->add_option("--modes", sweep.modes, "comma-separated share modes");
  sw->add_flag("--tie-modes", sweep.tie_modes, "debug: every mode reuses the none-mode cells");
  add_setting_flag(sw, common, "--kind", "kind", "synthetic content kind");
  add_setting_flag(sw, common, "--frames", "frames", "synthetic frame count");
  add_setting_flag(sw, common, "--height", "height", "synthetic frame height");
  add_setting_flag(sw, common, "--width", "width", "synthetic frame width");
  add_setting_flag(sw, common, "--epochs", "epochs", "training epochs per cell");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*synth) return cmd_synth(resolve(common), common, out);
    if (*fitc) return cmd_fit(resolve(common), common, input, budget, out);
    if (*comp) return cmd_compress(resolve(common), common, checkpoint, input, out);
    if (*dec) return cmd_decompress(common, bitstream, reference, out);
    if (*ev) return cmd_eval(common, eval_a, eval_b, anchor, test, out);
    if (*sw) return cmd_sweep(resolve(common), common, sweep, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kIo);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kConfig);
  }
  return static_cast<int>(ExitCode::kConfig);
}

}  // namespace srnerv::cli
