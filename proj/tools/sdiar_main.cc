// Copyright 2026 The sdiar Authors
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

// sdiar command-line tool. Exit status: 0 success, 1 input error, 2 runtime
// error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdiar/pipeline.h"
#include "sdiar/simulator.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sdiar {
namespace {

constexpr const char* kVersion = "1.0.0";

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

// Options shared by subcommands that run the front end.
struct FrontEndArgs {
  std::vector<std::string> inputs;
  std::string config_path;
  std::string align;
  std::vector<double> align_window;
  std::vector<double> offsets;
  int threads = 0;
  double alpha = -1.0;
};

void AddFrontEnd(CLI::App* cmd, FrontEndArgs* a) {
  cmd->add_option("--inputs", a->inputs, "Device WAV files (two channels each)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", a->config_path, "JSON config overriding defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--align", a->align, "Alignment mode")
      ->check(CLI::IsMember({"event", "fixed", "none"}));
  cmd->add_option("--align-window", a->align_window, "Event search window START,END (s)")
      ->delimiter(',')
      ->expected(2);
  cmd->add_option("--offsets", a->offsets, "Per-device clock offsets for fixed mode (s)")
      ->delimiter(',');
  cmd->add_option("--threads", a->threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", a->alpha, "Smoothing factor in [0, 1)");
}

PipelineConfig BuildConfig(const FrontEndArgs& a) {
  PipelineConfig c;
  if (!a.config_path.empty()) c = PipelineConfig::FromJson(ReadFile(a.config_path), c);
  if (!a.align.empty()) {
    c.align = a.align == "event"   ? AlignMode::kAcousticEvent
              : a.align == "fixed" ? AlignMode::kFixedOffsets
                                   : AlignMode::kNone;
  }
  if (a.align_window.size() == 2) {
    c.detector.search_start_s = a.align_window[0];
    c.detector.search_end_s = a.align_window[1];
  }
  if (!a.offsets.empty()) c.fixed_offsets_s = a.offsets;
  if (a.threads > 0) c.threads = a.threads;
  if (a.alpha >= 0.0) c.smoothing.alpha = a.alpha;
  return c;
}

std::vector<DeviceRecording> LoadInputs(const std::vector<std::string>& paths) {
  std::vector<DeviceRecording> recs;
  for (size_t i = 0; i < paths.size(); ++i) {
    recs.push_back(LoadWav(paths[i], static_cast<int>(i + 1)));
  }
  return recs;
}

json Manifest(const std::string& command, const std::vector<std::string>& inputs,
              const PipelineConfig& config, const std::vector<std::string>& outputs) {
  json j;
  j["tool"] = "sdiar";
  j["version"] = kVersion;
  j["command"] = command;
  j["compiler"] = __VERSION__;
  j["inputs"] = json::array();
  for (const auto& p : inputs) {
    j["inputs"].push_back({{"path", p},
                           {"bytes", fs::file_size(p)},
                           {"fnv1a", Fnv1aHex(ReadFile(p))}});
  }
  const std::string cfg = config.ToJson();
  j["config"] = json::parse(cfg);
  j["config_hash"] = Fnv1aHex(cfg);
  j["outputs"] = outputs;
  return j;
}

int RunDiarize(const FrontEndArgs& fe, size_t sources, int max_iters, double tol,
               int64_t seed, const std::string& init, double min_dur, bool gate,
               const std::string& ref, double collar, const std::string& out_dir,
               const std::string& recording_id, const std::string& save_model) {
  PipelineConfig c = BuildConfig(fe);
  c.num_sources = sources;
  if (max_iters >= 0) c.fit.max_iters = max_iters;
  if (tol >= 0.0) c.fit.tol = tol;
  if (seed >= 0) c.fit.seed = static_cast<uint64_t>(seed);
  if (!init.empty()) c.fit.init = init == "random" ? InitStrategy::kRandom : InitStrategy::kPeakKMeans;
  if (min_dur >= 0.0) c.min_duration_s = min_dur;
  if (gate) c.silence_gate = true;
  if (collar >= 0.0) c.collar_s = collar;
  c.Validate();

  const auto reference = ref.empty() ? std::vector<LabeledSegment>{} : ReadSegmentsFile(ref);
  const auto result = RunPipeline(LoadInputs(fe.inputs), c);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::string id =
      recording_id.empty() ? fs::path(fe.inputs.front()).stem().string() : recording_id;
  std::vector<std::string> outputs = {"hyp.rttm", "posteriors.csv", "fit_report.json"};
  WriteFile(dir / "hyp.rttm", WriteRttm(result.diarization.segments, id));
  WriteFile(dir / "posteriors.csv", PosteriorCsv(result));
  WriteFile(dir / "fit_report.json", FitReportJson(result));
  if (!save_model.empty()) {
    WriteFile(save_model, SerializeModel(result.fit.params, c.ToJson()));
    outputs.push_back(save_model);
  }
  std::printf("frames %zu, EM iterations %d, final log-likelihood %.6f\n",
              result.frame_times_s.size(), result.fit.iterations_run,
              result.fit.log_likelihood_trace.empty() ? 0.0
                                                      : result.fit.log_likelihood_trace.back());
  std::printf("wrote %s\n", (dir / "hyp.rttm").string().c_str());
  if (!reference.empty()) {
    ScoreOptions so;
    so.collar_s = c.collar_s;
    const DerResult der = ScoreDer(reference, result.hypothesis, so);
    WriteFile(dir / "der.json", DerJson(der, c.collar_s));
    outputs.push_back("der.json");
    std::printf("DER %.2f%% (miss %.2f%%, false alarm %.2f%%, confusion %.2f%%)\n",
                100.0 * der.der, 100.0 * der.miss, 100.0 * der.false_alarm,
                100.0 * der.speaker_error);
  }
  outputs.push_back("manifest.json");
  WriteFile(dir / "manifest.json", Manifest("diarize", fe.inputs, c, outputs).dump(2));
  return 0;
}

int RunSimulate(const std::string& spec_path, uint64_t seed, const std::string& out_dir,
                double duration, double max_offset, double snr) {
  SceneSpec spec;
  if (!spec_path.empty()) {
    spec = SceneFromJson(ReadFile(spec_path));
  } else {
    MeetingOptions m;
    if (duration > 0.0) m.duration_s = duration;
    if (max_offset >= 0.0) m.max_clock_offset_s = max_offset;
    if (!std::isnan(snr)) m.snr_db = snr;
    spec = MakeMeetingScene(m, seed);
  }
  const RenderedScene scene = Render(spec, seed);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  for (size_t p = 0; p < scene.recordings.size(); ++p) {
    const auto name = "dev" + std::to_string(p + 1) + ".wav";
    WriteWav((dir / name).string(), scene.recordings[p]);
    std::printf("wrote %s\n", (dir / name).string().c_str());
  }
  std::ostringstream rttm;
  for (const auto& s : scene.reference) {
    char line[160];
    std::snprintf(line, sizeof(line), "SPEAKER scene 1 %.3f %.3f <NA> <NA> %s <NA> <NA>\n",
                  s.start_s, s.end_s - s.start_s, s.label.c_str());
    rttm << line;
  }
  WriteFile(dir / "ref.rttm", rttm.str());
  WriteFile(dir / "scene.json", SceneToJson(spec));
  std::printf("wrote %s and %s\n", (dir / "ref.rttm").string().c_str(),
              (dir / "scene.json").string().c_str());
  return 0;
}

int RunScore(const std::string& ref, const std::string& hyp, double collar,
             const std::string& out) {
  ScoreOptions so;
  so.collar_s = collar;
  const DerResult der = ScoreDer(ReadSegmentsFile(ref), ReadSegmentsFile(hyp), so);
  const std::string text = DerJson(der, collar);
  if (!out.empty()) WriteFile(out, text);
  std::printf("%s\n", text.c_str());
  return 0;
}

int RunPlotFeatures(const FrontEndArgs& fe, size_t sources, const std::string& out_dir,
                    bool image, bool raw) {
  PipelineConfig c = BuildConfig(fe);
  c.num_sources = sources;
  c.Validate();
  const auto result = RunPipeline(LoadInputs(fe.inputs), c);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  for (size_t p = 0; p < result.features.size(); ++p) {
    const auto stem = "features_dev" + std::to_string(p + 1);
    WriteFile(dir / (stem + ".csv"), FeatureCsv(result, p, raw));
    if (image) {
      WriteFile(dir / (stem + ".pgm"), FeaturePgm(raw ? result.raw_srp[p] : result.features[p]));
    }
  }
  WriteFile(dir / "posteriors.csv", PosteriorCsv(result));
  std::printf("wrote %zu feature maps and posteriors.csv to %s\n", result.features.size(),
              out_dir.c_str());
  return 0;
}

int RunAlignCheck(const FrontEndArgs& fe) {
  const PipelineConfig c = BuildConfig(fe);
  std::vector<DeviceRecording> recs;
  for (const auto& r : LoadInputs(fe.inputs)) recs.push_back(Resample(r, c.sample_rate_hz));
  const auto a = Align(recs, c.align, c.detector, c.fixed_offsets_s);
  const double fs_hz = c.sample_rate_hz;
  std::printf("device,event_sample,offset_samples,offset_ms\n");
  for (size_t p = 0; p < recs.size(); ++p) {
    const long long ev = p < a.event_samples.size() ? a.event_samples[p] : -1;
    std::printf("%zu,%lld,%lld,%.3f\n", p + 1, ev, static_cast<long long>(a.offsets_samples[p]),
                1000.0 * static_cast<double>(a.offsets_samples[p]) / fs_hz);
  }
  std::printf("common span: %.3f s from %.3f s\n",
              static_cast<double>(a.common_length) / fs_hz, a.origin_s());
  return 0;
}

}  // namespace
}  // namespace sdiar

int main(int argc, char** argv) {
  using namespace sdiar;
  CLI::App app{"Multi-device speaker diarization from directional statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  FrontEndArgs diar_fe;
  size_t sources = 0;
  int max_iters = -1;
  double tol = -1.0;
  int64_t seed = -1;
  std::string init, ref, out_dir = ".", recording_id, save_model;
  double min_dur = -1.0, collar = -1.0;
  bool gate = false;
  auto* diarize = app.add_subcommand("diarize", "Diarize a set of device recordings");
  AddFrontEnd(diarize, &diar_fe);
  diarize->add_option("--sources", sources, "Number of speakers")->required()->check(CLI::PositiveNumber);
  diarize->add_option("--max-iters", max_iters, "EM iteration cap");
  diarize->add_option("--tol", tol, "Relative log-likelihood tolerance");
  diarize->add_option("--seed", seed, "Initialization seed");
  diarize->add_option("--init", init, "Initialization")
      ->check(CLI::IsMember({"peak-kmeans", "random"}));
  diarize->add_option("--min-dur", min_dur, "Merge runs shorter than this (s)");
  diarize->add_flag("--silence-gate", gate, "Leave low-energy frames unlabeled");
  diarize->add_option("--ref", ref, "Reference RTTM or CSV")->check(CLI::ExistingFile);
  diarize->add_option("--collar", collar, "Scoring collar (s)");
  diarize->add_option("--out-dir", out_dir, "Output directory");
  diarize->add_option("--recording-id", recording_id, "RTTM file id");
  diarize->add_option("--save-model", save_model, "Write the fitted model as JSON");

  std::string spec_path, sim_out = ".";
  uint64_t sim_seed = 0;
  double sim_duration = -1.0, sim_offset = -1.0, sim_snr = std::nan("");
  auto* simulate = app.add_subcommand("simulate", "Render a synthetic meeting");
  simulate->add_option("--spec", spec_path, "Scene JSON (default: random meeting)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--out-dir", sim_out, "Output directory");
  simulate->add_option("--duration", sim_duration, "Meeting length (s)");
  simulate->add_option("--max-offset", sim_offset, "Largest clock offset (s)");
  simulate->add_option("--snr", sim_snr, "Per-device SNR (dB)");

  std::string score_ref, score_hyp, score_out;
  double score_collar = 0.25;
  auto* score = app.add_subcommand("score", "Diarization error rate of a hypothesis");
  score->add_option("--ref", score_ref, "Reference RTTM or CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--hyp", score_hyp, "Hypothesis RTTM or CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--collar", score_collar, "Collar (s)");
  score->add_option("--out", score_out, "Write the report as JSON");

  FrontEndArgs plot_fe;
  size_t plot_sources = 0;
  std::string plot_out = ".";
  bool plot_image = false, plot_raw = false;
  auto* plot = app.add_subcommand("plot-features", "Dump directional statistics and posteriors");
  AddFrontEnd(plot, &plot_fe);
  plot->add_option("--sources", plot_sources, "Number of speakers")->required()->check(CLI::PositiveNumber);
  plot->add_option("--out-dir", plot_out, "Output directory");
  plot->add_flag("--image", plot_image, "Also write PGM heatmaps");
  plot->add_flag("--raw", plot_raw, "Dump unsmoothed SRP instead");

  FrontEndArgs align_fe;
  auto* align = app.add_subcommand("align-check", "Report estimated device offsets");
  AddFrontEnd(align, &align_fe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*diarize) {
      return RunDiarize(diar_fe, sources, max_iters, tol, seed, init, min_dur, gate, ref, collar,
                        out_dir, recording_id, save_model);
    }
    if (*simulate) {
      return RunSimulate(spec_path, sim_seed, sim_out, sim_duration, sim_offset, sim_snr);
    }
    if (*score) return RunScore(score_ref, score_hyp, score_collar, score_out);
    if (*plot) return RunPlotFeatures(plot_fe, plot_sources, plot_out, plot_image, plot_raw);
    if (*align) return RunAlignCheck(align_fe);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
