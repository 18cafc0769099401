// Copyright 2026 The ROAR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roar/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "roar/binio.hpp"
#include "roar/dataset.hpp"
#include "roar/loss.hpp"
#include "roar/metrics.hpp"
#include "roar/model.hpp"
#include "roar/report.hpp"
#include "roar/trainer.hpp"

namespace roar {

namespace {

/// Missing or unreadable input files and dataset-level failures.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path))
    throw DataError(std::string(what) + " not found: '" + path + "'");
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Feature dims must agree across the dataset before a config is derived.
void check_uniform_dims(const std::vector<VideoSample>& samples) {
  for (const auto& s : samples) {
    if (s.image_dim != samples.front().image_dim || s.object_dim != samples.front().object_dim ||
        s.objects != samples.front().objects)
      throw DataError("dataset mixes feature dimensions (video '" + s.id + "')");
  }
}

std::vector<TraceSeries> traces_of(const std::vector<VideoSample>& samples,
                                   const ModelParams& params, const ModelConfig& config) {
  std::vector<TraceSeries> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    auto pass = forward_video(s, params, config);
    TraceSeries t;
    t.video_id = s.id;
    t.label = static_cast<int>(s.label);
    t.toa = s.toa;
    t.prob = pass.trace.prob;
    t.sigma = pass.trace.sigma;
    out.push_back(std::move(t));
  }
  return out;
}

struct SynthArgs {
  std::string out_path;
  SynthConfig cfg;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  auto samples = synth_generate(a.cfg);
  write_dataset(samples, a.out_path);

  std::size_t positives = 0;
  for (const auto& s : samples) positives += s.label;
  out << "[config] command=synth out=" << a.out_path << " videos=" << a.cfg.videos
      << " positive_rate=" << a.cfg.positive_rate << " frames=" << a.cfg.frames
      << " fps=" << a.cfg.fps << " d_img=" << a.cfg.image_dim << " d_obj=" << a.cfg.object_dim
      << " objects=" << a.cfg.objects << " ramp=" << a.cfg.ramp_width
      << " signal=" << a.cfg.signal_magnitude << " hf=" << a.cfg.hf_magnitude
      << " risky=" << a.cfg.risky_shift << " presence=" << a.cfg.presence_rate
      << " seed=" << a.cfg.seed << "\n";
  out << "wrote " << samples.size() << " videos (" << positives << " positive, "
      << samples.size() - positives << " negative), dims " << a.cfg.frames << "x"
      << a.cfg.image_dim << "/" << a.cfg.objects << "x" << a.cfg.object_dim << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "checksum=%016llx",
                static_cast<unsigned long long>(dataset_checksum(a.out_path)));
  out << buf << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data_path, config_path, out_path, log_path, val_out_path;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  require_file(a.data_path, "dataset");
  RunOptions opts;
  if (!a.config_path.empty()) {
    require_file(a.config_path, "config file");
    opts = load_run_options(a.config_path);
  }
  auto samples = read_dataset(a.data_path);
  check_uniform_dims(samples);
  ModelConfig model_cfg =
      opts.model_config(samples.front().image_dim, samples.front().object_dim);

  out << "[config] command=train data=" << a.data_path << " out=" << a.out_path
      << " epochs=" << opts.train.epochs << " batch_size=" << opts.train.batch_size
      << " learning_rate=" << opts.train.learning_rate << " seed=" << opts.train.seed
      << " val_fraction=" << opts.train.val_fraction << " hidden_dim=" << opts.hidden_dim
      << " gamma=" << opts.train.loss.gamma << " aux_weight=" << opts.train.loss.aux_weight
      << " disable=";
  for (std::size_t i = 0; i < opts.disabled.size(); ++i)
    out << (i ? "," : "") << opts.disabled[i];
  out << "\n";

  auto result = train(samples, model_cfg, opts.train, a.out_path,
                      [&](const EpochStats& e) {
                        out << "epoch " << e.epoch << " train_total=" << fixed6(e.train_total)
                            << " val_loss=" << fixed6(e.val_loss) << " val_ap=" << fixed6(e.val_ap)
                            << " lr=" << e.lr << "\n";
                      });

  const std::string log_path = a.log_path.empty() ? a.out_path + ".train.csv" : a.log_path;
  write_train_log_csv(result.log, log_path);
  out << "checkpoint=" << a.out_path << " log=" << log_path << "\n";

  if (!a.val_out_path.empty()) {
    std::vector<VideoSample> val;
    val.reserve(result.val_indices.size());
    for (std::size_t i : result.val_indices) val.push_back(samples[i]);
    if (val.empty()) throw DataError("no validation split to write (val_fraction too small)");
    write_dataset(val, a.val_out_path);
    out << "validation split (" << val.size() << " videos) -> " << a.val_out_path << "\n";
  }
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint_path, data_path, pr_path = "pr.csv", trace_path = "traces.csv";
  double threshold = 0.5;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.checkpoint_path, "checkpoint");
  require_file(a.data_path, "dataset");
  auto [params, config] = load_checkpoint(a.checkpoint_path);
  auto samples = read_dataset(a.data_path);
  check_uniform_dims(samples);
  if (samples.front().image_dim != config.image_dim ||
      samples.front().object_dim != config.object_dim)
    throw DataError("checkpoint/dataset mismatch: model expects dims " +
                    std::to_string(config.image_dim) + "/" + std::to_string(config.object_dim) +
                    ", dataset has " + std::to_string(samples.front().image_dim) + "/" +
                    std::to_string(samples.front().object_dim));

  out << "[config] command=eval checkpoint=" << a.checkpoint_path << " data=" << a.data_path
      << " threshold=" << a.threshold << " pr_out=" << a.pr_path
      << " trace_out=" << a.trace_path << "\n";

  auto scores = score_videos(samples, params, config);
  auto report = evaluate(scores);
  write_pr_csv(report, a.pr_path);
  write_trace_csv(traces_of(samples, params, config), a.trace_path);

  auto counts = classify_at_threshold(scores, a.threshold).counts;
  out << summary_line(report) << "\n";
  out << "at threshold " << a.threshold << ": tp=" << counts.tp << " fp=" << counts.fp
      << " fn=" << counts.fn << " tn=" << counts.tn << "\n";
  return kExitOk;
}

struct SweepArgs {
  std::string checkpoint_path, data_path, out_path = "noise_sweep.csv";
  std::vector<double> variances = {0.1, 0.2, 0.5, 1.5, 5.0, 20.0};
  std::string target = "both";
  std::uint64_t seed = 0;
};

int cmd_noise_sweep(const SweepArgs& a, std::ostream& out) {
  require_file(a.checkpoint_path, "checkpoint");
  require_file(a.data_path, "dataset");
  for (double v : a.variances)
    if (v < 0.0) throw std::invalid_argument("noise-sweep: negative variance");
  NoiseTarget target;
  if (a.target == "image") target = NoiseTarget::Image;
  else if (a.target == "object") target = NoiseTarget::Object;
  else if (a.target == "both") target = NoiseTarget::Both;
  else throw std::invalid_argument("noise-sweep: target must be image|object|both");

  auto [params, config] = load_checkpoint(a.checkpoint_path);
  auto samples = read_dataset(a.data_path);
  check_uniform_dims(samples);

  out << "[config] command=noise-sweep checkpoint=" << a.checkpoint_path
      << " data=" << a.data_path << " target=" << a.target << " seed=" << a.seed
      << " variances=";
  for (std::size_t i = 0; i < a.variances.size(); ++i) out << (i ? "," : "") << a.variances[i];
  out << "\n";

  std::ofstream csv(a.out_path);
  if (!csv) throw std::runtime_error("noise-sweep: cannot open '" + a.out_path + "'");
  csv << "variance,ap,mtta\n";

  auto eval_once = [&](const std::vector<VideoSample>& data) {
    auto report = evaluate(score_videos(data, params, config));
    return std::pair<double, double>(report.ap, report.mtta_seconds);
  };

  // clean baseline row, then one row per requested variance
  auto [clean_ap, clean_mtta] = eval_once(samples);
  csv << "0," << fixed6(clean_ap) << "," << fixed6(clean_mtta) << "\n";
  out << "variance=0 AP=" << fixed6(clean_ap) << " mTTA=" << fixed6(clean_mtta) << "s\n";
  for (double variance : a.variances) {
    NoiseConfig noise{variance, a.seed, target};
    auto noisy = add_gaussian_noise(samples, noise);
    auto [ap, mtta_s] = eval_once(noisy);
    csv << variance << "," << fixed6(ap) << "," << fixed6(mtta_s) << "\n";
    out << "variance=" << variance << " AP=" << fixed6(ap) << " mTTA=" << fixed6(mtta_s)
        << "s\n";
  }
  out << "sweep -> " << a.out_path << "\n";
  return kExitOk;
}

struct AblateArgs {
  std::string data_path, config_path, out_path = "ablation.csv";
  std::vector<std::string> disable;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  require_file(a.data_path, "dataset");
  RunOptions base_opts;
  if (!a.config_path.empty()) {
    require_file(a.config_path, "config file");
    base_opts = load_run_options(a.config_path);
  }
  std::vector<std::string> variants = a.disable;
  if (variants.size() == 1 && variants.front() == "all") variants = ablation_names();
  for (const auto& name : variants) {
    AblationSwitches probe;
    apply_ablation(probe, name);  // validates
  }

  auto samples = read_dataset(a.data_path);
  check_uniform_dims(samples);

  out << "[config] command=ablate data=" << a.data_path << " out=" << a.out_path
      << " seed=" << base_opts.train.seed << " epochs=" << base_opts.train.epochs
      << " variants=full";
  for (const auto& v : variants) out << "," << v;
  out << "\n";

  std::ofstream csv(a.out_path);
  if (!csv) throw std::runtime_error("ablate: cannot open '" + a.out_path + "'");
  csv << "variant,ap,mtta\n";

  auto run_variant = [&](const std::string& label, const std::vector<std::string>& disabled) {
    RunOptions opts = base_opts;
    opts.disabled = disabled;
    ModelConfig cfg = opts.model_config(samples.front().image_dim, samples.front().object_dim);
    auto result = train(samples, cfg, opts.train);
    std::vector<VideoSample> val;
    for (std::size_t i : result.val_indices) val.push_back(samples[i]);
    const auto& eval_set = val.empty() ? samples : val;
    auto report = evaluate(score_videos(eval_set, result.params, cfg));
    csv << label << "," << fixed6(report.ap) << "," << fixed6(report.mtta_seconds) << "\n";
    out << label << ": AP=" << fixed6(report.ap) << " mTTA=" << fixed6(report.mtta_seconds)
        << "s\n";
  };

  run_variant("full", {});
  for (const auto& name : variants) run_variant("w/o " + name, {name});
  out << "ablation table -> " << a.out_path << "\n";
  return kExitOk;
}

struct PlotArgs {
  std::string trace_path, out_path, video_id;
  double threshold = 0.5;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  require_file(a.trace_path, "trace CSV");
  auto series = read_trace_csv(a.trace_path);
  const TraceSeries* chosen = &series.front();
  if (!a.video_id.empty()) {
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const TraceSeries& s) { return s.video_id == a.video_id; });
    if (it == series.end())
      throw DataError("video '" + a.video_id + "' not present in '" + a.trace_path + "'");
    chosen = &*it;
  }
  out << "[config] command=plot trace=" << a.trace_path << " out=" << a.out_path
      << " video=" << chosen->video_id << " threshold=" << a.threshold << "\n";

  std::ofstream svg(a.out_path);
  if (!svg) throw std::runtime_error("plot: cannot open '" + a.out_path + "'");
  svg << render_trace_svg(*chosen, a.threshold);
  out << "svg -> " << a.out_path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"accident anticipation pipeline: synthesis, training, evaluation"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic feature dataset");
  synth_cmd->add_option("--out", synth.out_path, "output dataset path")->required();
  synth_cmd->add_option("--videos", synth.cfg.videos, "number of videos")->required();
  synth_cmd->add_option("--positive-rate", synth.cfg.positive_rate, "fraction of positives")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--seed", synth.cfg.seed, "master seed")->envname("ROAR_SEED");
  synth_cmd->add_option("--frames", synth.cfg.frames, "frames per video");
  synth_cmd->add_option("--fps", synth.cfg.fps, "frames per second");
  synth_cmd->add_option("--d-img", synth.cfg.image_dim, "image feature dim");
  synth_cmd->add_option("--d-obj", synth.cfg.object_dim, "object feature dim");
  synth_cmd->add_option("--objects", synth.cfg.objects, "object slots per frame");
  synth_cmd->add_option("--ramp", synth.cfg.ramp_width, "risk ramp width in frames");
  synth_cmd->add_option("--signal", synth.cfg.signal_magnitude, "smooth signature magnitude");
  synth_cmd->add_option("--hf", synth.cfg.hf_magnitude, "high-frequency signature magnitude");
  synth_cmd->add_option("--risky-shift", synth.cfg.risky_shift, "risky object mean shift");
  synth_cmd->add_option("--presence", synth.cfg.presence_rate, "object presence rate")
      ->check(CLI::Range(0.0, 1.0));

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model on a feature dataset");
  train_cmd->add_option("--data", train_args.data_path, "dataset path")->required();
  train_cmd->add_option("--config", train_args.config_path, "key=value run config");
  train_cmd->add_option("--out", train_args.out_path, "checkpoint path")->required();
  train_cmd->add_option("--log", train_args.log_path, "training log CSV path");
  train_cmd->add_option("--val-out", train_args.val_out_path,
                        "write the validation split as a dataset");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint_path, "checkpoint path")->required();
  eval_cmd->add_option("--data", eval_args.data_path, "dataset path")->required();
  eval_cmd->add_option("--threshold", eval_args.threshold, "decision threshold")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--pr-out", eval_args.pr_path, "PR curve CSV path");
  eval_cmd->add_option("--trace-out", eval_args.trace_path, "per-video trace CSV path");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("noise-sweep", "evaluate under gaussian feature noise");
  sweep_cmd->add_option("--checkpoint", sweep_args.checkpoint_path, "checkpoint path")
      ->required();
  sweep_cmd->add_option("--data", sweep_args.data_path, "dataset path")->required();
  sweep_cmd->add_option("--variances", sweep_args.variances, "noise variances")->delimiter(',');
  sweep_cmd->add_option("--target", sweep_args.target, "image|object|both");
  sweep_cmd->add_option("--seed", sweep_args.seed, "noise seed")->envname("ROAR_SEED");
  sweep_cmd->add_option("--out", sweep_args.out_path, "sweep CSV path");

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "train and evaluate ablation variants");
  ablate_cmd->add_option("--data", ablate_args.data_path, "dataset path")->required();
  ablate_cmd->add_option("--config", ablate_args.config_path, "key=value run config");
  ablate_cmd->add_option("--disable", ablate_args.disable,
                         "ablations to run (comma list or 'all')")
      ->required()
      ->delimiter(',');
  ablate_cmd->add_option("--out", ablate_args.out_path, "ablation CSV path");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plot", "render a probability timeline SVG");
  plot_cmd->add_option("--trace", plot_args.trace_path, "trace CSV path")->required();
  plot_cmd->add_option("--out", plot_args.out_path, "output SVG path")->required();
  plot_cmd->add_option("--video", plot_args.video_id, "video id (default: first)");
  plot_cmd->add_option("--threshold", plot_args.threshold, "threshold rule")
      ->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (train_cmd->parsed()) return cmd_train(train_args, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, out);
    if (sweep_cmd->parsed()) return cmd_noise_sweep(sweep_args, out);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate_args, out);
    if (plot_cmd->parsed()) return cmd_plot(plot_args, out);
    err << "usage error: no command\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const UndefinedApError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace roar
