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

#include "roar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace roar {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: lr must be > 0");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("TrainConfig: val fraction must lie in [0,1)");
  if (grad_clip_norm < 0.0) throw std::invalid_argument("TrainConfig: clip norm must be >= 0");
  loss.validate();
}

// --- Adam ------------------------------------------------------------------

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr) {
  auto named = params.named_tensors();
  if (grads.size() != named.size())
    throw ShapeError("adam_step: gradient group count " + std::to_string(grads.size()) +
                     " does not match parameter count " + std::to_string(named.size()));
  if (state.m.empty()) {
    state.m.resize(named.size());
    state.v.resize(named.size());
    for (std::size_t i = 0; i < named.size(); ++i) {
      state.m[i].assign(named[i].second->size(), 0.0);
      state.v[i].assign(named[i].second->size(), 0.0);
    }
  }
  state.step += 1;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < named.size(); ++i) {
    Tensor& t = *named[i].second;
    if (grads[i].size() != t.size())
      throw ShapeError("adam_step: gradient size mismatch for '" + named[i].first + "'");
    auto& values = t.mutable_values();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grads[i][j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

double clip_gradients(Gradients& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g) sq += x * x;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grads)
      for (double& x : g) x *= scale;
  }
  return norm;
}

// --- Plateau scheduler -------------------------------------------------------

PlateauScheduler::PlateauScheduler(double initial_lr, double factor, std::uint32_t patience,
                                   double min_lr)
    : lr_(initial_lr), factor_(factor), patience_(patience), min_lr_(min_lr), best_(0.0) {}

double PlateauScheduler::step(double validation_loss) {
  constexpr double kImprovement = 1e-4;
  if (!has_best_ || validation_loss < best_ - kImprovement) {
    best_ = validation_loss;
    has_best_ = true;
    bad_epochs_ = 0;
  } else {
    ++bad_epochs_;
    if (bad_epochs_ >= patience_) {
      lr_ = std::max(lr_ * factor_, min_lr_);
      bad_epochs_ = 0;
    }
  }
  return lr_;
}

// --- Logging --------------------------------------------------------------------

void write_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_train_log_csv: cannot open '" + path + "'");
  out << "epoch,train_total,train_anticipation,train_auxiliary,val_loss,val_ap,val_mtta,lr\n";
  char buf[256];
  for (const auto& e : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%u,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9g\n", e.epoch,
                  e.train_total, e.train_anticipation, e.train_auxiliary, e.val_loss, e.val_ap,
                  e.val_mtta, e.lr);
    out << buf;
  }
}

// --- Scoring ---------------------------------------------------------------------

std::vector<VideoScore> score_videos(const std::vector<VideoSample>& samples,
                                     const ModelParams& params, const ModelConfig& config) {
  std::vector<VideoScore> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) {
    auto pass = forward_video(s, params, config);
    VideoScore score;
    score.id = s.id;
    score.label = static_cast<int>(s.label);
    score.probs = pass.trace.prob;
    score.toa = s.toa;
    score.fps = s.fps > 0 ? static_cast<double>(s.fps) : config.default_fps;
    scores.push_back(std::move(score));
  }
  return scores;
}

// --- Training loop -----------------------------------------------------------------

namespace {

// Mean validation loss under the scalar formulas (no tape).
double validation_loss(const std::vector<VideoSample>& samples,
                       const std::vector<std::size_t>& indices, const ModelParams& params,
                       const ModelConfig& config, const LossConfig& loss_cfg) {
  if (indices.empty()) return 0.0;
  std::size_t positives = 0;
  for (std::size_t i : indices) positives += samples[i].label;
  const double alpha = resolve_alpha(loss_cfg, positives, indices.size());

  double acc = 0.0;
  for (std::size_t i : indices) {
    auto pass = forward_video(samples[i], params, config);
    auto breakdown = anticipation_loss(pass.trace, samples[i], loss_cfg, alpha);
    double total = breakdown.anticipation;
    if (config.ablation.temporal_fusion)
      total += loss_cfg.aux_weight * breakdown.auxiliary;
    acc += total;
  }
  return acc / static_cast<double>(indices.size());
}

}  // namespace

TrainResult train(const std::vector<VideoSample>& dataset, const ModelConfig& model_config,
                  const TrainConfig& config, const std::string& checkpoint_path,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  model_config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  std::size_t positives = 0;
  for (const auto& s : dataset) positives += s.label;
  if (positives == 0) throw std::invalid_argument("train: dataset has no positive videos");

  LossConfig loss_cfg = config.loss;
  loss_cfg.focal_enabled = model_config.ablation.focal;

  // Seeded split, stratified by label so the validation positive rate
  // tracks the dataset's.
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> pos_indices, neg_indices;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (dataset[i].label == 1 ? pos_indices : neg_indices).push_back(i);
  std::shuffle(pos_indices.begin(), pos_indices.end(), rng);
  std::shuffle(neg_indices.begin(), neg_indices.end(), rng);

  TrainResult result;
  result.config = model_config;
  for (auto* group : {&pos_indices, &neg_indices}) {
    const std::size_t val_count =
        static_cast<std::size_t>(std::lround(config.val_fraction * group->size()));
    for (std::size_t i = 0; i < group->size(); ++i)
      (i < val_count ? result.val_indices : result.train_indices).push_back((*group)[i]);
  }
  if (result.train_indices.empty())
    throw std::invalid_argument("train: no training videos left after the split");

  std::vector<VideoSample> val_samples;
  val_samples.reserve(result.val_indices.size());
  for (std::size_t i : result.val_indices) val_samples.push_back(dataset[i]);

  result.params = init_params(model_config, config.seed);
  AdamState adam;
  PlateauScheduler scheduler(config.learning_rate, config.plateau_factor,
                             config.plateau_patience, config.min_learning_rate);
  double lr = config.learning_rate;

  // The run's artifact is the best-validation-loss epoch, the same signal
  // the plateau schedule watches. Falls back to the last epoch when there
  // is no validation split.
  ModelParams best_params = result.params;
  double best_val_loss = 0.0;
  bool has_best = false;

  std::vector<std::size_t> order = result.train_indices;
  for (std::uint32_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_total = 0.0, epoch_an = 0.0, epoch_au = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);

      Tape tape;
      std::vector<ForwardPass> passes;
      std::vector<const VideoSample*> batch;
      passes.reserve(end - start);
      batch.reserve(end - start);
      for (std::size_t bi = start; bi < end; ++bi) {
        const VideoSample& sample = dataset[order[bi]];
        passes.push_back(forward_video(sample, result.params, model_config, &tape));
        batch.push_back(&sample);
      }
      Tensor total = batch_total_loss(passes, batch, loss_cfg,
                                      model_config.ablation.temporal_fusion);
      tape.backward(total);

      auto named = result.params.named_tensors();
      Gradients grads;
      grads.reserve(named.size());
      for (auto& [name, tensor] : named) grads.push_back(tape.gradient(*tensor));
      clip_gradients(grads, config.grad_clip_norm);
      adam_step(result.params, grads, adam, lr);

      // bookkeeping under the scalar path
      std::size_t batch_pos = 0;
      for (const auto* s : batch) batch_pos += s->label;
      const double alpha = resolve_alpha(loss_cfg, batch_pos, batch.size());
      double an = 0.0, au = 0.0;
      for (std::size_t i = 0; i < passes.size(); ++i) {
        auto breakdown = anticipation_loss(passes[i].trace, *batch[i], loss_cfg, alpha);
        an += breakdown.anticipation;
        au += breakdown.auxiliary;
      }
      an /= static_cast<double>(batch.size());
      au /= static_cast<double>(batch.size());
      const double batch_aux = model_config.ablation.temporal_fusion ? au : 0.0;
      epoch_an += an;
      epoch_au += batch_aux;
      epoch_total += an + loss_cfg.aux_weight * batch_aux;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_total = epoch_total / static_cast<double>(batches);
    stats.train_anticipation = epoch_an / static_cast<double>(batches);
    stats.train_auxiliary = epoch_au / static_cast<double>(batches);
    stats.lr = lr;

    stats.val_loss = validation_loss(dataset, result.val_indices, result.params, model_config,
                                     loss_cfg);
    if (!val_samples.empty()) {
      auto scores = score_videos(val_samples, result.params, model_config);
      bool has_positive = false;
      for (const auto& s : scores) has_positive = has_positive || s.label == 1;
      if (has_positive) {
        stats.val_ap = average_precision(scores);
        stats.val_mtta = mtta(scores);
      } else {
        stats.val_ap = std::nan("");
        stats.val_mtta = std::nan("");
      }
    }
    lr = scheduler.step(result.val_indices.empty() ? stats.train_total : stats.val_loss);

    if (!result.val_indices.empty() && (!has_best || stats.val_loss < best_val_loss)) {
      best_val_loss = stats.val_loss;
      has_best = true;
      auto named = result.params.named_tensors();
      auto best_named = best_params.named_tensors();
      for (std::size_t i = 0; i < named.size(); ++i)
        best_named[i].second->assign(named[i].second->values());
    }

    result.log.epochs.push_back(stats);
    if (!checkpoint_path.empty()) save_checkpoint(result.params, model_config, checkpoint_path);
    if (on_epoch) on_epoch(stats);
  }
  if (has_best) result.params = std::move(best_params);
  if (!checkpoint_path.empty()) save_checkpoint(result.params, model_config, checkpoint_path);
  return result;
}

// --- Run configuration ----------------------------------------------------------

ModelConfig RunOptions::model_config(std::uint32_t image_dim, std::uint32_t object_dim) const {
  ModelConfig mc;
  mc.image_dim = image_dim;
  mc.object_dim = object_dim;
  mc.max_objects = max_objects;
  mc.hidden_dim = hidden_dim;
  mc.attention_dim = attention_dim;
  mc.mlp_hidden_dim = mlp_hidden_dim;
  mc.fusion_dim = fusion_dim;
  mc.wavelet_mode = wavelet_mode;
  mc.threshold = threshold;
  for (const auto& name : disabled) apply_ablation(mc.ablation, name);
  return mc;
}

const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {
      "dwt",  "dwt-detail",      "dwt-approx",  "fusion",
      "obj-attn", "temporal-fusion", "time-weight", "focal"};
  return names;
}

void apply_ablation(AblationSwitches& switches, const std::string& name) {
  if (name == "dwt")
    switches.dwt = false;
  else if (name == "dwt-detail")
    switches.dwt_detail = false;
  else if (name == "dwt-approx")
    switches.dwt_approx = false;
  else if (name == "fusion")
    switches.fusion = false;
  else if (name == "obj-attn")
    switches.object_attention = false;
  else if (name == "temporal-fusion")
    switches.temporal_fusion = false;
  else if (name == "time-weight")
    switches.time_weight = false;
  else if (name == "focal")
    switches.focal = false;
  else
    throw ConfigError("unknown ablation name '" + name + "'");
}

namespace {

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': '" + value + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': '" + value + "'");
  }
}

}  // namespace

RunOptions parse_run_options(const std::string& text) {
  RunOptions opts;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments and whitespace
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                        line + "'");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));

    auto& t = opts.train;
    if (key == "epochs") t.epochs = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "batch_size") t.batch_size = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "learning_rate") t.learning_rate = parse_double(key, value);
    else if (key == "plateau_factor") t.plateau_factor = parse_double(key, value);
    else if (key == "plateau_patience")
      t.plateau_patience = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "min_learning_rate") t.min_learning_rate = parse_double(key, value);
    else if (key == "seed") t.seed = parse_uint(key, value);
    else if (key == "val_fraction") t.val_fraction = parse_double(key, value);
    else if (key == "grad_clip_norm") t.grad_clip_norm = parse_double(key, value);
    else if (key == "gamma") t.loss.gamma = parse_double(key, value);
    else if (key == "alpha_mode") {
      if (value == "fixed") t.loss.alpha_mode = AlphaMode::Fixed;
      else if (value == "dynamic") t.loss.alpha_mode = AlphaMode::DynamicBatch;
      else throw ConfigError("alpha_mode must be 'fixed' or 'dynamic', got '" + value + "'");
    } else if (key == "alpha") t.loss.alpha = parse_double(key, value);
    else if (key == "negative_weight") t.loss.negative_weight = parse_double(key, value);
    else if (key == "aux_weight") t.loss.aux_weight = parse_double(key, value);
    else if (key == "hidden_dim")
      opts.hidden_dim = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "attention_dim")
      opts.attention_dim = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "mlp_hidden_dim")
      opts.mlp_hidden_dim = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "fusion_dim")
      opts.fusion_dim = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "max_objects")
      opts.max_objects = static_cast<std::uint32_t>(parse_uint(key, value));
    else if (key == "wavelet_mode") {
      if (value == "paper") opts.wavelet_mode = WaveletMode::PaperExact;
      else if (value == "orthonormal") opts.wavelet_mode = WaveletMode::Orthonormal;
      else throw ConfigError("wavelet_mode must be 'paper' or 'orthonormal', got '" + value + "'");
    } else if (key == "threshold") opts.threshold = parse_double(key, value);
    else if (key == "disable") {
      opts.disabled = split_csv_list(value);
      AblationSwitches probe;  // validate the names now
      for (const auto& n : opts.disabled) apply_ablation(probe, n);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return opts;
}

RunOptions load_run_options(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_run_options: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_options(buffer.str());
}

}  // namespace roar
