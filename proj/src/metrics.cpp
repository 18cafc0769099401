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

#include "roar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace roar {

double VideoScore::max_prob() const {
  if (probs.empty()) throw std::invalid_argument("VideoScore: no probabilities");
  return *std::max_element(probs.begin(), probs.end());
}

std::optional<std::uint32_t> VideoScore::first_crossing(double threshold) const {
  for (std::size_t t = 0; t < probs.size(); ++t)
    if (probs[t] >= threshold) return static_cast<std::uint32_t>(t + 1);
  return std::nullopt;
}

namespace {

void check_threshold(double a) {
  if (a <= 0.0 || a >= 1.0)
    throw std::invalid_argument("threshold must lie in (0,1), got " + std::to_string(a));
}

// Distinct video scores, descending: the evaluation threshold grid.
std::vector<double> threshold_grid(std::span<const VideoScore> scores) {
  std::set<double> distinct;
  for (const auto& s : scores) distinct.insert(s.max_prob());
  return {distinct.rbegin(), distinct.rend()};
}

std::size_t count_positives(std::span<const VideoScore> scores) {
  std::size_t n = 0;
  for (const auto& s : scores) n += s.label == 1;
  return n;
}

double video_tta_seconds(const VideoScore& s, double threshold) {
  auto crossing = s.first_crossing(threshold);
  // callers only ask for true positives, which crossed by construction
  const double frames_early =
      static_cast<double>(s.toa) - static_cast<double>(crossing.value());
  return std::max(0.0, frames_early) / s.fps;
}

}  // namespace

ClassifyResult classify_at_threshold(std::span<const VideoScore> scores, double threshold) {
  check_threshold(threshold);
  if (scores.empty()) throw std::invalid_argument("classify_at_threshold: empty score list");

  ClassifyResult out;
  out.crossing.reserve(scores.size());
  for (const auto& s : scores) {
    const bool predicted = s.max_prob() >= threshold;
    out.crossing.push_back(predicted ? s.first_crossing(threshold) : std::nullopt);
    if (predicted)
      (s.label == 1 ? out.counts.tp : out.counts.fp)++;
    else
      (s.label == 1 ? out.counts.fn : out.counts.tn)++;
  }
  return out;
}

double average_precision(std::span<const VideoScore> scores, bool interpolated) {
  if (scores.empty()) throw std::invalid_argument("average_precision: empty score list");
  const std::size_t positives = count_positives(scores);
  if (positives == 0) throw UndefinedApError();

  // (recall, precision) per grid threshold; the grid is score values, so
  // every point has at least one predicted positive and precision is defined.
  struct Point {
    double recall, precision;
  };
  std::vector<Point> points;
  for (double a : threshold_grid(scores)) {
    std::size_t tp = 0, fp = 0;
    for (const auto& s : scores) {
      if (s.max_prob() < a) continue;
      (s.label == 1 ? tp : fp)++;
    }
    points.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                      static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  // descending thresholds give non-decreasing recall already
  if (interpolated) {
    double best = 0.0;
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
      best = std::max(best, it->precision);
      it->precision = best;
    }
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : points) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

std::optional<double> tta_at_threshold(std::span<const VideoScore> scores, double threshold) {
  check_threshold(threshold);
  double acc = 0.0;
  std::size_t tp = 0;
  for (const auto& s : scores) {
    if (s.label != 1 || s.max_prob() < threshold) continue;
    acc += video_tta_seconds(s, threshold);
    ++tp;
  }
  if (tp == 0) return std::nullopt;
  return acc / static_cast<double>(tp);
}

double mtta(std::span<const VideoScore> scores, bool count_empty_as_zero) {
  if (count_positives(scores) == 0)
    throw std::invalid_argument("mtta: no positive videos");
  double acc = 0.0;
  std::size_t used = 0;
  for (double a : threshold_grid(scores)) {
    std::size_t tp = 0;
    double tta = 0.0;
    for (const auto& s : scores) {
      if (s.label != 1 || s.max_prob() < a) continue;
      tta += video_tta_seconds(s, a);
      ++tp;
    }
    if (tp > 0) {
      acc += tta / static_cast<double>(tp);
      ++used;
    } else if (count_empty_as_zero) {
      ++used;
    }
  }
  return used == 0 ? 0.0 : acc / static_cast<double>(used);
}

RecallOperatingPoint tta_at_recall80(std::span<const VideoScore> scores) {
  const std::size_t positives = count_positives(scores);
  if (positives == 0) return {};

  RecallOperatingPoint out;
  // grid is descending; the first threshold reaching the bar is the largest
  for (double a : threshold_grid(scores)) {
    std::size_t tp = 0;
    for (const auto& s : scores)
      if (s.label == 1 && s.max_prob() >= a) ++tp;
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    if (recall >= 0.8) {
      out.reachable = true;
      out.threshold = a;
      double acc = 0.0;
      for (const auto& s : scores)
        if (s.label == 1 && s.max_prob() >= a) acc += video_tta_seconds(s, a);
      out.tta_seconds = acc / static_cast<double>(tp);
      return out;
    }
  }
  return out;
}

EvalReport evaluate(std::span<const VideoScore> scores, const EvalOptions& options) {
  if (scores.empty()) throw std::invalid_argument("evaluate: empty score list");

  EvalReport report;
  report.interpolated_ap = options.interpolated_ap;
  report.mtta_counts_empty_as_zero = options.mtta_counts_empty_as_zero;
  const std::size_t positives = count_positives(scores);

  for (double a : threshold_grid(scores)) {
    PrPoint point;
    point.threshold = a;
    for (const auto& s : scores) {
      const bool predicted = s.max_prob() >= a;
      if (predicted)
        (s.label == 1 ? point.counts.tp : point.counts.fp)++;
      else
        (s.label == 1 ? point.counts.fn : point.counts.tn)++;
    }
    const std::size_t denom = point.counts.tp + point.counts.fp;
    point.precision = denom ? static_cast<double>(point.counts.tp) / denom : 0.0;
    point.recall = positives ? static_cast<double>(point.counts.tp) / positives : 0.0;
    if (point.counts.tp > 0) {
      double acc = 0.0;
      for (const auto& s : scores)
        if (s.label == 1 && s.max_prob() >= a) acc += video_tta_seconds(s, a);
      point.tta_seconds = acc / static_cast<double>(point.counts.tp);
    }
    report.points.push_back(point);
  }
  report.ap = average_precision(scores, options.interpolated_ap);
  report.mtta_seconds = mtta(scores, options.mtta_counts_empty_as_zero);
  report.recall80 = tta_at_recall80(scores);
  return report;
}

void write_pr_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_pr_csv: cannot open '" + path + "'");
  out << "threshold,precision,recall,tta\n";
  char buf[160];
  for (const auto& p : report.points) {
    if (p.tta_seconds)
      std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.9f,%.9f\n", p.threshold, p.precision,
                    p.recall, *p.tta_seconds);
    else
      std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.9f,\n", p.threshold, p.precision, p.recall);
    out << buf;
  }
}

std::string summary_line(const EvalReport& report) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "AP=%.6f mTTA=%.6fs", report.ap, report.mtta_seconds);
  os << buf;
  if (report.recall80.reachable) {
    std::snprintf(buf, sizeof(buf), " TTA@R80=%.6fs", report.recall80.tta_seconds);
    os << buf;
  } else {
    os << " TTA@R80=unreachable";
  }
  return os.str();
}

}  // namespace roar
