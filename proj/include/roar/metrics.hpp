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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roar {

/// One scored video: label, per-frame probabilities, accident frame (0 for
/// negatives) and frame rate. A video's detection score is max_t p_t.
struct VideoScore {
  std::string id;
  int label = 0;
  std::vector<double> probs;
  std::uint32_t toa = 0;
  double fps = 10.0;

  double max_prob() const;
  /// First 1-based frame with p >= threshold, if any.
  std::optional<std::uint32_t> first_crossing(double threshold) const;
};

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct ClassifyResult {
  Counts counts;
  /// Per input video: crossing frame when predicted positive, nullopt else.
  std::vector<std::optional<std::uint32_t>> crossing;
};

/// Video-level decisions at one threshold. Throws on an empty list or a
/// threshold outside (0,1).
ClassifyResult classify_at_threshold(std::span<const VideoScore> scores, double threshold);

/// Raised when AP is requested for a set with no positive videos.
class UndefinedApError : public std::runtime_error {
 public:
  UndefinedApError() : std::runtime_error("average precision undefined: no positive videos") {}
};

/// Area under the precision-recall curve, thresholds swept over the distinct
/// video scores, rectangular integration (optionally with the interpolated
/// precision envelope).
double average_precision(std::span<const VideoScore> scores, bool interpolated = false);

/// Mean (toa - crossing)/fps over true positives at the threshold, floored at
/// zero per video; nullopt when there are no true positives there.
std::optional<double> tta_at_threshold(std::span<const VideoScore> scores, double threshold);

/// Mean of tta_at_threshold over the distinct-score grid. Thresholds with no
/// true positives are skipped unless count_empty_as_zero is set.
double mtta(std::span<const VideoScore> scores, bool count_empty_as_zero = false);

struct RecallOperatingPoint {
  bool reachable = false;
  double threshold = 0.0;
  double tta_seconds = 0.0;
};

/// TTA at the largest threshold whose recall is at least 0.8; unreachable
/// marker when no threshold attains it.
RecallOperatingPoint tta_at_recall80(std::span<const VideoScore> scores);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> tta_seconds;
  Counts counts;
};

struct EvalReport {
  std::vector<PrPoint> points;  // threshold descending
  double ap = 0.0;
  double mtta_seconds = 0.0;
  RecallOperatingPoint recall80;
  bool interpolated_ap = false;
  bool mtta_counts_empty_as_zero = false;
};

struct EvalOptions {
  bool interpolated_ap = false;
  bool mtta_counts_empty_as_zero = false;
};

EvalReport evaluate(std::span<const VideoScore> scores, const EvalOptions& options = {});

/// One row per threshold: threshold, precision, recall, tta.
void write_pr_csv(const EvalReport& report, const std::string& path);

/// "AP=.. mTTA=..s TTA@R80=..s" — the summary line the CLI prints.
std::string summary_line(const EvalReport& report);

}  // namespace roar
