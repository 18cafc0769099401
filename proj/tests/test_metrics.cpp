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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "roar/metrics.hpp"

using namespace roar;

namespace {

VideoScore flat(const std::string& id, int label, double score, std::uint32_t toa = 0,
                double fps = 10.0) {
  VideoScore s;
  s.id = id;
  s.label = label;
  s.probs = {score};
  s.toa = toa;
  s.fps = fps;
  return s;
}

// Exhaustive oracle: enumerate every distinct score as a threshold, compute
// the (recall, precision) points ascending in recall, rectangular sum.
double oracle_ap(const std::vector<VideoScore>& scores) {
  std::size_t total_pos = 0;
  for (const auto& s : scores) total_pos += s.label == 1;
  std::set<double> grid;
  for (const auto& s : scores) grid.insert(s.max_prob());

  double ap = 0.0, prev_recall = 0.0;
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    std::size_t tp = 0, fp = 0;
    for (const auto& s : scores)
      if (s.max_prob() >= *it) (s.label == 1 ? tp : fp)++;
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

std::vector<VideoScore> random_scores(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> count_dist(2, 32);
  std::uniform_real_distribution<double> p_dist(0.01, 0.99);
  std::uniform_int_distribution<int> label_dist(0, 1);
  std::uniform_int_distribution<int> dup_dist(0, 3);
  std::vector<VideoScore> scores;
  const std::size_t n = count_dist(rng);
  bool has_pos = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = label_dist(rng);
    has_pos = has_pos || label == 1;
    // duplicate scores now and then to exercise ties
    const double p = dup_dist(rng) == 0 && !scores.empty() ? scores.back().max_prob()
                                                           : p_dist(rng);
    scores.push_back(flat("v" + std::to_string(i), label, p, label ? 5 : 0));
  }
  if (!has_pos) scores[0].label = 1, scores[0].toa = 5;
  return scores;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("classification at a threshold") {
  std::vector<VideoScore> scores = {
      flat("tp", 1, 0.9, 1),
      flat("tn", 0, 0.4),
      flat("fn", 1, 0.4, 1),
  };
  auto result = classify_at_threshold(scores, 0.5);
  CHECK(result.counts.tp == 1);
  CHECK(result.counts.tn == 1);
  CHECK(result.counts.fn == 1);
  CHECK(result.counts.fp == 0);
  CHECK(result.crossing[0].value() == 1);
  CHECK(!result.crossing[1].has_value());
  CHECK(!result.crossing[2].has_value());

  CHECK_THROWS_AS(classify_at_threshold({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(classify_at_threshold(scores, 1.0), std::invalid_argument);
}

TEST_CASE("perfect separation scores AP 1") {
  std::vector<VideoScore> scores = {flat("p", 1, 0.9, 1), flat("n", 0, 0.1)};
  CHECK(average_precision(scores) == 1.0);
}

TEST_CASE("three-video worked example") {
  std::vector<VideoScore> scores = {
      flat("A", 1, 0.8, 1),
      flat("B", 0, 0.9),
      flat("C", 1, 0.6, 1),
  };
  const double expected = 0.5 * 0.5 + 0.5 * (2.0 / 3.0);
  CHECK(average_precision(scores) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(average_precision(scores) == doctest::Approx(0.5833333333).epsilon(1e-9));
  CHECK(average_precision(scores) == oracle_ap(scores));
}

TEST_CASE("all-tied scores give the positive fraction") {
  std::vector<VideoScore> scores = {
      flat("a", 1, 0.5, 1),
      flat("b", 0, 0.5),
      flat("c", 1, 0.5, 1),
      flat("d", 0, 0.5),
  };
  CHECK(average_precision(scores) == 0.5);
}

TEST_CASE("AP requires at least one positive") {
  std::vector<VideoScore> scores = {flat("a", 0, 0.5), flat("b", 0, 0.7)};
  CHECK_THROWS_AS(average_precision(scores), UndefinedApError);
}

TEST_CASE("AP equals the exhaustive oracle on random sets") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    auto scores = random_scores(rng);
    CHECK(average_precision(scores) == oracle_ap(scores));
  }
}

TEST_CASE("recall never increases with the threshold, precision stays in range") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    auto scores = random_scores(rng);
    auto report = evaluate(scores);
    for (const auto& point : report.points) {
      CHECK(point.precision >= 0.0);
      CHECK(point.precision <= 1.0);
    }
    std::vector<PrPoint> by_threshold = report.points;
    std::sort(by_threshold.begin(), by_threshold.end(),
              [](const PrPoint& a, const PrPoint& b) { return a.threshold < b.threshold; });
    for (std::size_t i = 1; i < by_threshold.size(); ++i)
      CHECK(by_threshold[i].recall <= by_threshold[i - 1].recall);
  }
}

TEST_CASE("AP is a rank statistic") {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < 20; ++rep) {
    auto scores = random_scores(rng);
    auto transformed = scores;
    for (auto& s : transformed)
      for (auto& p : s.probs) p = std::sqrt(p);  // strictly increasing on (0,1)
    CHECK(average_precision(scores) == average_precision(transformed));
  }
}

TEST_CASE("TTA at a threshold") {
  VideoScore ramp;
  ramp.id = "ramp";
  ramp.label = 1;
  ramp.probs = {0.1, 0.4, 0.6, 0.9};
  ramp.toa = 4;
  ramp.fps = 10.0;
  auto tta = tta_at_threshold(std::vector<VideoScore>{ramp}, 0.5);
  CHECK(tta.value() == doctest::Approx(0.1).epsilon(1e-12));

  // crossing after the accident floors at zero
  VideoScore late;
  late.id = "late";
  late.label = 1;
  late.probs = {0.1, 0.1, 0.1, 0.1, 0.9};
  late.toa = 4;
  late.fps = 10.0;
  CHECK(tta_at_threshold(std::vector<VideoScore>{late}, 0.5).value() == 0.0);

  // two true positives average
  VideoScore a = late, b = late;
  a.probs = {0.9, 0.1};
  a.toa = 11;
  a.id = "a";  // crossing 1, tta 1.0
  b.probs = {0.9, 0.1};
  b.toa = 21;
  b.id = "b";  // crossing 1, tta 2.0
  CHECK(tta_at_threshold(std::vector<VideoScore>{a, b}, 0.5).value() ==
        doctest::Approx(1.5).epsilon(1e-12));

  // no true positives -> empty marker
  VideoScore weak = flat("w", 1, 0.2, 1);
  CHECK(!tta_at_threshold(std::vector<VideoScore>{weak}, 0.5).has_value());
}

TEST_CASE("per-video TTA ignores probabilities after the crossing") {
  VideoScore head;
  head.id = "h";
  head.label = 1;
  head.probs = {0.1, 0.7, 0.2, 0.3};
  head.toa = 4;
  head.fps = 10.0;
  auto tail_changed = head;
  tail_changed.probs = {0.1, 0.7, 0.65, 0.1};
  CHECK(tta_at_threshold(std::vector<VideoScore>{head}, 0.5).value() ==
        tta_at_threshold(std::vector<VideoScore>{tail_changed}, 0.5).value());
}

TEST_CASE("mTTA over the distinct-score grid") {
  // grid {0.8, 0.6}: at 0.8 only A counts with 1.0 s; at 0.6 A and B average 3.0 s
  VideoScore a;
  a.id = "a";
  a.label = 1;
  a.toa = 21;
  a.fps = 10.0;
  a.probs.assign(21, 0.0);
  for (std::size_t t = 0; t < 21; ++t) a.probs[t] = t < 10 ? 0.6 : 0.8;
  // crossing(0.8)=frame 11 -> (21-11)/10 = 1.0 s; crossing(0.6)=frame 1 -> 2.0 s

  VideoScore b;
  b.id = "b";
  b.label = 1;
  b.toa = 41;
  b.fps = 10.0;
  b.probs.assign(41, 0.6);  // crossing(0.6)=1 -> 4.0 s, never reaches 0.8

  std::vector<VideoScore> scores{a, b};
  CHECK(tta_at_threshold(scores, 0.7).value() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tta_at_threshold(scores, 0.6).value() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(mtta(scores) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mTTA of an early ramp approaches the full window") {
  VideoScore pos;
  pos.id = "p";
  pos.label = 1;
  pos.toa = 10;
  pos.fps = 10.0;
  pos.probs = {0.2, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95};
  VideoScore neg = flat("n", 0, 0.1);
  std::vector<VideoScore> scores{pos, neg};
  // grid {0.95, 0.1}: crossings at frames 2 and 1 -> 0.8 s and 0.9 s
  CHECK(mtta(scores) == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(std::fabs(mtta(scores) - 0.9) <= 0.1);  // close to (toa-1)/fps
}

TEST_CASE("crossing exactly at the accident gives zero mTTA") {
  VideoScore pos;
  pos.id = "p";
  pos.label = 1;
  pos.toa = 5;
  pos.fps = 10.0;
  pos.probs = {0.1, 0.1, 0.1, 0.1, 0.9};
  CHECK(mtta(std::vector<VideoScore>{pos}) == 0.0);
}

TEST_CASE("mTTA empty-threshold handling modes") {
  // one strong positive, one weak: at the top threshold the weak one is the
  // only... construct a grid point with zero TP via a high-scoring negative
  VideoScore neg = flat("n", 0, 0.9);
  VideoScore pos;
  pos.id = "p";
  pos.label = 1;
  pos.toa = 11;
  pos.fps = 10.0;
  pos.probs.assign(11, 0.5);  // crossing(0.5)=1 -> 1.0 s
  std::vector<VideoScore> scores{neg, pos};
  // grid {0.9, 0.5}: at 0.9 zero TP (skipped), at 0.5 tta = 1.0
  CHECK(mtta(scores) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mtta(scores, true) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("TTA at eighty percent recall") {
  // five positives, descending scores; recall 0.8 first met at the 4th score
  std::vector<VideoScore> scores;
  const double toas[] = {11, 11, 11, 11, 11};
  const double vals[] = {0.9, 0.85, 0.8, 0.75, 0.7};
  for (int i = 0; i < 5; ++i) {
    VideoScore s;
    s.id = "p" + std::to_string(i);
    s.label = 1;
    s.toa = static_cast<std::uint32_t>(toas[i]);
    s.fps = 10.0;
    s.probs.assign(11, vals[i]);  // crossing at frame 1 whenever counted
    scores.push_back(s);
  }
  scores.push_back(flat("n", 0, 0.2));
  auto r80 = tta_at_recall80(scores);
  CHECK(r80.reachable);
  CHECK(r80.threshold == 0.75);
  CHECK(r80.tta_seconds == doctest::Approx(1.0).epsilon(1e-12));

  // no positives at all: the marker stays unreachable
  std::vector<VideoScore> negatives{flat("n1", 0, 0.4), flat("n2", 0, 0.6)};
  CHECK(!tta_at_recall80(negatives).reachable);
}

TEST_CASE("report invariants hold on random sets") {
  std::mt19937_64 rng(107);
  for (int rep = 0; rep < 20; ++rep) {
    auto scores = random_scores(rng);
    auto report = evaluate(scores);
    CHECK(report.ap >= 0.0);
    CHECK(report.ap <= 1.0);
    for (const auto& point : report.points) {
      if (!point.tta_seconds) continue;
      CHECK(*point.tta_seconds >= 0.0);
      // every per-video TTA is at most (toa-1)/fps; the mean inherits the max
      double bound = 0.0;
      for (const auto& s : scores)
        if (s.label == 1)
          bound = std::max(bound, (static_cast<double>(s.toa) - 1.0) / s.fps);
      CHECK(*point.tta_seconds <= bound + 1e-12);
    }
  }
}

TEST_SUITE_END();
