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
#include <string>
#include <vector>

namespace roar {

/// One video's probability timeline as written to / read from trace CSVs.
struct TraceSeries {
  std::string video_id;
  int label = 0;
  std::uint32_t toa = 0;
  std::vector<double> prob;   // indexed by frame, 1-based in the file
  std::vector<double> sigma;
};

/// Columns: video_id,frame,p,sigma,label,toa. Frames are 1-based.
void write_trace_csv(const std::vector<TraceSeries>& series, const std::string& path);
std::vector<TraceSeries> read_trace_csv(const std::string& path);

/// Probability-vs-frame polyline with a horizontal threshold rule and, for
/// positive videos, a vertical rule at the accident frame. Text-only SVG,
/// byte-identical for identical input.
std::string render_trace_svg(const TraceSeries& series, double threshold);

}  // namespace roar
