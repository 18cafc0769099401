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

#include "roar/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace roar {

void write_trace_csv(const std::vector<TraceSeries>& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open '" + path + "'");
  out << "video_id,frame,p,sigma,label,toa\n";
  char buf[256];
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.prob.size(); ++t) {
      const double sigma = t < s.sigma.size() ? s.sigma[t] : 0.0;
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.9f,%.9f,%d,%u\n", s.video_id.c_str(), t + 1,
                    s.prob[t], sigma, s.label, s.toa);
      out << buf;
    }
  }
}

std::vector<TraceSeries> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trace_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "video_id,frame,p,sigma,label,toa")
    throw std::runtime_error("read_trace_csv: malformed header in '" + path + "'");

  std::vector<TraceSeries> series;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, frame_s, p_s, sigma_s, label_s, toa_s;
    if (!std::getline(ss, id, ',') || !std::getline(ss, frame_s, ',') ||
        !std::getline(ss, p_s, ',') || !std::getline(ss, sigma_s, ',') ||
        !std::getline(ss, label_s, ',') || !std::getline(ss, toa_s))
      throw std::runtime_error("read_trace_csv: malformed row at line " +
                               std::to_string(line_no));
    try {
      const std::size_t frame = std::stoul(frame_s);
      const double p = std::stod(p_s);
      const double sigma = std::stod(sigma_s);
      const int label = std::stoi(label_s);
      const std::uint32_t toa = static_cast<std::uint32_t>(std::stoul(toa_s));

      auto [it, fresh] = index.try_emplace(id, series.size());
      if (fresh) {
        series.push_back({});
        series.back().video_id = id;
        series.back().label = label;
        series.back().toa = toa;
      }
      auto& s = series[it->second];
      if (s.prob.size() + 1 != frame)
        throw std::runtime_error("frames out of order for video '" + id + "'");
      s.prob.push_back(p);
      s.sigma.push_back(sigma);
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception&) {
      throw std::runtime_error("read_trace_csv: malformed row at line " +
                               std::to_string(line_no));
    }
  }
  if (series.empty()) throw std::runtime_error("read_trace_csv: no rows in '" + path + "'");
  return series;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_trace_svg(const TraceSeries& series, double threshold) {
  if (series.prob.empty()) throw std::invalid_argument("render_trace_svg: empty trace");

  constexpr double kWidth = 800.0, kHeight = 400.0, kMargin = 40.0;
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  const std::size_t frames = series.prob.size();

  auto x_of = [&](double frame) {  // 1-based frame
    return frames == 1 ? kMargin + plot_w / 2
                       : kMargin + plot_w * (frame - 1.0) / (static_cast<double>(frames) - 1.0);
  };
  auto y_of = [&](double p) { return kMargin + plot_h * (1.0 - p); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  // axes
  svg << "  <line class=\"axis\" x1=\"" << fmt(kMargin) << "\" y1=\"" << fmt(kMargin + plot_h)
      << "\" x2=\"" << fmt(kMargin + plot_w) << "\" y2=\"" << fmt(kMargin + plot_h)
      << "\" stroke=\"black\"/>\n";
  svg << "  <line class=\"axis\" x1=\"" << fmt(kMargin) << "\" y1=\"" << fmt(kMargin)
      << "\" x2=\"" << fmt(kMargin) << "\" y2=\"" << fmt(kMargin + plot_h)
      << "\" stroke=\"black\"/>\n";
  // threshold rule
  svg << "  <line class=\"threshold\" x1=\"" << fmt(kMargin) << "\" y1=\""
      << fmt(y_of(threshold)) << "\" x2=\"" << fmt(kMargin + plot_w) << "\" y2=\""
      << fmt(y_of(threshold)) << "\" stroke=\"crimson\" stroke-dasharray=\"6 3\"/>\n";
  // accident frame rule, positives only
  if (series.label == 1 && series.toa >= 1) {
    svg << "  <line class=\"toa\" x1=\"" << fmt(x_of(series.toa)) << "\" y1=\"" << fmt(kMargin)
        << "\" x2=\"" << fmt(x_of(series.toa)) << "\" y2=\"" << fmt(kMargin + plot_h)
        << "\" stroke=\"darkorange\" stroke-dasharray=\"4 4\"/>\n";
  }
  svg << "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t t = 0; t < frames; ++t) {
    if (t) svg << " ";
    svg << fmt(x_of(static_cast<double>(t + 1))) << "," << fmt(y_of(series.prob[t]));
  }
  svg << "\"/>\n";
  svg << "  <text x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kMargin - 10.0)
      << "\" font-family=\"monospace\" font-size=\"12\">" << series.video_id
      << (series.label == 1 ? " (positive)" : " (negative)") << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace roar
