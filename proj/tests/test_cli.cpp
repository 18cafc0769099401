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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "roar/cli.hpp"
#include "roar/dataset.hpp"
#include "support/tmpdir.hpp"

using namespace roar;
using roar::testing::TempDir;
using roar::testing::slurp;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

// A small learnable dataset plus a trained checkpoint for the eval-side
// commands. Built once: training even a tiny model is the slow part.
struct Fixture {
  TempDir dir{"cli_fix"};
  std::string data = dir.file("data.roar");
  std::string config = dir.file("run.cfg");
  std::string ckpt = dir.file("model.ck");

  Fixture() {
    auto synth = run({"synth", "--out", data, "--videos", "24", "--positive-rate", "0.5",
                      "--seed", "5", "--frames", "10", "--d-img", "8", "--d-obj", "4",
                      "--objects", "2", "--ramp", "4"});
    REQUIRE(synth.code == kExitOk);
    std::ofstream cfg(config);
    cfg << "epochs=2\nbatch_size=6\nhidden_dim=8\nattention_dim=4\nmlp_hidden_dim=4\n"
           "fusion_dim=8\nseed=3\n";
    cfg.close();
    auto train = run({"train", "--data", data, "--config", config, "--out", ckpt});
    REQUIRE(train.code == kExitOk);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("synth is reproducible and echoes its config") {
  TempDir dir("cli_synth");
  const std::string a = dir.file("a.roar");
  const std::string b = dir.file("b.roar");
  auto args = [&](const std::string& path) {
    return std::vector<std::string>{"synth", "--out",  path, "--videos", "10",
                                    "--positive-rate", "0.5", "--seed",  "7",
                                    "--frames", "6", "--d-img", "4", "--d-obj", "2",
                                    "--objects", "2", "--ramp", "2"};
  };
  auto first = run(args(a));
  auto second = run(args(b));
  CHECK(first.code == kExitOk);
  CHECK(first.out.find("[config] command=synth") != std::string::npos);
  CHECK(first.out.find("seed=7") != std::string::npos);
  CHECK(first.out.find("checksum=") != std::string::npos);
  CHECK(slurp(a) == slurp(b));
  CHECK(read_dataset(a).size() == 10);
}

TEST_CASE("synth usage errors exit with the usage code") {
  TempDir dir("cli_synth_err");
  auto bad_rate = run({"synth", "--out", dir.file("x.roar"), "--videos", "5",
                       "--positive-rate", "1.5"});
  CHECK(bad_rate.code == kExitUsage);

  auto zero_videos = run({"synth", "--out", dir.file("y.roar"), "--videos", "0"});
  CHECK(zero_videos.code == kExitUsage);
  CHECK(zero_videos.err.find("zero videos") != std::string::npos);

  auto unknown = run({"synth", "--out", dir.file("z.roar"), "--videos", "5", "--warp", "9"});
  CHECK(unknown.code == kExitUsage);
}

TEST_CASE("train writes a checkpoint and a log") {
  auto& f = fixture();
  CHECK(std::ifstream(f.ckpt).good());
  CHECK(std::ifstream(f.ckpt + ".train.csv").good());
  CHECK(count_lines(f.ckpt + ".train.csv") == 3);  // header + 2 epochs
}

TEST_CASE("train rejects corrupt datasets with the data code") {
  TempDir dir("cli_badmagic");
  const std::string bad = dir.file("bad.roar");
  {
    std::ofstream out(bad, std::ios::binary);
    out << "XXXXXXXX" << std::string(64, '\0');
  }
  auto result = run({"train", "--data", bad, "--out", dir.file("m.ck")});
  CHECK(result.code == kExitData);
  CHECK(result.err.find("bad magic") != std::string::npos);
}

TEST_CASE("train rejects unknown config keys with the usage code") {
  auto& f = fixture();
  TempDir dir("cli_badcfg");
  const std::string cfg = dir.file("bad.cfg");
  {
    std::ofstream out(cfg);
    out << "learning_rat=0.1\n";
  }
  auto result = run({"train", "--data", f.data, "--config", cfg, "--out", dir.file("m.ck")});
  CHECK(result.code == kExitUsage);
  CHECK(result.err.find("learning_rat") != std::string::npos);
}

TEST_CASE("train reports missing inputs as data errors") {
  TempDir dir("cli_missing");
  auto result = run({"train", "--data", dir.file("nope.roar"), "--out", dir.file("m.ck")});
  CHECK(result.code == kExitData);
}

TEST_CASE("eval prints the metric summary and writes both CSVs") {
  auto& f = fixture();
  TempDir dir("cli_eval");
  const std::string pr = dir.file("pr.csv");
  const std::string traces = dir.file("traces.csv");
  auto result = run({"eval", "--checkpoint", f.ckpt, "--data", f.data, "--pr-out", pr,
                     "--trace-out", traces});
  CHECK(result.code == kExitOk);
  CHECK(result.out.find("AP=") != std::string::npos);
  CHECK(result.out.find("mTTA=") != std::string::npos);
  CHECK(result.out.find("TTA@R80=") != std::string::npos);
  CHECK(std::ifstream(pr).good());
  CHECK(count_lines(traces) == 24 * 10 + 1);
}

TEST_CASE("eval without positives is a data error") {
  auto& f = fixture();
  TempDir dir("cli_nopos");
  const std::string negs = dir.file("negs.roar");
  auto synth = run({"synth", "--out", negs, "--videos", "6", "--positive-rate", "0",
                    "--frames", "10", "--d-img", "8", "--d-obj", "4", "--objects", "2",
                    "--ramp", "4"});
  REQUIRE(synth.code == kExitOk);
  auto result = run({"eval", "--checkpoint", f.ckpt, "--data", negs});
  CHECK(result.code == kExitData);
  CHECK(result.err.find("undefined") != std::string::npos);
}

TEST_CASE("eval detects checkpoint/dataset dimension mismatches") {
  auto& f = fixture();
  TempDir dir("cli_mismatch");
  const std::string other = dir.file("wide.roar");
  auto synth = run({"synth", "--out", other, "--videos", "4", "--frames", "6", "--d-img",
                    "12", "--d-obj", "4", "--objects", "2", "--ramp", "2"});
  REQUIRE(synth.code == kExitOk);
  auto result = run({"eval", "--checkpoint", f.ckpt, "--data", other});
  CHECK(result.code == kExitData);
  CHECK(result.err.find("mismatch") != std::string::npos);
}

TEST_CASE("noise sweep emits the baseline row plus one per variance") {
  auto& f = fixture();
  TempDir dir("cli_sweep");
  const std::string csv = dir.file("sweep.csv");
  auto result = run({"noise-sweep", "--checkpoint", f.ckpt, "--data", f.data, "--variances",
                     "0.1,0.5", "--seed", "9", "--out", csv});
  CHECK(result.code == kExitOk);
  CHECK(count_lines(csv) == 1 + 1 + 2);  // header, clean, two variances

  // a zero variance in the list reproduces the clean row bit for bit
  const std::string csv0 = dir.file("sweep0.csv");
  auto with_zero = run({"noise-sweep", "--checkpoint", f.ckpt, "--data", f.data,
                        "--variances", "0", "--seed", "9", "--out", csv0});
  CHECK(with_zero.code == kExitOk);
  std::ifstream in(csv0);
  std::string header, clean, zero;
  std::getline(in, header);
  std::getline(in, clean);
  std::getline(in, zero);
  CHECK(clean.substr(1) == zero.substr(1));  // identical metrics after the variance column

  auto negative = run({"noise-sweep", "--checkpoint", f.ckpt, "--data", f.data,
                       "--variances", "-1"});
  CHECK(negative.code == kExitUsage);
}

TEST_CASE("ablate trains each requested variant into a table") {
  auto& f = fixture();
  TempDir dir("cli_ablate");
  const std::string csv = dir.file("ablation.csv");
  auto result = run({"ablate", "--data", f.data, "--config", f.config, "--disable",
                     "dwt,focal", "--out", csv});
  CHECK(result.code == kExitOk);
  CHECK(count_lines(csv) == 1 + 1 + 2);  // header, full, two variants

  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "variant,ap,mtta");
  std::getline(in, line);
  CHECK(line.rfind("full,", 0) == 0);

  auto unknown = run({"ablate", "--data", f.data, "--disable", "warp"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("warp") != std::string::npos);
}

TEST_CASE("plot renders a deterministic SVG with the expected rules") {
  auto& f = fixture();
  TempDir dir("cli_plot");
  const std::string traces = dir.file("traces.csv");
  auto eval_result = run({"eval", "--checkpoint", f.ckpt, "--data", f.data, "--pr-out",
                          dir.file("pr.csv"), "--trace-out", traces});
  REQUIRE(eval_result.code == kExitOk);

  auto samples = read_dataset(f.data);
  std::string positive_id, negative_id;
  for (const auto& s : samples) {
    if (s.label == 1 && positive_id.empty()) positive_id = s.id;
    if (s.label == 0 && negative_id.empty()) negative_id = s.id;
  }
  REQUIRE(!positive_id.empty());
  REQUIRE(!negative_id.empty());

  const std::string pos_svg = dir.file("pos.svg");
  auto pos = run({"plot", "--trace", traces, "--out", pos_svg, "--video", positive_id});
  CHECK(pos.code == kExitOk);
  const std::string pos_content(slurp(pos_svg).data(), slurp(pos_svg).size());
  CHECK(pos_content.find("<polyline") != std::string::npos);
  CHECK(pos_content.find("class=\"threshold\"") != std::string::npos);
  CHECK(pos_content.find("class=\"toa\"") != std::string::npos);

  const std::string neg_svg = dir.file("neg.svg");
  auto neg = run({"plot", "--trace", traces, "--out", neg_svg, "--video", negative_id});
  CHECK(neg.code == kExitOk);
  const std::string neg_content(slurp(neg_svg).data(), slurp(neg_svg).size());
  CHECK(neg_content.find("class=\"toa\"") == std::string::npos);

  const std::string again = dir.file("pos2.svg");
  run({"plot", "--trace", traces, "--out", again, "--video", positive_id});
  CHECK(slurp(pos_svg) == slurp(again));

  auto missing = run({"plot", "--trace", traces, "--out", dir.file("x.svg"), "--video",
                      "no-such-video"});
  CHECK(missing.code == kExitData);
}

TEST_CASE("unknown subcommands and missing flags are usage errors") {
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"synth"}).code == kExitUsage);  // --out and --videos are required
  CHECK(run({}).code == kExitUsage);
}

TEST_SUITE_END();
