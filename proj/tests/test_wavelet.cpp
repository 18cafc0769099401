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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "roar/wavelet.hpp"

using namespace roar;

namespace {

// Oracle: coefficients as brute-force inner products of the signal with the
// shifted taps, straight from the analysis sums.
void oracle_coeffs(const std::vector<double>& f, const WaveletFilter& filter,
                   std::vector<double>& ca, std::vector<double>& cd) {
  std::vector<double> padded = f;
  if (padded.size() % 2) padded.push_back(0.0);
  const std::size_t half = padded.size() / 2;
  ca.assign(half, 0.0);
  cd.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t n = 0; n < padded.size(); ++n) {
      const long shift = static_cast<long>(n) - 2 * static_cast<long>(k);
      if (shift == 0 || shift == 1) {
        ca[k] += padded[n] * filter.scaling[static_cast<std::size_t>(shift)];
        cd[k] += padded[n] * filter.wavelet[static_cast<std::size_t>(shift)];
      }
    }
  }
}

double sq_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace

TEST_SUITE_BEGIN("wavelet");

TEST_CASE("paper-exact filter taps") {
  auto f = WaveletFilter::haar(WaveletMode::PaperExact);
  CHECK(f.scaling == std::vector<double>{1.0, 1.0});
  CHECK(f.wavelet == std::vector<double>{1.0, -1.0});
  // orthogonality of the two taps, both modes
  for (auto mode : {WaveletMode::PaperExact, WaveletMode::Orthonormal}) {
    auto g = WaveletFilter::haar(mode);
    CHECK(g.scaling[0] * g.wavelet[0] + g.scaling[1] * g.wavelet[1] == doctest::Approx(0.0));
  }
}

TEST_CASE("decompose reference vectors") {
  auto filter = WaveletFilter::haar();
  auto c = haar_decompose(std::vector<double>{1, 2, 3, 4}, filter);
  CHECK(c.approx == std::vector<double>{3, 7});
  CHECK(c.detail == std::vector<double>{-1, -1});
  CHECK(c.combined == std::vector<double>{3, 7, -1, -1});

  auto flat = haar_decompose(std::vector<double>{5, 5}, filter);
  CHECK(flat.approx == std::vector<double>{10});
  CHECK(flat.detail == std::vector<double>{0});

  auto zero = haar_decompose(std::vector<double>{0, 0, 0, 0}, filter);
  CHECK(zero.approx == std::vector<double>{0, 0});
  CHECK(zero.detail == std::vector<double>{0, 0});

  CHECK_THROWS_AS(haar_decompose(std::vector<double>{}, filter), std::invalid_argument);
}

TEST_CASE("reconstruct reference vectors") {
  auto filter = WaveletFilter::haar();
  WaveletCoeffs c;
  c.approx = {3, 7};
  c.detail = {-1, -1};
  CHECK(haar_reconstruct(c, filter) == std::vector<double>{1, 2, 3, 4});

  WaveletCoeffs flat{{10}, {0}, {}};
  CHECK(haar_reconstruct(flat, filter) == std::vector<double>{5, 5});

  WaveletCoeffs zero{{0}, {0}, {}};
  CHECK(haar_reconstruct(zero, filter) == std::vector<double>{0, 0});

  WaveletCoeffs bad{{1, 2}, {1}, {}};
  CHECK_THROWS_AS(haar_reconstruct(bad, filter), std::invalid_argument);
}

TEST_CASE("coefficients equal brute-force inner products") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (auto mode : {WaveletMode::PaperExact, WaveletMode::Orthonormal}) {
    auto filter = WaveletFilter::haar(mode);
    for (std::size_t len : {2u, 5u, 8u, 17u, 64u}) {
      std::vector<double> f(len);
      for (auto& x : f) x = dist(rng);
      std::vector<double> ca, cd;
      oracle_coeffs(f, filter, ca, cd);
      auto got = haar_decompose(f, filter);
      CHECK(got.approx == ca);
      CHECK(got.detail == cd);
    }
  }
}

TEST_CASE("round trip is exact in paper mode and tight in orthonormal") {
  // Features enter the pipeline as 32-bit floats widened to 64-bit, so pair
  // sums and differences are exact in double; draw test vectors from that
  // grid. (Full-width doubles can round inside the analysis sums.)
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::uniform_int_distribution<std::size_t> len_dist(1, 32);
    const std::size_t len = 2 * len_dist(rng);
    std::vector<double> f(len);
    for (auto& x : f) x = static_cast<double>(static_cast<float>(dist(rng)));

    auto exact = haar_reconstruct(haar_decompose(f, WaveletFilter::haar()), WaveletFilter::haar());
    CHECK(exact == f);

    auto ortho_filter = WaveletFilter::haar(WaveletMode::Orthonormal);
    auto ortho = haar_reconstruct(haar_decompose(f, ortho_filter), ortho_filter);
    for (std::size_t i = 0; i < len; ++i)
      CHECK(std::fabs(ortho[i] - f[i]) <= 1e-12 * std::max(1.0, std::fabs(f[i])));
  }
}

TEST_CASE("orthonormal mode preserves energy") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  auto filter = WaveletFilter::haar(WaveletMode::Orthonormal);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> f(16);
    for (auto& x : f) x = dist(rng);
    auto c = haar_decompose(f, filter);
    CHECK(sq_norm(c.approx) + sq_norm(c.detail) == doctest::Approx(sq_norm(f)).epsilon(1e-9));
  }
}

TEST_CASE("decomposition is linear") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  auto filter = WaveletFilter::haar();
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> f(10), g(10), combo(10);
    const double a = dist(rng), b = dist(rng);
    for (std::size_t i = 0; i < 10; ++i) {
      f[i] = dist(rng);
      g[i] = dist(rng);
      combo[i] = a * f[i] + b * g[i];
    }
    auto cf = haar_decompose(f, filter);
    auto cg = haar_decompose(g, filter);
    auto cc = haar_decompose(combo, filter);
    for (std::size_t i = 0; i < cc.combined.size(); ++i)
      CHECK(std::fabs(cc.combined[i] - (a * cf.combined[i] + b * cg.combined[i])) <= 1e-12);
  }
}

TEST_CASE("odd lengths are zero-padded on the right") {
  auto filter = WaveletFilter::haar();
  auto c = haar_decompose(std::vector<double>{1, 2, 3}, filter);
  CHECK(c.approx == std::vector<double>{3, 3});
  CHECK(c.detail == std::vector<double>{-1, 3});
  CHECK(combined_length(3) == 4);
  CHECK(combined_length(4) == 4);
}

TEST_CASE("sequence decomposition works row by row") {
  auto filter = WaveletFilter::haar();
  auto single = dwt_sequence(std::vector<double>{1, 2, 3, 4}, 1, 4, filter);
  CHECK(single == std::vector<double>{3, 7, -1, -1});

  std::vector<double> two_rows = {1, 2, 3, 4, 1, 2, 3, 4};
  auto out = dwt_sequence(two_rows, 2, 4, filter);
  CHECK(std::vector<double>(out.begin(), out.begin() + 4) ==
        std::vector<double>(out.begin() + 4, out.end()));

  std::vector<double> zeros(12, 0.0);
  auto z = dwt_sequence(zeros, 3, 4, filter);
  for (double v : z) CHECK(v == 0.0);
}

TEST_SUITE_END();
