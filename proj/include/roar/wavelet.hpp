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

#include <cstddef>
#include <span>
#include <vector>

namespace roar {

/// Filter normalisation. PaperExact keeps integer Haar taps [1,1] / [1,-1];
/// Orthonormal scales both by 1/sqrt(2) so the transform preserves energy.
enum class WaveletMode { PaperExact, Orthonormal };

struct WaveletFilter {
  std::vector<double> scaling;  // low-pass taps
  std::vector<double> wavelet;  // high-pass taps
  WaveletMode mode = WaveletMode::PaperExact;

  static WaveletFilter haar(WaveletMode mode = WaveletMode::PaperExact);
};

struct WaveletCoeffs {
  std::vector<double> approx;    // cA, length ceil(D/2)
  std::vector<double> detail;    // cD, same length
  std::vector<double> combined;  // approx followed by detail
};

/// One-level decomposition of a signal by inner products with the shifted
/// filter taps. Odd-length inputs are zero-padded on the right to the next
/// even length. Throws std::invalid_argument on an empty input.
WaveletCoeffs haar_decompose(std::span<const double> signal, const WaveletFilter& filter);

/// Inverse of haar_decompose; exact for the integer taps, within rounding in
/// orthonormal mode. Throws std::invalid_argument when approx and detail
/// lengths disagree.
std::vector<double> haar_reconstruct(const WaveletCoeffs& coeffs, const WaveletFilter& filter);

/// Length of the combined coefficient vector for an input of length dim.
std::size_t combined_length(std::size_t dim);

/// Row-by-row decomposition of a frames x dim matrix (row-major). Each output
/// row is the combined coefficient vector of the matching input row.
std::vector<double> dwt_sequence(std::span<const double> rows, std::size_t frames,
                                 std::size_t dim, const WaveletFilter& filter);

}  // namespace roar
