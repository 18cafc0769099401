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

#include "roar/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace roar {

WaveletFilter WaveletFilter::haar(WaveletMode mode) {
  if (mode == WaveletMode::Orthonormal) {
    const double s = 1.0 / std::sqrt(2.0);
    return {{s, s}, {s, -s}, mode};
  }
  return {{1.0, 1.0}, {1.0, -1.0}, mode};
}

std::size_t combined_length(std::size_t dim) { return dim + (dim % 2); }

WaveletCoeffs haar_decompose(std::span<const double> signal, const WaveletFilter& filter) {
  if (signal.empty()) throw std::invalid_argument("haar_decompose: empty input");

  const std::size_t taps = filter.scaling.size();
  const std::size_t padded = combined_length(signal.size());
  const std::size_t half = padded / 2;

  WaveletCoeffs out;
  out.approx.assign(half, 0.0);
  out.detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const std::size_t n = 2 * k + j;
      const double f = n < signal.size() ? signal[n] : 0.0;  // right zero-pad
      a += f * filter.scaling[j];
      d += f * filter.wavelet[j];
    }
    out.approx[k] = a;
    out.detail[k] = d;
  }
  out.combined.reserve(padded);
  out.combined.insert(out.combined.end(), out.approx.begin(), out.approx.end());
  out.combined.insert(out.combined.end(), out.detail.begin(), out.detail.end());
  return out;
}

std::vector<double> haar_reconstruct(const WaveletCoeffs& coeffs, const WaveletFilter& filter) {
  if (coeffs.approx.size() != coeffs.detail.size())
    throw std::invalid_argument("haar_reconstruct: approx/detail lengths disagree: " +
                                std::to_string(coeffs.approx.size()) + " vs " +
                                std::to_string(coeffs.detail.size()));

  // For orthogonal 2-tap filters the even/odd samples solve the 2x2 system
  // of the analysis inner products directly.
  std::vector<double> signal(coeffs.approx.size() * 2, 0.0);
  for (std::size_t k = 0; k < coeffs.approx.size(); ++k) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double num = coeffs.approx[k] * filter.scaling[j] + coeffs.detail[k] * filter.wavelet[j];
      const double den = filter.scaling[j] * filter.scaling[j] +
                         filter.wavelet[j] * filter.wavelet[j];
      signal[2 * k + j] = num / den;
    }
  }
  return signal;
}

std::vector<double> dwt_sequence(std::span<const double> rows, std::size_t frames,
                                 std::size_t dim, const WaveletFilter& filter) {
  if (rows.size() != frames * dim)
    throw std::invalid_argument("dwt_sequence: buffer size does not match frames x dim");
  const std::size_t out_dim = combined_length(dim);
  std::vector<double> out(frames * out_dim);
  for (std::size_t t = 0; t < frames; ++t) {
    auto coeffs = haar_decompose(rows.subspan(t * dim, dim), filter);
    std::copy(coeffs.combined.begin(), coeffs.combined.end(), out.begin() + t * out_dim);
  }
  return out;
}

}  // namespace roar
