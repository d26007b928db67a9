// Copyright 2026 The qrstab authors
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

#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace qrstab {

// Deterministic RNG with a portable output sequence. std::mt19937 would do
// for the state stream, but the standard distributions are
// implementation-defined; byte-identical reports across toolchains require
// pinning the uniform->gaussian transform ourselves.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Uses one pair of uniforms per call and
  // discards the second variate to keep the stream position predictable.
  double next_gaussian() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Derive an independent stream, e.g. one per sampler trial.
  static SplitMix64 derive(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0x632be59bd9b4e019ULL + index * 0x9e3779b97f4a7c15ULL));
    return SplitMix64(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
};

// Complex vector uniform on the unit sphere of C^n.
inline Eigen::VectorXcd random_unit_complex(SplitMix64& rng, int n) {
  Eigen::VectorXcd u(n);
  for (int i = 0; i < n; ++i) {
    const double re = rng.next_gaussian();
    const double im = rng.next_gaussian();
    u(i) = std::complex<double>(re, im);
  }
  const double norm = u.norm();
  if (norm == 0.0) u(0) = 1.0;
  else u /= norm;
  return u;
}

}  // namespace qrstab
