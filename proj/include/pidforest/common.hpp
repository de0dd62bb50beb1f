/*
 * Copyright 2026 The pidforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace pidforest {

/// File could not be opened or read.
class io_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input does not match the expected column schema or document version.
class schema_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input is structurally readable but its content is invalid.
class data_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic random source. All distributions are implemented here so
/// that a given seed produces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Engine for an independent stream, e.g. one per tree.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed ^ (0x9e3779b97f4a7c15ULL + stream)));
  }

  std::uint64_t next() { return gen_(); }

  /// Unbiased draw from [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - unit();  // (0, 1]
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Shortest decimal form that parses back to the same double. Used wherever
/// output must be byte-reproducible.
std::string format_double(double v);

}  // namespace pidforest
