//
// Copyright 2026 The edPLS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "edpls/error.hpp"
#include "edpls/types.hpp"

namespace edpls {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic random stream identified by (seed, stream_id).
//
// Generator: counter-based SplitMix64. The stream key is
//   key = mix64(seed ^ mix64(stream_id + gamma))
// and draw i (i = 1, 2, ...) is mix64(key + i * gamma), gamma being the
// 64-bit golden-ratio constant. Uniform doubles take the top 53 bits.
// Normal deviates use the Box-Muller transform on two consecutive uniforms,
// returning the cosine branch first and the sine branch on the next call.
//
// Streams are never shared between tasks; derive() hands out independent
// child streams.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed),
        stream_id_(stream_id),
        key_(detail::mix64(seed ^
                           detail::mix64(stream_id + detail::kGoldenGamma))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Child stream with the same seed and a stream id mixed from `sub_id`.
  RngStream derive(std::uint64_t sub_id) const {
    return RngStream(seed_,
                     detail::mix64(stream_id_ * detail::kGoldenGamma ^
                                   detail::mix64(sub_id + 1)));
  }

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGoldenGamma);
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n) by rejection, so no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw ArgumentError("uniform_index: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the logarithm finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// `len` independent draws from Normal(0, sigma^2). sigma == 0 yields the zero
// vector without consuming the stream.
inline Vector gaussian_vector(Index len, double sigma, RngStream& rng) {
  if (len < 0) throw ArgumentError("gaussian_vector: negative length");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian_vector: sigma must be finite and >= 0, got " +
                        std::to_string(sigma));
  }
  Vector out = Vector::Zero(len);
  if (sigma == 0.0) return out;
  for (Index i = 0; i < len; ++i) out[i] = sigma * rng.normal();
  return out;
}

// Uniformly random permutation of 0..n-1 (Fisher-Yates, high to low).
inline std::vector<Index> random_permutation(Index n, RngStream& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(
        rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace edpls
