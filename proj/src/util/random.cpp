//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/util/random.h"

#include <cassert>
#include <limits>

#include "scaffkit/util/hash.h"

namespace scaffkit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return hash_combine(mix64(seed), stream);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return derive_seed(seed, fnv1a(stream));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  assert(n > 0);
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
                              - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0;
  for (double w: weights)
    total += w;
  assert(total > 0);

  const double u = uniform() * total;
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0)
      continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc)
      return i;
  }
  return last_positive;
}

}  // namespace scaffkit
