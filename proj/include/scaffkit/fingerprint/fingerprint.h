//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_FINGERPRINT_FINGERPRINT_H_
#define SCAFFKIT_FINGERPRINT_FINGERPRINT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scaffkit/chem/mol_graph.h"

namespace scaffkit::fp {

inline constexpr std::uint32_t kDefaultBits = 1024;
inline constexpr std::uint32_t kDefaultRadius = 2;

// Fixed-width bit vector.
class Fingerprint {
public:
  Fingerprint(): Fingerprint(kDefaultBits, kDefaultRadius) { }
  Fingerprint(std::uint32_t nbits, std::uint32_t radius);

  std::uint32_t nbits() const { return nbits_; }
  std::uint32_t radius() const { return radius_; }

  void set(std::uint32_t bit) { words_[bit >> 6] |= 1ULL << (bit & 63); }
  bool test(std::uint32_t bit) const {
    return (words_[bit >> 6] >> (bit & 63)) & 1ULL;
  }
  std::uint32_t popcount() const;
  std::vector<std::uint32_t> on_bits() const;
  const std::vector<std::uint64_t> &words() const { return words_; }

  // nbits/4 hex digits; digit k holds bits [4k, 4k+4) with bit 4k as the
  // least significant bit of the digit.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex,
                              std::uint32_t radius = kDefaultRadius);

  bool operator==(const Fingerprint &) const = default;

private:
  std::uint32_t nbits_;
  std::uint32_t radius_;
  std::vector<std::uint64_t> words_;
};

// Unfolded circular-environment identifiers, one per unique environment
// (duplicate bond sets are dropped as in ECFP), sorted and deduplicated.
std::vector<std::uint64_t> circular_identifiers(const chem::MolGraph &mol,
                                                std::uint32_t radius);

// ECFP-style fingerprint: identifiers folded modulo nbits. nbits must be a
// power of two and at least 8 (std::invalid_argument otherwise).
Fingerprint ecfp(const chem::MolGraph &mol,
                 std::uint32_t radius = kDefaultRadius,
                 std::uint32_t nbits = kDefaultBits);

// The empty scaffold maps to the all-zero fingerprint.
Fingerprint ecfp(const std::optional<chem::MolGraph> &mol,
                 std::uint32_t radius = kDefaultRadius,
                 std::uint32_t nbits = kDefaultBits);

// |x & y| / |x | y|. Two all-zero fingerprints are identical (1.0); an
// all-zero fingerprint against a nonzero one scores 0.0. Throws
// WidthMismatch when the widths differ.
double tanimoto(const Fingerprint &x, const Fingerprint &y);

// Cache files: one "<id>,<hex>" line per fingerprint.
void write_fingerprint_cache(
    std::ostream &os,
    const std::vector<std::pair<std::string, Fingerprint>> &entries);
std::vector<std::pair<std::string, Fingerprint>>
read_fingerprint_cache(std::istream &is, std::uint32_t radius = kDefaultRadius);

}  // namespace scaffkit::fp

#endif  // SCAFFKIT_FINGERPRINT_FINGERPRINT_H_
