//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_PIPELINE_SPLIT_H_
#define SCAFFKIT_PIPELINE_SPLIT_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "scaffkit/pipeline/assay.h"

namespace scaffkit::pipeline {

enum class Scheme { kRandomCvLite, kScaffold };
enum class Role : std::uint8_t { kTrain, kValid, kTest };

Scheme parse_scheme(const std::string &s);
const char *scheme_name(Scheme s);
const char *role_name(Role r);

struct SplitPlan {
  Scheme scheme;
  std::uint64_t seed;
  // roles[split][record]
  std::vector<std::vector<Role>> roles;
  // Scaffold grouping key of every record ("" for acyclic molecules).
  std::vector<std::string> scaffold_keys;

  std::size_t n_splits() const { return roles.size(); }
  std::vector<std::size_t> members(std::size_t split, Role role) const;
};

inline constexpr double kLargeBinFraction = 0.10;

// random_cv_lite: records are dealt into 5 folds after a seeded shuffle
// (actives and inactives separately, so each fold gets its share of both);
// split i tests fold i, validates on fold i - 1 mod 5 and trains on the
// rest. n_splits must be 5.
//
// scaffold: records are grouped by Bemis-Murcko scaffold; bins above 10%
// of the records always go to train; the others are shuffled with the
// split's seed, stable-sorted by descending size and each handed to the
// fold furthest below its 3:1:1 quota. Throws TooFewScaffolds when valid
// or test stays empty.
SplitPlan make_splits(const Assay &assay, Scheme scheme, std::size_t n_splits,
                      std::uint64_t seed);

// Throws std::logic_error when the 5 test folds of a random_cv_lite plan
// do not partition the records, or when a scaffold plan shares a scaffold
// between train and test (or holds a large bin outside train).
void check_plan(const SplitPlan &plan);

// CSV: id,scaffold,split0,split1,... with train/valid/test cells.
void write_plan(std::ostream &os, const Assay &assay, const SplitPlan &plan);

}  // namespace scaffkit::pipeline

#endif  // SCAFFKIT_PIPELINE_SPLIT_H_
