//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/pipeline/split.h"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "scaffkit/chem/scaffold.h"
#include "scaffkit/error.h"
#include "scaffkit/util/random.h"

namespace scaffkit::pipeline {

Scheme parse_scheme(const std::string &s) {
  if (s == "random" || s == "random_cv_lite")
    return Scheme::kRandomCvLite;
  if (s == "scaffold")
    return Scheme::kScaffold;
  throw ConfigError("unknown split scheme '" + s + "'");
}

const char *scheme_name(Scheme s) {
  return s == Scheme::kRandomCvLite ? "random_cv_lite" : "scaffold";
}

const char *role_name(Role r) {
  switch (r) {
  case Role::kTrain:
    return "train";
  case Role::kValid:
    return "valid";
  case Role::kTest:
    return "test";
  }
  return "?";
}

std::vector<std::size_t> SplitPlan::members(std::size_t split, Role role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles[split].size(); ++i)
    if (roles[split][i] == role)
      out.push_back(i);
  return out;
}

namespace {

constexpr std::size_t kFolds = 5;

std::vector<std::vector<Role>> random_cv_lite(const Assay &assay, std::uint64_t seed) {
  const std::size_t n = assay.records.size();
  std::vector<std::size_t> fold(n);
  Rng rng(derive_seed(seed, "random_cv_lite"));
  std::vector<std::size_t> actives, inactives;
  for (std::size_t i = 0; i < n; ++i)
    (assay.records[i].label == 1 ? actives : inactives).push_back(i);
  rng.shuffle(actives);
  rng.shuffle(inactives);
  // Inactives continue the deal where the actives stopped so fold sizes
  // differ by at most one.
  std::size_t next = 0;
  for (auto i: actives)
    fold[i] = next++ % kFolds;
  for (auto i: inactives)
    fold[i] = next++ % kFolds;

  std::vector<std::vector<Role>> roles(kFolds, std::vector<Role>(n, Role::kTrain));
  for (std::size_t s = 0; s < kFolds; ++s) {
    const std::size_t valid = (s + kFolds - 1) % kFolds;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold[i] == s)
        roles[s][i] = Role::kTest;
      else if (fold[i] == valid)
        roles[s][i] = Role::kValid;
    }
  }
  return roles;
}

std::vector<Role> scaffold_split(const std::vector<std::string> &keys,
                                 std::uint64_t seed) {
  const std::size_t n = keys.size();
  std::map<std::string, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < n; ++i)
    bins[keys[i]].push_back(i);

  std::vector<Role> roles(n, Role::kTrain);
  const double quota[3] = { 0.6 * n, 0.2 * n, 0.2 * n };
  double filled[3] = { 0.0, 0.0, 0.0 };
  std::vector<const std::vector<std::size_t> *> small;
  for (const auto &[key, members]: bins) {
    if (static_cast<double>(members.size()) > kLargeBinFraction * n)
      filled[0] += static_cast<double>(members.size());
    else
      small.push_back(&members);
  }

  Rng rng(seed);
  rng.shuffle(small);
  std::stable_sort(small.begin(), small.end(),
                   [](const auto *a, const auto *b) { return a->size() > b->size(); });
  for (const auto *members: small) {
    // Fold with the largest unfilled share of its quota; earlier folds win
    // ties.
    int best = 0;
    double best_gap = -1e300;
    for (int f = 0; f < 3; ++f) {
      const double gap = (quota[f] - filled[f]) / quota[f];
      if (gap > best_gap) {
        best_gap = gap;
        best = f;
      }
    }
    filled[best] += static_cast<double>(members->size());
    for (auto i: *members)
      roles[i] = static_cast<Role>(best);
  }
  if (filled[1] == 0.0 || filled[2] == 0.0)
    throw TooFewScaffolds("only " + std::to_string(small.size())
                          + " scaffold bins below the 10% cap; cannot fill valid and test");
  return roles;
}

}  // namespace

SplitPlan make_splits(const Assay &assay, Scheme scheme, std::size_t n_splits,
                      std::uint64_t seed) {
  if (assay.records.empty())
    throw std::invalid_argument("cannot split an empty assay");
  SplitPlan plan { scheme, seed, {}, {} };
  for (const auto &r: assay.records)
    plan.scaffold_keys.push_back(chem::scaffold_key(chem::murcko_scaffold(r.mol)));

  if (scheme == Scheme::kRandomCvLite) {
    if (n_splits != kFolds)
      throw std::invalid_argument("random_cv_lite uses exactly 5 splits");
    plan.roles = random_cv_lite(assay, seed);
  } else {
    if (n_splits == 0)
      throw std::invalid_argument("need at least one split");
    for (std::size_t s = 0; s < n_splits; ++s)
      plan.roles.push_back(scaffold_split(plan.scaffold_keys, derive_seed(seed, s)));
  }
  return plan;
}

void check_plan(const SplitPlan &plan) {
  const std::size_t n = plan.scaffold_keys.size();
  if (plan.scheme == Scheme::kRandomCvLite) {
    std::vector<int> tested(n, 0);
    for (const auto &roles: plan.roles)
      for (std::size_t i = 0; i < n; ++i)
        tested[i] += roles[i] == Role::kTest;
    for (std::size_t i = 0; i < n; ++i)
      if (tested[i] != 1)
        throw std::logic_error("record " + std::to_string(i) + " is tested "
                               + std::to_string(tested[i]) + " times");
    return;
  }

  std::map<std::string, std::size_t> bin_size;
  for (const auto &k: plan.scaffold_keys)
    ++bin_size[k];
  for (std::size_t s = 0; s < plan.n_splits(); ++s) {
    std::set<std::string> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      const auto &k = plan.scaffold_keys[i];
      if (plan.roles[s][i] == Role::kTrain)
        train.insert(k);
      else if (plan.roles[s][i] == Role::kTest)
        test.insert(k);
      if (static_cast<double>(bin_size[k]) > kLargeBinFraction * n
          && plan.roles[s][i] != Role::kTrain)
        throw std::logic_error("split " + std::to_string(s)
                               + ": a bin above 10% left the training set");
    }
    for (const auto &k: test)
      if (train.count(k))
        throw std::logic_error("split " + std::to_string(s)
                               + ": scaffold shared by train and test");
  }
}

void write_plan(std::ostream &os, const Assay &assay, const SplitPlan &plan) {
  os << "id,scaffold";
  for (std::size_t s = 0; s < plan.n_splits(); ++s)
    os << ",split" << s;
  os << '\n';
  for (std::size_t i = 0; i < assay.records.size(); ++i) {
    os << assay.records[i].id << ',' << plan.scaffold_keys[i];
    for (const auto &roles: plan.roles)
      os << ',' << role_name(roles[i]);
    os << '\n';
  }
}

}  // namespace scaffkit::pipeline
