//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_PIPELINE_CONFIG_H_
#define SCAFFKIT_PIPELINE_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scaffkit/pipeline/split.h"
#include "scaffkit/selftrain/selftrain.h"

namespace scaffkit::pipeline {

// Similarity used by MMR: between scaffold fingerprints or between whole
// molecule fingerprints.
enum class RerankSimilarity { kScaffold, kMolecule };

// Every experiment setting. Loaded from an INI file whose sections mirror
// the groups below; keys left out keep these defaults.
struct Config {
  // [data]
  std::string assay;
  Scheme scheme = Scheme::kRandomCvLite;
  std::size_t n_splits = 5;
  // Splits to run; empty runs all of them.
  std::vector<std::size_t> splits;

  // [features]
  selftrain::FeatureConfig features;

  // [sas]
  std::uint32_t k_min = 2;
  // 0 means min(20, m - 1) for m active scaffolds.
  std::uint32_t k_max = 0;
  double epsilon = 1e-8;
  // Also sample a uniform-actives library and generate from it, for the
  // cluster-balance comparison.
  bool ablation = true;

  // [diffusion]
  bool augment = true;
  // marginal, echo or external:<command>
  std::string denoiser = "marginal";
  std::uint32_t steps = 50;

  // [selftrain]
  selftrain::SelfTrainConfig selftrain;

  // [rerank]
  std::size_t cap = 500;
  std::size_t top_k = 100;
  std::vector<double> lambdas { 0.0, 0.25, 0.5, 0.75, 1.0 };
  RerankSimilarity similarity = RerankSimilarity::kScaffold;

  // [run]
  std::uint64_t seed = 0;
  std::size_t eval_seeds = 3;

  // Throws ConfigError for out-of-range values.
  void validate() const;
};

// Throws ConfigError for syntax errors, unknown sections or keys and
// unparseable values; IoError when the file cannot be read.
Config load_config(const std::string &path);
Config parse_config(const std::string &text);

// Fully resolved INI text; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const Config &c);

}  // namespace scaffkit::pipeline

#endif  // SCAFFKIT_PIPELINE_CONFIG_H_
