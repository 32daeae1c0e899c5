//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_PIPELINE_STAGES_H_
#define SCAFFKIT_PIPELINE_STAGES_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scaffkit/diffusion/diffusion.h"
#include "scaffkit/metrics/metrics.h"
#include "scaffkit/pipeline/assay.h"
#include "scaffkit/pipeline/config.h"
#include "scaffkit/pipeline/split.h"
#include "scaffkit/rerank/rerank.h"
#include "scaffkit/sas/sas.h"
#include "scaffkit/selftrain/selftrain.h"

namespace scaffkit::pipeline {

// marginal, echo or external:<command>. Throws ConfigError otherwise.
std::unique_ptr<diffusion::Denoiser> make_denoiser(const std::string &name);

// Records of one role in one split.
struct Subset {
  std::vector<std::size_t> index;
  std::vector<chem::MolGraph> mols;
  std::vector<int> labels;
  std::vector<std::string> ids;
};
Subset subset(const Assay &assay, const SplitPlan &plan, std::size_t split, Role role);

// Clustered scaffolds of the training actives.
struct ActiveScaffolds {
  std::vector<chem::MolGraph> scaffolds;
  std::vector<fp::Fingerprint> fps;
  sas::ClusterModel model;
  sas::SamplingWeights weights;
  // Actives without a ring system, left out of the library.
  std::size_t acyclic = 0;
};

// Fewer than three scaffolds are kept as one cluster.
ActiveScaffolds cluster_actives(std::span<const chem::MolGraph> mols,
                                std::span<const int> labels, const Config &cfg,
                                std::uint64_t seed);

enum class Sampler { kScaffoldAware, kUniform };

struct Augmentation {
  sas::ScaffoldLibrary library;
  std::vector<diffusion::GeneratedMolecule> generated;
  diffusion::GenerationReport report;
  // Valid generated molecules per cluster of their source scaffold.
  std::vector<std::size_t> cluster_counts;
  double entropy_gap = 0.0;
};

// Samples a library of library_size(train size) scaffolds and extends each
// with the diffusion sampler, using node/edge marginals of the training
// molecules.
Augmentation augment(const ActiveScaffolds &actives,
                     std::span<const chem::MolGraph> train_mols, Sampler sampler,
                     diffusion::Denoiser &denoiser, const Config &cfg,
                     std::uint64_t seed);

std::vector<fp::Fingerprint> featurize(std::span<const chem::MolGraph> mols,
                                       const selftrain::FeatureConfig &cfg);

// Murcko scaffold fingerprints; acyclic molecules get the empty one.
std::vector<fp::Fingerprint> scaffold_fingerprints(std::span<const chem::MolGraph> mols,
                                                   const selftrain::FeatureConfig &cfg);

// Similarity fingerprints for reranking as selected by the config.
std::vector<fp::Fingerprint> rerank_fingerprints(std::span<const chem::MolGraph> mols,
                                                 const Config &cfg);

struct RerankOutcome {
  std::vector<rerank::RerankReport> sweep;
  // Set when no test molecule scored positive.
  std::optional<std::string> skipped;
};

RerankOutcome rerank_sweep(const metrics::RankedList &ranked,
                           std::span<const double> scores,
                           std::span<const chem::MolGraph> mols,
                           std::span<const std::string> ids, const Config &cfg);

}  // namespace scaffkit::pipeline

#endif  // SCAFFKIT_PIPELINE_STAGES_H_
