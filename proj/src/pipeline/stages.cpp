//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/pipeline/stages.h"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "scaffkit/chem/scaffold.h"
#include "scaffkit/error.h"
#include "scaffkit/util/random.h"

namespace scaffkit::pipeline {

std::unique_ptr<diffusion::Denoiser> make_denoiser(const std::string &name) {
  if (name == "marginal")
    return std::make_unique<diffusion::MarginalDenoiser>();
  if (name == "echo")
    return std::make_unique<diffusion::OneHotEchoDenoiser>();
  if (name.rfind("external:", 0) == 0 && name.size() > 9)
    return std::make_unique<diffusion::ExternalDenoiser>(name.substr(9));
  throw ConfigError("unknown denoiser '" + name + "'");
}

Subset subset(const Assay &assay, const SplitPlan &plan, std::size_t split, Role role) {
  Subset s;
  s.index = plan.members(split, role);
  for (auto i: s.index) {
    const Record &r = assay.records[i];
    s.mols.push_back(r.mol);
    s.labels.push_back(r.label);
    s.ids.push_back(r.id);
  }
  return s;
}

ActiveScaffolds cluster_actives(std::span<const chem::MolGraph> mols,
                                std::span<const int> labels, const Config &cfg,
                                std::uint64_t seed) {
  ActiveScaffolds out;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    if (labels[i] != 1)
      continue;
    auto s = chem::murcko_scaffold(mols[i]);
    if (!s) {
      ++out.acyclic;
      continue;
    }
    out.fps.push_back(fp::ecfp(*s, cfg.features.radius, cfg.features.nbits));
    out.scaffolds.push_back(std::move(*s));
  }
  if (out.acyclic > 0)
    spdlog::info("{} acyclic actives left out of the scaffold library", out.acyclic);
  if (out.scaffolds.empty())
    throw DegenerateInput("no training active has a ring scaffold");

  const auto m = static_cast<std::uint32_t>(out.scaffolds.size());
  if (m < 3) {
    out.model.k = 1;
    out.model.assignments.assign(m, 0);
    out.model.degenerate = true;
    spdlog::warn("only {} active scaffolds; clustering skipped", m);
  } else {
    const std::uint32_t k_max = cfg.k_max == 0 ? std::min<std::uint32_t>(20, m - 1)
                                               : std::min(cfg.k_max, m - 1);
    const std::uint32_t k_min = std::min(cfg.k_min, k_max);
    out.model = sas::cluster_scaffolds(out.fps, k_min, k_max, seed);
  }
  out.weights = sas::sampling_weights(out.model.assignments, cfg.epsilon);
  return out;
}

Augmentation augment(const ActiveScaffolds &actives,
                     std::span<const chem::MolGraph> train_mols, Sampler sampler,
                     diffusion::Denoiser &denoiser, const Config &cfg,
                     std::uint64_t seed) {
  const std::vector<int> labels(actives.scaffolds.size(), 1);
  const std::size_t n = sas::library_size(train_mols.size());
  Augmentation out;
  out.library = sampler == Sampler::kScaffoldAware
                    ? sas::sample_library(actives.scaffolds, labels, actives.model,
                                          actives.weights, n, derive_seed(seed, "library"))
                    : sas::sample_uniform(actives.scaffolds, labels, actives.model, n,
                                          derive_seed(seed, "library"));

  std::vector<chem::AtomType> extra;
  for (const auto &s: actives.scaffolds)
    for (std::uint32_t i = 0; i < s.num_atoms(); ++i)
      extra.push_back(s.atom(i));
  const diffusion::Marginals priors = diffusion::compute_marginals(train_mols, extra);

  diffusion::ExtendOptions opts;
  opts.steps = cfg.steps;
  out.generated = diffusion::generate_gdsa(out.library, denoiser, priors,
                                           derive_seed(seed, "generate"), opts, &out.report);
  out.cluster_counts.assign(actives.model.k, 0);
  for (const auto &g: out.generated)
    ++out.cluster_counts[out.library.entries[g.library_index].cluster];
  out.entropy_gap = sas::normalized_entropy_gap(out.cluster_counts);
  return out;
}

std::vector<fp::Fingerprint> featurize(std::span<const chem::MolGraph> mols,
                                       const selftrain::FeatureConfig &cfg) {
  std::vector<fp::Fingerprint> out;
  out.reserve(mols.size());
  for (const auto &m: mols)
    out.push_back(fp::ecfp(m, cfg.radius, cfg.nbits));
  return out;
}

std::vector<fp::Fingerprint> scaffold_fingerprints(std::span<const chem::MolGraph> mols,
                                                   const selftrain::FeatureConfig &cfg) {
  std::vector<fp::Fingerprint> out;
  out.reserve(mols.size());
  for (const auto &m: mols)
    out.push_back(fp::ecfp(chem::murcko_scaffold(m), cfg.radius, cfg.nbits));
  return out;
}

std::vector<fp::Fingerprint> rerank_fingerprints(std::span<const chem::MolGraph> mols,
                                                 const Config &cfg) {
  return cfg.similarity == RerankSimilarity::kScaffold
             ? scaffold_fingerprints(mols, cfg.features)
             : featurize(mols, cfg.features);
}

RerankOutcome rerank_sweep(const metrics::RankedList &ranked,
                           std::span<const double> scores,
                           std::span<const chem::MolGraph> mols,
                           std::span<const std::string> ids, const Config &cfg) {
  RerankOutcome out;
  const auto sim_fps = rerank_fingerprints(mols, cfg);
  const auto scaffold_fps = scaffold_fingerprints(mols, cfg.features);
  rerank::CandidateSet c;
  try {
    c = rerank::build_candidates(scores, sim_fps, ids, cfg.cap);
  } catch (const EmptyCandidates &e) {
    out.skipped = e.what();
    spdlog::warn("reranking skipped: {}", e.what());
    return out;
  }
  if (ranked.actives() == 0) {
    out.skipped = "no actives among the scored molecules";
    return out;
  }
  const std::size_t k = std::min(cfg.top_k, c.size());
  out.sweep = rerank::lambda_sweep(ranked, c, scaffold_fps, cfg.lambdas, k);
  return out;
}

}  // namespace scaffkit::pipeline
