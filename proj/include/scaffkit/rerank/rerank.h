//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_RERANK_RERANK_H_
#define SCAFFKIT_RERANK_RERANK_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scaffkit/fingerprint/fingerprint.h"
#include "scaffkit/metrics/metrics.h"

namespace scaffkit::rerank {

inline constexpr std::size_t kDefaultCap = 500;

struct Candidate {
  std::string id;
  // Raw model score (logit).
  double score;
  std::size_t input_index;
  fp::Fingerprint fp;
};

// Positive-score entries in descending score order, at most cap of them.
struct CandidateSet {
  std::vector<Candidate> entries;
  std::size_t cap = kDefaultCap;

  std::size_t size() const { return entries.size(); }
};

// Keeps the entries with score > 0, sorts them by descending score (input
// order among equal scores) and truncates to cap. fps is indexed like
// scores. Throws EmptyCandidates when no score is positive.
CandidateSet build_candidates(std::span<const double> scores,
                              std::span<const fp::Fingerprint> fps,
                              std::span<const std::string> ids = {},
                              std::size_t cap = kDefaultCap);

struct RerankedSet {
  // Selection order as positions into the candidate list.
  std::vector<std::size_t> order;
  std::vector<std::string> ids;
  // MMR value of each pick at the step it was taken.
  std::vector<double> mmr;
  double lambda = 1.0;
};

// Similarity between two candidates given by position.
using Similarity = std::function<double(std::size_t, std::size_t)>;

// Greedy maximal marginal relevance: start from the highest score, then
// repeatedly take the candidate maximizing
//   lambda * sigmoid(score) - (1 - lambda) * max similarity to the picks,
// with ties going to the higher raw score and then the lower position.
RerankedSet mmr_rerank(std::span<const double> scores, const Similarity &sim,
                       double lambda);

// Same over a candidate set, with Tanimoto similarity of the stored
// fingerprints.
RerankedSet mmr_rerank(const CandidateSet &c, double lambda);

struct RerankReport {
  double lambda;
  std::size_t k;
  double ef_before;
  double ef_after;
  double sd_before;
  double sd_after;

  double ef_delta() const { return ef_after - ef_before; }
  double sd_delta() const { return sd_after - sd_before; }
};

// EF_k and SD_k of the original top k against the reranked top k. labels
// come from the original list; scaffold_fps is indexed by input position.
// Throws std::invalid_argument when k exceeds the candidate count.
RerankReport rerank_report(const metrics::RankedList &original,
                           const CandidateSet &c, const RerankedSet &reranked,
                           std::span<const fp::Fingerprint> scaffold_fps,
                           std::size_t k = 100);

inline const std::vector<double> kDefaultLambdas { 0.0, 0.25, 0.5, 0.75, 1.0 };

// One report per lambda.
std::vector<RerankReport> lambda_sweep(const metrics::RankedList &original,
                                       const CandidateSet &c,
                                       std::span<const fp::Fingerprint> scaffold_fps,
                                       std::span<const double> lambdas,
                                       std::size_t k = 100);

// CSV: lambda,ef100_before,ef100_after,sd100_before,sd100_after
void write_sweep(std::ostream &os, const std::vector<RerankReport> &rows);

}  // namespace scaffkit::rerank

#endif  // SCAFFKIT_RERANK_RERANK_H_
