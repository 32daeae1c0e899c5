//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/rerank/rerank.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "scaffkit/error.h"

namespace scaffkit::rerank {
namespace {

double squash(double z) {
  if (z >= 0.0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

CandidateSet build_candidates(std::span<const double> scores,
                              std::span<const fp::Fingerprint> fps,
                              std::span<const std::string> ids, std::size_t cap) {
  if (fps.size() != scores.size() || (!ids.empty() && ids.size() != scores.size()))
    throw std::invalid_argument("scores, fingerprints and ids differ in length");
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > 0.0)
      pos.push_back(i);
  if (pos.empty())
    throw EmptyCandidates("no molecule has a positive score");
  std::stable_sort(pos.begin(), pos.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (pos.size() > cap)
    pos.resize(cap);

  CandidateSet out;
  out.cap = cap;
  for (auto i: pos)
    out.entries.push_back({ ids.empty() ? std::to_string(i) : ids[i], scores[i], i, fps[i] });
  return out;
}

RerankedSet mmr_rerank(std::span<const double> scores, const Similarity &sim,
                       double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in [0, 1]");
  const std::size_t n = scores.size();
  RerankedSet out;
  out.lambda = lambda;
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<double> max_sim(n, 0.0);
  bool first = true;

  while (!remaining.empty()) {
    std::size_t best_at = 0;
    double best_mmr = 0.0;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      const std::size_t i = remaining[r];
      const double mmr = lambda * squash(scores[i]) - (1.0 - lambda) * max_sim[i];
      bool better;
      if (r == 0) {
        better = true;
      } else if (first) {
        const std::size_t b = remaining[best_at];
        better = scores[i] > scores[b];
      } else {
        const std::size_t b = remaining[best_at];
        better = mmr > best_mmr || (mmr == best_mmr && scores[i] > scores[b]);
      }
      if (better) {
        best_at = r;
        best_mmr = mmr;
      }
    }
    const std::size_t pick = remaining[best_at];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_at));
    out.order.push_back(pick);
    out.mmr.push_back(best_mmr);
    for (auto i: remaining)
      max_sim[i] = std::max(max_sim[i], sim(i, pick));
    first = false;
  }
  return out;
}

RerankedSet mmr_rerank(const CandidateSet &c, double lambda) {
  std::vector<double> scores;
  scores.reserve(c.size());
  for (const auto &e: c.entries)
    scores.push_back(e.score);
  RerankedSet out = mmr_rerank(
      scores,
      [&](std::size_t a, std::size_t b) {
        return fp::tanimoto(c.entries[a].fp, c.entries[b].fp);
      },
      lambda);
  for (auto p: out.order)
    out.ids.push_back(c.entries[p].id);
  return out;
}

namespace {

struct TopK {
  double ef;
  double sd;
};

TopK score_top(const std::vector<std::size_t> &inputs, const std::vector<int> &label_of,
               std::size_t n_total, std::size_t n_active,
               std::span<const fp::Fingerprint> scaffold_fps) {
  const std::size_t k = inputs.size();
  std::size_t hits = 0;
  std::vector<fp::Fingerprint> fps;
  for (auto i: inputs) {
    hits += static_cast<std::size_t>(label_of[i] == 1);
    fps.push_back(scaffold_fps[i]);
  }
  TopK t;
  t.ef = (static_cast<double>(hits) / static_cast<double>(k))
         / (static_cast<double>(n_active) / static_cast<double>(n_total));
  t.sd = k >= 2 ? metrics::sd_k(fps) : 0.0;
  return t;
}

}  // namespace

RerankReport rerank_report(const metrics::RankedList &original, const CandidateSet &c,
                           const RerankedSet &reranked,
                           std::span<const fp::Fingerprint> scaffold_fps,
                           std::size_t k) {
  if (k == 0 || k > c.size())
    throw std::invalid_argument("k = " + std::to_string(k) + " but only "
                                + std::to_string(c.size()) + " candidates");
  if (reranked.order.size() != c.size())
    throw std::invalid_argument("reranked set does not match the candidates");
  if (scaffold_fps.size() != original.size())
    throw std::invalid_argument("one scaffold fingerprint per input required");
  if (original.actives() == 0)
    throw DegenerateLabels("enrichment needs at least one active");

  std::vector<int> label_of(original.size(), 0);
  for (const auto &item: original.items())
    label_of[item.input_index] = item.label;

  std::vector<std::size_t> before, after;
  for (std::size_t r = 0; r < k; ++r) {
    before.push_back(original.items()[r].input_index);
    after.push_back(c.entries[reranked.order[r]].input_index);
  }
  const TopK b = score_top(before, label_of, original.size(), original.actives(),
                           scaffold_fps);
  const TopK a = score_top(after, label_of, original.size(), original.actives(),
                           scaffold_fps);
  return { reranked.lambda, k, b.ef, a.ef, b.sd, a.sd };
}

std::vector<RerankReport> lambda_sweep(const metrics::RankedList &original,
                                       const CandidateSet &c,
                                       std::span<const fp::Fingerprint> scaffold_fps,
                                       std::span<const double> lambdas, std::size_t k) {
  std::vector<RerankReport> rows;
  for (double l: lambdas)
    rows.push_back(rerank_report(original, c, mmr_rerank(c, l), scaffold_fps, k));
  return rows;
}

void write_sweep(std::ostream &os, const std::vector<RerankReport> &rows) {
  os << "lambda,ef100_before,ef100_after,sd100_before,sd100_after\n";
  char buf[160];
  for (const auto &r: rows) {
    std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.6f,%.6f,%.6f\n", r.lambda, r.ef_before,
                  r.ef_after, r.sd_before, r.sd_after);
    os << buf;
  }
}

}  // namespace scaffkit::rerank
