//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_METRICS_METRICS_H_
#define SCAFFKIT_METRICS_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scaffkit/chem/mol_graph.h"
#include "scaffkit/fingerprint/fingerprint.h"

namespace scaffkit::metrics {

struct RankedItem {
  std::string id;
  double score;
  int label;
  // Position in the input, used to break score ties.
  std::size_t input_index;
};

// Items in descending score order; equal scores keep their input order.
class RankedList {
public:
  RankedList(std::span<const double> scores, std::span<const int> labels,
             std::span<const std::string> ids = {});

  const std::vector<RankedItem> &items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  std::size_t actives() const { return actives_; }
  // Labels in rank order.
  std::vector<int> ranked_labels() const;

private:
  std::vector<RankedItem> items_;
  std::size_t actives_ = 0;
};

inline constexpr double kLogAucLow = 0.001;
inline constexpr double kLogAucHigh = 0.1;
inline constexpr double kBedrocAlpha = 20.0;

// Area under the ROC curve against log10(FPR) over [lo, hi], divided by
// log10(hi / lo). Throws DegenerateLabels without both classes.
double log_auc(const RankedList &rl, double lo = kLogAucLow, double hi = kLogAucHigh);

// Standard RIE rescaled between its exact minimum (actives ranked last)
// and maximum (actives ranked first). Throws DegenerateLabels unless
// 1 <= n < N.
double bedroc(const RankedList &rl, double alpha = kBedrocAlpha);

// (n_k / k) / (n / N). Throws DegenerateLabels without actives and
// std::invalid_argument when k is 0 or exceeds N.
double ef_k(const RankedList &rl, std::size_t k = 100);

// Sum over the top k of y_i / log2(i + 1), ranks from 1.
double dcg_k(const RankedList &rl, std::size_t k = 100);
// Actives in the top k.
double cg_k(const RankedList &rl, std::size_t k = 100);

// 1 - mean pairwise Tanimoto over the given scaffold fingerprints (k >= 2).
double sd_k(std::span<const fp::Fingerprint> scaffold_fps);
// Same, with scaffolds and fingerprints taken from the molecules.
double sd_k(std::span<const chem::MolGraph> mols);

struct MetricReport {
  double logauc = 0.0;
  double bedroc = 0.0;
  double ef100 = 0.0;
  double dcg100 = 0.0;
  double cg100 = 0.0;
  std::optional<double> sd100;
};

// All metrics with k = min(100, N). scaffold_fps, when given, is indexed
// by input position and feeds SD.
MetricReport evaluate(const RankedList &rl,
                      std::span<const fp::Fingerprint> scaffold_fps = {});

// {"logauc": ..., "bedroc": ..., "ef100": ..., "dcg100": ..., "sd100": ...}
// with six decimals; sd100 is omitted when absent.
std::string to_json(const MetricReport &r);

}  // namespace scaffkit::metrics

#endif  // SCAFFKIT_METRICS_METRICS_H_
