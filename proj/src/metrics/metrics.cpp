//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "scaffkit/chem/scaffold.h"
#include "scaffkit/error.h"

namespace scaffkit::metrics {

RankedList::RankedList(std::span<const double> scores, std::span<const int> labels,
                       std::span<const std::string> ids) {
  if (scores.size() != labels.size() || (!ids.empty() && ids.size() != scores.size()))
    throw std::invalid_argument("scores, labels and ids differ in length");
  items_.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("labels must be 0 or 1");
    items_.push_back({ ids.empty() ? std::to_string(i) : ids[i], scores[i],
                       labels[i], i });
    actives_ += static_cast<std::size_t>(labels[i]);
  }
  std::stable_sort(items_.begin(), items_.end(),
                   [](const RankedItem &a, const RankedItem &b) {
                     return a.score > b.score;
                   });
}

std::vector<int> RankedList::ranked_labels() const {
  std::vector<int> out;
  out.reserve(items_.size());
  for (const auto &it: items_)
    out.push_back(it.label);
  return out;
}

double log_auc(const RankedList &rl, double lo, double hi) {
  const std::size_t n = rl.actives();
  const std::size_t inactive = rl.size() - n;
  if (n == 0 || inactive == 0)
    throw DegenerateLabels("logAUC needs both actives and inactives");
  if (!(lo > 0.0 && lo < hi && hi <= 1.0))
    throw std::invalid_argument("logAUC bounds must satisfy 0 < lo < hi <= 1");

  // The stable ranking gives a staircase: each inactive opens a horizontal
  // segment at the TPR reached so far, so the linear interpolation at the
  // bounds is that segment's level.
  const double log_lo = std::log10(lo), log_hi = std::log10(hi);
  double area = 0.0;
  std::size_t tp = 0, fp = 0;
  for (const auto &it: rl.items()) {
    if (it.label == 1) {
      ++tp;
      continue;
    }
    const double f0 = static_cast<double>(fp) / static_cast<double>(inactive);
    ++fp;
    const double f1 = static_cast<double>(fp) / static_cast<double>(inactive);
    if (f1 <= lo)
      continue;
    if (f0 >= hi)
      break;
    const double a = f0 <= lo ? log_lo : std::log10(f0);
    const double b = f1 >= hi ? log_hi : std::log10(f1);
    area += static_cast<double>(tp) / static_cast<double>(n) * (b - a);
  }
  return area / (log_hi - log_lo);
}

double bedroc(const RankedList &rl, double alpha) {
  const std::size_t n = rl.actives();
  const std::size_t big_n = rl.size();
  if (n == 0 || n >= big_n)
    throw DegenerateLabels("BEDROC needs at least one active and one inactive");
  const double N = static_cast<double>(big_n);

  double sum = 0.0;
  std::size_t rank = 0;
  for (const auto &it: rl.items()) {
    ++rank;
    if (it.label == 1)
      sum += std::exp(-alpha * static_cast<double>(rank) / N);
  }
  // Sum of exp(-alpha r / N) for r = 1..n, and for the last n ranks.
  const double top = -std::expm1(-alpha * static_cast<double>(n) / N)
                     / std::expm1(alpha / N);
  const double bottom = std::exp(-alpha * static_cast<double>(big_n - n) / N) * top;
  return (sum - bottom) / (top - bottom);
}

double ef_k(const RankedList &rl, std::size_t k) {
  if (rl.actives() == 0)
    throw DegenerateLabels("enrichment needs at least one active");
  if (k == 0 || k > rl.size())
    throw std::invalid_argument("enrichment cutoff must lie in [1, N]");
  const double hits = cg_k(rl, k);
  return (hits / static_cast<double>(k))
         / (static_cast<double>(rl.actives()) / static_cast<double>(rl.size()));
}

double dcg_k(const RankedList &rl, std::size_t k) {
  if (k > rl.size())
    throw std::invalid_argument("cutoff exceeds the list length");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (rl.items()[i].label == 1)
      sum += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return sum;
}

double cg_k(const RankedList &rl, std::size_t k) {
  if (k > rl.size())
    throw std::invalid_argument("cutoff exceeds the list length");
  double hits = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    hits += rl.items()[i].label;
  return hits;
}

double sd_k(std::span<const fp::Fingerprint> fps) {
  const std::size_t k = fps.size();
  if (k < 2)
    throw std::invalid_argument("scaffold diversity needs at least two molecules");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j)
      sum += fp::tanimoto(fps[i], fps[j]);
  }
  return 1.0 - 2.0 * sum / (static_cast<double>(k) * static_cast<double>(k - 1));
}

double sd_k(std::span<const chem::MolGraph> mols) {
  std::vector<fp::Fingerprint> fps;
  fps.reserve(mols.size());
  for (const auto &m: mols)
    fps.push_back(fp::ecfp(chem::murcko_scaffold(m)));
  return sd_k(fps);
}

MetricReport evaluate(const RankedList &rl,
                      std::span<const fp::Fingerprint> scaffold_fps) {
  const std::size_t k = std::min<std::size_t>(100, rl.size());
  MetricReport r;
  r.logauc = log_auc(rl);
  r.bedroc = bedroc(rl);
  r.ef100 = ef_k(rl, k);
  r.dcg100 = dcg_k(rl, k);
  r.cg100 = cg_k(rl, k);
  if (!scaffold_fps.empty() && k >= 2) {
    std::vector<fp::Fingerprint> top;
    for (std::size_t i = 0; i < k; ++i)
      top.push_back(scaffold_fps[rl.items()[i].input_index]);
    r.sd100 = sd_k(top);
  }
  return r;
}

std::string to_json(const MetricReport &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                R"({"logauc": %.6f, "bedroc": %.6f, "ef100": %.6f, "dcg100": %.6f)",
                r.logauc, r.bedroc, r.ef100, r.dcg100);
  std::string out = buf;
  if (r.sd100) {
    std::snprintf(buf, sizeof buf, R"(, "sd100": %.6f)", *r.sd100);
    out += buf;
  }
  return out + "}";
}

}  // namespace scaffkit::metrics
