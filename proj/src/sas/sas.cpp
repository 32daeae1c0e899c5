//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/sas/sas.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/error.h"
#include "scaffkit/util/random.h"

namespace scaffkit::sas {

double distance(const fp::Fingerprint &x, const fp::Fingerprint &y) {
  if (x.nbits() != y.nbits())
    throw WidthMismatch("distance between fingerprints of different widths");
  std::uint64_t diff = 0;
  for (std::size_t w = 0; w < x.words().size(); ++w)
    diff += static_cast<std::uint64_t>(std::popcount(x.words()[w] ^ y.words()[w]));
  return std::sqrt(static_cast<double>(diff));
}

namespace {

struct SparsePoint {
  std::vector<std::uint32_t> bits;
};

class KMeansRun {
public:
  KMeansRun(const std::vector<SparsePoint> &points, std::uint32_t nbits,
            std::uint32_t k)
      : points_(points), nbits_(nbits), k_(k),
        centroids_(k, std::vector<double>(nbits, 0.0)), norms_(k, 0.0),
        assign_(points.size(), 0) { }

  double fit(Rng &rng, const KMeansOptions &opts) {
    seed_centroids(rng);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      assign_all();
      fill_empty_clusters();
      double shift = update_centroids();
      if (shift < opts.tolerance)
        break;
    }
    // Final assignment against the converged centroids; refill keeps the
    // every-cluster-nonempty invariant.
    assign_all();
    fill_empty_clusters();
    update_centroids();
    return inertia();
  }

  const std::vector<std::uint32_t> &assignments() const { return assign_; }
  const std::vector<std::vector<double>> &centroids() const { return centroids_; }

private:
  double sq_dist(std::size_t p, std::uint32_t c) const {
    double dot = 0.0;
    for (auto b: points_[p].bits)
      dot += centroids_[c][b];
    return static_cast<double>(points_[p].bits.size()) - 2.0 * dot + norms_[c];
  }

  void set_centroid_to_point(std::uint32_t c, std::size_t p) {
    std::fill(centroids_[c].begin(), centroids_[c].end(), 0.0);
    for (auto b: points_[p].bits)
      centroids_[c][b] = 1.0;
    norms_[c] = static_cast<double>(points_[p].bits.size());
  }

  void seed_centroids(Rng &rng) {
    const std::size_t m = points_.size();
    std::vector<bool> chosen(m, false);
    std::size_t first = rng.below(m);
    chosen[first] = true;
    set_centroid_to_point(0, first);
    std::vector<double> d2(m);
    for (std::size_t p = 0; p < m; ++p)
      d2[p] = std::max(0.0, sq_dist(p, 0));
    for (std::uint32_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (double v: d2)
        total += v;
      std::size_t pick;
      if (total > 0.0) {
        pick = rng.categorical(d2);
      } else {
        // Fewer distinct points than clusters: any unused point will do.
        std::vector<std::size_t> unused;
        for (std::size_t p = 0; p < m; ++p)
          if (!chosen[p])
            unused.push_back(p);
        pick = unused[rng.below(unused.size())];
      }
      chosen[pick] = true;
      set_centroid_to_point(c, pick);
      for (std::size_t p = 0; p < m; ++p)
        d2[p] = std::min(d2[p], std::max(0.0, sq_dist(p, c)));
    }
  }

  void assign_all() {
    for (std::size_t p = 0; p < points_.size(); ++p) {
      std::uint32_t best = 0;
      double best_d = sq_dist(p, 0);
      for (std::uint32_t c = 1; c < k_; ++c) {
        double d = sq_dist(p, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign_[p] = best;
    }
  }

  // An empty cluster takes the point farthest from its own centroid among
  // clusters that can spare one.
  void fill_empty_clusters() {
    std::vector<std::size_t> size(k_, 0);
    for (auto a: assign_)
      ++size[a];
    for (std::uint32_t c = 0; c < k_; ++c) {
      if (size[c] > 0)
        continue;
      std::size_t far = points_.size();
      double far_d = -1.0;
      for (std::size_t p = 0; p < points_.size(); ++p) {
        if (size[assign_[p]] < 2)
          continue;
        double d = sq_dist(p, assign_[p]);
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      --size[assign_[far]];
      assign_[far] = c;
      size[c] = 1;
      set_centroid_to_point(c, far);
    }
  }

  double update_centroids() {
    std::vector<std::vector<double>> next(k_, std::vector<double>(nbits_, 0.0));
    std::vector<std::size_t> size(k_, 0);
    for (std::size_t p = 0; p < points_.size(); ++p) {
      ++size[assign_[p]];
      for (auto b: points_[p].bits)
        next[assign_[p]][b] += 1.0;
    }
    double shift = 0.0;
    for (std::uint32_t c = 0; c < k_; ++c) {
      double moved = 0.0, norm = 0.0;
      for (std::uint32_t b = 0; b < nbits_; ++b) {
        double v = next[c][b] / static_cast<double>(size[c]);
        next[c][b] = v;
        moved += (v - centroids_[c][b]) * (v - centroids_[c][b]);
        norm += v * v;
      }
      norms_[c] = norm;
      shift = std::max(shift, std::sqrt(moved));
    }
    centroids_.swap(next);
    return shift;
  }

  double inertia() const {
    double sum = 0.0;
    for (std::size_t p = 0; p < points_.size(); ++p)
      sum += std::max(0.0, sq_dist(p, assign_[p]));
    return sum;
  }

  const std::vector<SparsePoint> &points_;
  std::uint32_t nbits_;
  std::uint32_t k_;
  std::vector<std::vector<double>> centroids_;
  std::vector<double> norms_;
  std::vector<std::uint32_t> assign_;
};

std::vector<std::vector<double>> distance_matrix(std::span<const fp::Fingerprint> pts) {
  const std::size_t m = pts.size();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j)
      d[i][j] = d[j][i] = distance(pts[i], pts[j]);
  }
  return d;
}

void check_widths(std::span<const fp::Fingerprint> fps) {
  for (const auto &f: fps) {
    if (f.nbits() != fps.front().nbits())
      throw WidthMismatch("fingerprints to cluster differ in width");
  }
}

ClusterModel fit_k(std::span<const fp::Fingerprint> points, std::uint32_t k,
                   std::uint64_t seed, const KMeansOptions &opts) {
  std::vector<SparsePoint> sparse;
  sparse.reserve(points.size());
  for (const auto &f: points)
    sparse.push_back({ f.on_bits() });

  ClusterModel best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(derive_seed(derive_seed(seed, k), static_cast<std::uint64_t>(r)));
    KMeansRun run(sparse, points.front().nbits(), k);
    double inertia = run.fit(rng, opts);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best.k = k;
      best.assignments = run.assignments();
      best.centroids = run.centroids();
    }
  }
  return best;
}

}  // namespace

ClusterModel kmeans(std::span<const fp::Fingerprint> points, std::uint32_t k,
                    std::uint64_t seed, const KMeansOptions &opts) {
  if (k == 0 || k > points.size())
    throw std::invalid_argument("k must lie in [1, number of points]");
  check_widths(points);
  ClusterModel model = fit_k(points, k, seed, opts);
  model.silhouette = k >= 2 ? silhouette(points, model.assignments)
                            : std::numeric_limits<double>::quiet_NaN();
  return model;
}

double silhouette(const std::vector<std::vector<double>> &dist,
                  std::span<const std::uint32_t> assignments) {
  const std::size_t m = assignments.size();
  std::uint32_t k = 0;
  for (auto a: assignments)
    k = std::max(k, a + 1);
  std::vector<std::size_t> size(k, 0);
  for (auto a: assignments)
    ++size[a];
  if (std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; }) < 2)
    throw std::invalid_argument("silhouette needs at least two clusters");

  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t own = assignments[i];
    if (size[own] == 1)
      continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j)
      sums[assignments[j]] += dist[i][j];
    const double a = sums[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < k; ++c) {
      if (c != own && size[c] > 0)
        b = std::min(b, sums[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0)
      total += (b - a) / denom;
  }
  return total / static_cast<double>(m);
}

double silhouette(std::span<const fp::Fingerprint> points,
                  std::span<const std::uint32_t> assignments) {
  if (points.size() != assignments.size())
    throw std::invalid_argument("one assignment per point required");
  return silhouette(distance_matrix(points), assignments);
}

ClusterModel cluster_scaffolds(std::span<const fp::Fingerprint> fps,
                               std::uint32_t k_min, std::uint32_t k_max,
                               std::uint64_t seed, const KMeansOptions &opts) {
  const auto m = static_cast<std::uint32_t>(fps.size());
  if (m < 3)
    throw DegenerateInput("clustering needs at least 3 scaffolds, got "
                          + std::to_string(m));
  check_widths(fps);
  if (k_max == 0)
    k_max = std::min<std::uint32_t>(20, m - 1);
  if (k_min < 2 || k_max > m - 1 || k_min > k_max)
    throw std::invalid_argument("k range must lie within [2, m - 1]");

  if (std::all_of(fps.begin(), fps.end(),
                  [&](const fp::Fingerprint &f) { return f == fps.front(); })) {
    ClusterModel trivial;
    trivial.k = 1;
    trivial.assignments.assign(m, 0);
    trivial.centroids.emplace_back(fps.front().nbits(), 0.0);
    for (auto b: fps.front().on_bits())
      trivial.centroids[0][b] = 1.0;
    trivial.silhouette = std::numeric_limits<double>::quiet_NaN();
    trivial.degenerate = true;
    return trivial;
  }

  const auto dist = distance_matrix(fps);
  ClusterModel best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::map<std::uint32_t, double> by_k;
  for (std::uint32_t k = k_min; k <= k_max; ++k) {
    ClusterModel model = fit_k(fps, k, seed, opts);
    model.silhouette = silhouette(dist, model.assignments);
    by_k[k] = model.silhouette;
    if (model.silhouette > best_score) {
      best_score = model.silhouette;
      best = std::move(model);
    }
  }
  best.silhouette_by_k = std::move(by_k);
  return best;
}

SamplingWeights sampling_weights(std::span<const std::uint32_t> assignments,
                                 double epsilon) {
  if (assignments.empty())
    throw std::invalid_argument("sampling weights need at least one assignment");
  std::uint32_t k = 0;
  for (auto a: assignments)
    k = std::max(k, a + 1);
  SamplingWeights w;
  w.counts.assign(k, 0);
  for (auto a: assignments)
    ++w.counts[a];
  w.weights.resize(k);
  double total = 0.0;
  for (std::uint32_t c = 0; c < k; ++c) {
    w.weights[c] = 1.0 / (static_cast<double>(w.counts[c]) + epsilon);
    if (w.counts[c] > 0)
      total += w.weights[c];
  }
  w.probabilities.resize(k);
  for (std::uint32_t c = 0; c < k; ++c)
    w.probabilities[c] = w.counts[c] > 0 ? w.weights[c] / total : 0.0;
  return w;
}

std::size_t library_size(std::size_t train_size) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(train_size))));
}

namespace {

void check_library_inputs(std::span<const chem::MolGraph> scaffolds,
                          std::span<const int> labels, const ClusterModel &model,
                          std::size_t n) {
  if (n == 0)
    throw std::invalid_argument("library size must be at least 1");
  if (scaffolds.size() != labels.size()
      || scaffolds.size() != model.assignments.size())
    throw std::invalid_argument("scaffolds, labels and assignments differ in length");
  if (scaffolds.empty())
    throw std::invalid_argument("no scaffolds to sample from");
}

}  // namespace

ScaffoldLibrary sample_library(std::span<const chem::MolGraph> scaffolds,
                               std::span<const int> labels,
                               const ClusterModel &model,
                               const SamplingWeights &weights, std::size_t n,
                               std::uint64_t seed) {
  check_library_inputs(scaffolds, labels, model, n);
  std::vector<std::vector<std::size_t>> members(weights.probabilities.size());
  for (std::size_t i = 0; i < model.assignments.size(); ++i) {
    if (model.assignments[i] >= members.size())
      throw std::invalid_argument("assignment outside the weighted clusters");
    members[model.assignments[i]].push_back(i);
  }

  Rng rng(seed);
  ScaffoldLibrary lib;
  lib.entries.reserve(n);
  for (std::size_t draw = 0; draw < n; ++draw) {
    const std::size_t c = rng.categorical(weights.probabilities);
    const auto &pool = members[c];
    const std::size_t i = pool[rng.below(pool.size())];
    lib.entries.push_back({ scaffolds[i], static_cast<std::uint32_t>(c),
                            labels[i], i });
  }
  return lib;
}

ScaffoldLibrary sample_uniform(std::span<const chem::MolGraph> scaffolds,
                               std::span<const int> labels,
                               const ClusterModel &model, std::size_t n,
                               std::uint64_t seed) {
  check_library_inputs(scaffolds, labels, model, n);
  Rng rng(seed);
  ScaffoldLibrary lib;
  lib.entries.reserve(n);
  for (std::size_t draw = 0; draw < n; ++draw) {
    const std::size_t i = rng.below(scaffolds.size());
    lib.entries.push_back({ scaffolds[i], model.assignments[i], labels[i], i });
  }
  return lib;
}

std::vector<std::size_t> cluster_counts(const ScaffoldLibrary &lib,
                                        std::uint32_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (const auto &e: lib.entries) {
    if (e.cluster < k)
      ++counts[e.cluster];
  }
  return counts;
}

double normalized_entropy_gap(std::span<const std::size_t> counts) {
  if (counts.size() < 2)
    return 0.0;
  double total = 0.0;
  for (auto c: counts)
    total += static_cast<double>(c);
  if (total == 0.0)
    return 1.0;
  double h = 0.0;
  for (auto c: counts) {
    if (c == 0)
      continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return 1.0 - h / std::log(static_cast<double>(counts.size()));
}

void write_library(std::ostream &os, const ScaffoldLibrary &lib) {
  os << "scaffold_smiles,cluster_id,source_label\n";
  for (const auto &e: lib.entries)
    os << chem::to_smiles(e.scaffold) << ',' << e.cluster << ','
       << e.source_label << '\n';
}

ScaffoldLibrary read_library(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("scaffold_smiles,cluster_id,source_label", 0) != 0)
    throw HeaderError("library CSV must start with scaffold_smiles,cluster_id,source_label");
  ScaffoldLibrary lib;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw IoError("library line " + std::to_string(lineno) + ": expected 3 fields");
    try {
      lib.entries.push_back(
          { chem::parse_smiles(std::string_view(line).substr(0, c1)),
            static_cast<std::uint32_t>(std::stoul(line.substr(c1 + 1, c2 - c1 - 1))),
            std::stoi(line.substr(c2 + 1)), lib.entries.size() });
    } catch (const std::logic_error &) {
      throw IoError("library line " + std::to_string(lineno) + ": bad number");
    }
  }
  return lib;
}

}  // namespace scaffkit::sas
