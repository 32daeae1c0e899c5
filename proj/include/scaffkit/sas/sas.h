//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_SAS_SAS_H_
#define SCAFFKIT_SAS_SAS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "scaffkit/chem/mol_graph.h"
#include "scaffkit/fingerprint/fingerprint.h"

namespace scaffkit::sas {

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
  double tolerance = 1e-6;
};

struct ClusterModel {
  std::uint32_t k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<std::uint32_t> assignments;
  // NaN when the model is degenerate.
  double silhouette = 0.0;
  // Set when every fingerprint is identical; the model is then a single
  // cluster holding every point.
  bool degenerate = false;
  // Mean silhouette of the best restart for every k tried.
  std::map<std::uint32_t, double> silhouette_by_k;
};

// Euclidean distance between the 0/1 vectors.
double distance(const fp::Fingerprint &x, const fp::Fingerprint &y);

// Single k-means fit: k-means++ seeding, the lowest-inertia fit out of
// opts.restarts runs. Every returned cluster is nonempty.
ClusterModel kmeans(std::span<const fp::Fingerprint> points, std::uint32_t k,
                    std::uint64_t seed, const KMeansOptions &opts = {});

// Mean silhouette with Euclidean distance; a point alone in its cluster
// scores 0. Requires at least two clusters.
double silhouette(std::span<const fp::Fingerprint> points,
                  std::span<const std::uint32_t> assignments);

// Same, over a precomputed symmetric distance matrix.
double silhouette(const std::vector<std::vector<double>> &dist,
                  std::span<const std::uint32_t> assignments);

// Fits k-means for every k in [k_min, k_max] and keeps the model with the
// highest mean silhouette (lowest k on ties). k_max = 0 selects
// min(20, m - 1). Throws DegenerateInput with fewer than 3 points and
// std::invalid_argument for a range outside [2, m - 1]. All-identical
// input returns the single-cluster model flagged degenerate.
ClusterModel cluster_scaffolds(std::span<const fp::Fingerprint> fps,
                               std::uint32_t k_min, std::uint32_t k_max,
                               std::uint64_t seed,
                               const KMeansOptions &opts = {});

inline constexpr double kDefaultEpsilon = 1e-8;

struct SamplingWeights {
  std::vector<std::size_t> counts;
  std::vector<double> weights;
  std::vector<double> probabilities;
};

// w[c] = 1 / (N[c] + eps), normalized to probabilities. Cluster ids are
// taken as [0, max id]; an id with no members gets probability 0.
SamplingWeights sampling_weights(std::span<const std::uint32_t> assignments,
                                 double epsilon = kDefaultEpsilon);

struct LibraryEntry {
  chem::MolGraph scaffold;
  std::uint32_t cluster;
  int source_label;
  std::size_t source_index;
};

struct ScaffoldLibrary {
  std::vector<LibraryEntry> entries;
};

// Library size for a training set: round(0.1 * train_size), at least 1.
std::size_t library_size(std::size_t train_size);

// Draws n entries with replacement: the cluster by weights.probabilities,
// then a member uniformly within it. Throws std::invalid_argument for
// n = 0 or mismatched inputs.
ScaffoldLibrary sample_library(std::span<const chem::MolGraph> scaffolds,
                               std::span<const int> labels,
                               const ClusterModel &model,
                               const SamplingWeights &weights, std::size_t n,
                               std::uint64_t seed);

// Ablation: every scaffold equally likely regardless of its cluster.
ScaffoldLibrary sample_uniform(std::span<const chem::MolGraph> scaffolds,
                               std::span<const int> labels,
                               const ClusterModel &model, std::size_t n,
                               std::uint64_t seed);

// Library entries per cluster id in [0, k).
std::vector<std::size_t> cluster_counts(const ScaffoldLibrary &lib,
                                        std::uint32_t k);

// 1 - H(counts) / log(k) over k bins; 0 for a perfectly even spread.
double normalized_entropy_gap(std::span<const std::size_t> counts);

// CSV with header scaffold_smiles,cluster_id,source_label.
void write_library(std::ostream &os, const ScaffoldLibrary &lib);
ScaffoldLibrary read_library(std::istream &is);

}  // namespace scaffkit::sas

#endif  // SCAFFKIT_SAS_SAS_H_
