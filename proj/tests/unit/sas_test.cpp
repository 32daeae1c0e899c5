//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/error.h"
#include "scaffkit/sas/sas.h"
#include "scaffkit/util/random.h"
#include "test_support.h"

namespace scaffkit::sas {
namespace {

using Catch::Matchers::WithinAbs;
using fp::Fingerprint;

Fingerprint random_fp(Rng &rng, std::uint32_t nbits, double density) {
  Fingerprint f(nbits, 2);
  for (std::uint32_t b = 0; b < nbits; ++b)
    if (rng.uniform() < density)
      f.set(b);
  return f;
}

Fingerprint flipped(const Fingerprint &base, Rng &rng, int flips) {
  auto hex = base.to_hex();
  Fingerprint f = Fingerprint::from_hex(hex);
  for (int i = 0; i < flips; ++i) {
    auto b = static_cast<std::uint32_t>(rng.below(base.nbits()));
    Fingerprint g(base.nbits(), 2);
    for (auto on: f.on_bits())
      if (on != b)
        g.set(on);
    if (!f.test(b))
      g.set(b);
    f = g;
  }
  return f;
}

// Literal silhouette over dense 0/1 vectors.
double brute_silhouette(const std::vector<std::vector<int>> &pts,
                        const std::vector<std::uint32_t> &assign) {
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t d = 0; d < pts[i].size(); ++d)
      s += (pts[i][d] - pts[j][d]) * (pts[i][d] - pts[j][d]);
    return std::sqrt(s);
  };
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double a = 0;
    int na = 0;
    std::map<std::uint32_t, std::pair<double, int>> other;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i)
        continue;
      if (assign[j] == assign[i]) {
        a += dist(i, j);
        ++na;
      } else {
        other[assign[j]].first += dist(i, j);
        other[assign[j]].second += 1;
      }
    }
    if (na == 0)
      continue;
    a /= na;
    double b = 1e300;
    for (auto &[c, s]: other)
      b = std::min(b, s.first / s.second);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(pts.size());
}

Fingerprint from_dense(const std::vector<int> &v) {
  Fingerprint f(static_cast<std::uint32_t>(v.size()), 2);
  for (std::uint32_t i = 0; i < v.size(); ++i)
    if (v[i])
      f.set(i);
  return f;
}

TEST_CASE("cluster_scaffolds separates two blobs", "[sas]") {
  Rng rng(7);
  Fingerprint a = random_fp(rng, 1024, 0.05), b = random_fp(rng, 1024, 0.05);
  std::vector<Fingerprint> pts;
  for (int i = 0; i < 10; ++i)
    pts.push_back(flipped(a, rng, static_cast<int>(rng.below(3))));
  for (int i = 0; i < 10; ++i)
    pts.push_back(flipped(b, rng, static_cast<int>(rng.below(3))));

  ClusterModel m = cluster_scaffolds(pts, 2, 5, 99);
  REQUIRE(m.k == 2);
  for (int i = 1; i < 10; ++i) {
    CHECK(m.assignments[i] == m.assignments[0]);
    CHECK(m.assignments[10 + i] == m.assignments[10]);
  }
  CHECK(m.assignments[0] != m.assignments[10]);
  for (const auto &[k, s]: m.silhouette_by_k)
    CHECK(m.silhouette >= s);
  CHECK(m.silhouette_by_k.size() == 4);

  SECTION("bit-reproducible under a seed") {
    ClusterModel again = cluster_scaffolds(pts, 2, 5, 99);
    CHECK(again.assignments == m.assignments);
    CHECK(again.centroids == m.centroids);
    CHECK(again.silhouette == m.silhouette);
  }

  SECTION("default range is [2, min(20, m - 1)]") {
    ClusterModel d = cluster_scaffolds(pts, 2, 0, 99);
    CHECK(d.silhouette_by_k.rbegin()->first == 19);
  }
}

TEST_CASE("cluster_scaffolds edge cases", "[sas]") {
  Rng rng(3);
  Fingerprint a = random_fp(rng, 64, 0.3);

  SECTION("identical fingerprints are flagged degenerate") {
    std::vector<Fingerprint> same(5, a);
    ClusterModel m = cluster_scaffolds(same, 2, 4, 1);
    CHECK(m.degenerate);
    CHECK(m.k == 1);
    CHECK(std::isnan(m.silhouette));
    CHECK(m.assignments == std::vector<std::uint32_t>(5, 0));
  }

  SECTION("three scaffolds into two clusters") {
    std::vector<Fingerprint> pts { a, random_fp(rng, 64, 0.3), random_fp(rng, 64, 0.3) };
    ClusterModel m = cluster_scaffolds(pts, 2, 2, 5);
    CHECK(m.k == 2);
    std::set<std::uint32_t> ids(m.assignments.begin(), m.assignments.end());
    CHECK(ids == std::set<std::uint32_t> { 0, 1 });
  }

  SECTION("preconditions") {
    std::vector<Fingerprint> two { a, a };
    CHECK_THROWS_AS(cluster_scaffolds(two, 2, 2, 1), DegenerateInput);
    std::vector<Fingerprint> four(4, a);
    four[1] = random_fp(rng, 64, 0.3);
    CHECK_THROWS_AS(cluster_scaffolds(four, 1, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(cluster_scaffolds(four, 2, 4, 1), std::invalid_argument);
    four[2] = Fingerprint(128, 2);
    CHECK_THROWS_AS(cluster_scaffolds(four, 2, 3, 1), WidthMismatch);
  }

  SECTION("more clusters than distinct points keeps every cluster nonempty") {
    Fingerprint b = random_fp(rng, 64, 0.3);
    std::vector<Fingerprint> pts { a, a, a, b, b, b };
    ClusterModel m = kmeans(pts, 4, 2);
    std::vector<int> size(4, 0);
    for (auto c: m.assignments)
      ++size[c];
    for (int s: size)
      CHECK(s > 0);
  }
}

TEST_CASE("silhouette", "[sas]") {
  SECTION("two singletons") {
    std::vector<Fingerprint> pts { from_dense({ 1, 0, 0 }), from_dense({ 0, 1, 1 }) };
    std::vector<std::uint32_t> assign { 0, 1 };
    CHECK(silhouette(pts, assign) == 0.0);
  }

  SECTION("six-point fixture against the literal formula") {
    std::vector<std::vector<int>> dense {
      { 1, 1, 0, 0, 0, 0, 0, 0 }, { 1, 1, 1, 0, 0, 0, 0, 0 },
      { 1, 0, 0, 0, 0, 0, 0, 0 }, { 0, 0, 0, 0, 1, 1, 1, 1 },
      { 0, 0, 0, 0, 1, 1, 1, 0 }, { 0, 0, 0, 1, 1, 1, 1, 1 },
    };
    std::vector<std::uint32_t> assign { 0, 0, 0, 1, 1, 1 };
    std::vector<Fingerprint> pts;
    for (auto &d: dense)
      pts.push_back(from_dense(d));
    double s = silhouette(pts, assign);
    CHECK_THAT(s, WithinAbs(brute_silhouette(dense, assign), 1e-12));
    CHECK(s > 0.5);

    std::vector<std::uint32_t> mixed { 0, 1, 0, 1, 0, 1 };
    CHECK_THAT(silhouette(pts, mixed), WithinAbs(brute_silhouette(dense, mixed), 1e-12));
  }

  SECTION("separation drives the value to one") {
    std::vector<std::vector<int>> dense;
    std::vector<std::uint32_t> assign;
    for (int c = 0; c < 2; ++c) {
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<int> v(200, 0);
        for (int i = 0; i < 100; ++i)
          v[c * 100 + i] = 1;
        v[c * 100 + rep] = 0;
        dense.push_back(v);
        assign.push_back(c);
      }
    }
    std::vector<Fingerprint> pts;
    for (auto &d: dense)
      pts.push_back(from_dense(d));
    CHECK(silhouette(pts, assign) > 0.85);
  }

  SECTION("equidistant point scores zero") {
    // Point 2 is at distance 1 from both 0 and 1; 0 and 1 share its cluster
    // and the other one respectively.
    std::vector<std::vector<double>> d {
      { 0, 2, 1 }, { 2, 0, 1 }, { 1, 1, 0 },
    };
    std::vector<std::uint32_t> assign { 0, 1, 0 };
    // a(2) = 1, b(2) = 1
    double s2 = 0.0;
    double s0 = (2.0 - 1.0) / 2.0;
    CHECK_THAT(silhouette(d, assign), WithinAbs((s0 + 0.0 + s2) / 3.0, 1e-12));
  }

  CHECK_THROWS_AS(silhouette(std::vector<std::vector<double>> { { 0, 1 }, { 1, 0 } },
                             std::vector<std::uint32_t> { 0, 0 }),
                  std::invalid_argument);
}

TEST_CASE("sampling_weights", "[sas]") {
  SECTION("counts {3, 1}") {
    std::vector<std::uint32_t> assign { 0, 0, 0, 1 };
    SamplingWeights w = sampling_weights(assign, 1e-8);
    CHECK(w.counts == std::vector<std::size_t> { 3, 1 });
    CHECK(w.weights[0] == 1.0 / (3.0 + 1e-8));
    CHECK(w.weights[1] == 1.0 / (1.0 + 1e-8));
    CHECK_THAT(w.probabilities[0], WithinAbs(0.25, 1e-8));
    CHECK_THAT(w.probabilities[1], WithinAbs(0.75, 1e-8));
  }

  SECTION("symmetric counts") {
    std::vector<std::uint32_t> assign { 0, 1, 0, 1, 0, 1, 0, 1, 0, 1 };
    SamplingWeights w = sampling_weights(assign);
    CHECK(w.probabilities[0] == 0.5);
    CHECK(w.probabilities[1] == 0.5);
  }

  SECTION("single cluster") {
    SamplingWeights w = sampling_weights(std::vector<std::uint32_t> { 0, 0 });
    CHECK(w.probabilities == std::vector<double> { 1.0 });
  }

  SECTION("normalization and inverse-count ordering on random assignments") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::uint32_t> assign(1 + rng.below(60));
      const auto k = static_cast<std::uint32_t>(1 + rng.below(8));
      for (std::size_t i = 0; i < assign.size(); ++i)
        assign[i] = i < k ? static_cast<std::uint32_t>(i)
                          : static_cast<std::uint32_t>(rng.below(k));
      SamplingWeights w = sampling_weights(assign);
      double sum = 0;
      for (double p: w.probabilities)
        sum += p;
      CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
      for (std::size_t a = 0; a < w.counts.size(); ++a)
        for (std::size_t b = 0; b < w.counts.size(); ++b)
          if (w.counts[a] > 0 && w.counts[a] < w.counts[b])
            CHECK(w.probabilities[a] > w.probabilities[b]);
    }
  }

  CHECK_THROWS_AS(sampling_weights(std::vector<std::uint32_t> {}), std::invalid_argument);
}

struct LibraryFixture {
  std::vector<chem::MolGraph> scaffolds;
  std::vector<int> labels;
  ClusterModel model;

  LibraryFixture() {
    for (auto smi: { "c1ccccc1", "c1ccncc1", "C1CCCCC1", "C1CCNCC1" })
      scaffolds.push_back(chem::parse_smiles(smi));
    labels = { 1, 1, 1, 1 };
    model.k = 2;
    model.assignments = { 0, 0, 0, 1 };
  }
};

TEST_CASE("sample_library", "[sas]") {
  LibraryFixture fx;
  SamplingWeights w = sampling_weights(fx.model.assignments);

  SECTION("cluster frequencies follow the weights") {
    const std::size_t n = 100000;
    ScaffoldLibrary lib = sample_library(fx.scaffolds, fx.labels, fx.model, w, n, 5);
    REQUIRE(lib.entries.size() == n);
    auto counts = cluster_counts(lib, 2);
    const double p = 0.75;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(static_cast<double>(counts[1]) - n * p) < 3 * sigma);

    // Chi-square goodness of fit at significance 0.001.
    double stat = 0;
    for (int c = 0; c < 2; ++c) {
      double expected = n * w.probabilities[c];
      stat += std::pow(counts[c] - expected, 2) / expected;
    }
    boost::math::chi_squared dist(1);
    CHECK(stat < boost::math::quantile(dist, 0.999));

    for (const auto &e: lib.entries) {
      CHECK(e.cluster == fx.model.assignments[e.source_index]);
      CHECK(e.scaffold == fx.scaffolds[e.source_index]);
    }
  }

  SECTION("a single cluster") {
    ClusterModel one = fx.model;
    one.assignments = { 0, 0, 0, 0 };
    SamplingWeights w1 = sampling_weights(one.assignments);
    ScaffoldLibrary lib = sample_library(fx.scaffolds, fx.labels, one, w1, 50, 1);
    for (const auto &e: lib.entries)
      CHECK(e.cluster == 0);
  }

  SECTION("seeded and validated") {
    auto a = sample_library(fx.scaffolds, fx.labels, fx.model, w, 30, 9);
    auto b = sample_library(fx.scaffolds, fx.labels, fx.model, w, 30, 9);
    std::stringstream sa, sb;
    write_library(sa, a);
    write_library(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK_THROWS_AS(sample_library(fx.scaffolds, fx.labels, fx.model, w, 0, 9),
                    std::invalid_argument);

    ScaffoldLibrary back = read_library(sa);
    REQUIRE(back.entries.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(test::isomorphic(back.entries[i].scaffold, a.entries[i].scaffold));
      CHECK(back.entries[i].cluster == a.entries[i].cluster);
    }
  }

  SECTION("weighted sampling evens out clusters relative to the ablation") {
    auto weighted = sample_library(fx.scaffolds, fx.labels, fx.model, w, 4000, 2);
    auto uniform = sample_uniform(fx.scaffolds, fx.labels, fx.model, 4000, 2);
    CHECK(normalized_entropy_gap(cluster_counts(weighted, 2))
          < normalized_entropy_gap(cluster_counts(uniform, 2)));
  }
}

TEST_CASE("library sizing and entropy gap", "[sas]") {
  CHECK(library_size(1200) == 120);
  CHECK(library_size(3) == 1);
  CHECK(library_size(25) == 3);
  CHECK_THAT(normalized_entropy_gap(std::vector<std::size_t> { 5, 5, 5 }), WithinAbs(0.0, 1e-12));
  CHECK_THAT(normalized_entropy_gap(std::vector<std::size_t> { 9, 0 }), WithinAbs(1.0, 1e-12));
}

}  // namespace
}  // namespace scaffkit::sas
