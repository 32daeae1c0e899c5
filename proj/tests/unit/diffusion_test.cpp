//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "scaffkit/chem/scaffold.h"
#include "scaffkit/chem/smiles.h"
#include "scaffkit/chem/valence.h"
#include "scaffkit/diffusion/diffusion.h"
#include "scaffkit/error.h"
#include "scaffkit/util/random.h"
#include "test_support.h"

namespace scaffkit::diffusion {
namespace {

using Catch::Matchers::WithinAbs;
using chem::parse_smiles;

Marginals marginals_of(std::initializer_list<const char *> smiles) {
  std::vector<chem::MolGraph> mols;
  for (auto s: smiles)
    mols.push_back(parse_smiles(s));
  return compute_marginals(mols);
}

TEST_CASE("compute_marginals", "[diffusion]") {
  SECTION("single carbon") {
    Marginals m = marginals_of({ "C" });
    CHECK(m.node_prior == std::vector<double> { 1.0 });
    CHECK(m.edge_prior == std::vector<double> { 1.0, 0.0, 0.0, 0.0, 0.0 });
    CHECK(m.size_hist == std::vector<double> { 0.0, 1.0 });
  }

  SECTION("ethanol") {
    Marginals m = marginals_of({ "CCO" });
    REQUIRE(m.vocab.size() == 2);
    auto c = *m.vocab.find({ chem::Element::kC });
    auto o = *m.vocab.find({ chem::Element::kO });
    CHECK_THAT(m.node_prior[c], WithinAbs(2.0 / 3.0, 1e-15));
    CHECK_THAT(m.node_prior[o], WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THAT(m.edge_prior[1], WithinAbs(2.0 / 3.0, 1e-15));
  }

  SECTION("benzene") {
    Marginals m = marginals_of({ "c1ccccc1" });
    CHECK_THAT(m.edge_prior[4], WithinAbs(0.4, 1e-15));
    CHECK_THAT(m.edge_prior[0], WithinAbs(0.6, 1e-15));
  }

  SECTION("vectors are normalized and extra types join with zero mass") {
    chem::AtomType nh { chem::Element::kN, true, 0, 1 };
    std::vector<chem::MolGraph> mols { parse_smiles("CCO"), parse_smiles("c1ccccc1CN") };
    Marginals m = compute_marginals(mols, std::vector<chem::AtomType> { nh });
    double sn = 0, se = 0, sh = 0;
    for (double v: m.node_prior)
      sn += v;
    for (double v: m.edge_prior)
      se += v;
    for (double v: m.size_hist)
      sh += v;
    CHECK_THAT(sn, WithinAbs(1.0, 1e-12));
    CHECK_THAT(se, WithinAbs(1.0, 1e-12));
    CHECK_THAT(sh, WithinAbs(1.0, 1e-12));
    REQUIRE(m.vocab.find(nh));
    CHECK(m.node_prior[*m.vocab.find(nh)] == 0.0);
  }
}

TEST_CASE("transition matrices", "[diffusion]") {
  Marginals m = marginals_of({ "CCO", "c1ccccc1N", "CC(=O)O" });
  Schedule sched(50);
  CHECK(sched.alpha_bar(0) == 1.0);
  CHECK(sched.alpha_bar(50) < 1e-6);

  Transition q0 = transition(0, m, sched);
  for (std::uint32_t i = 0; i < q0.nodes.dim; ++i)
    for (std::uint32_t j = 0; j < q0.nodes.dim; ++j)
      CHECK(q0.nodes(i, j) == (i == j ? 1.0 : 0.0));

  Transition qT = transition(50, m, sched);
  for (std::uint32_t i = 0; i < qT.edges.dim; ++i)
    for (std::uint32_t j = 0; j < qT.edges.dim; ++j)
      CHECK_THAT(qT.edges(i, j), WithinAbs(m.edge_prior[j], 1e-3));

  for (std::uint32_t t = 0; t <= 50; ++t) {
    for (const Transition &q: { transition(t, m, sched),
                                t > 0 ? step_transition(t, m, sched) : q0 }) {
      for (const Matrix *mat: { &q.nodes, &q.edges }) {
        for (std::uint32_t i = 0; i < mat->dim; ++i) {
          double sum = 0;
          for (std::uint32_t j = 0; j < mat->dim; ++j) {
            CHECK((*mat)(i, j) >= 0.0);
            sum += (*mat)(i, j);
          }
          CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
        }
      }
    }
  }

  SECTION("step matrices compose to the cumulative one") {
    std::vector<double> prod(m.edge_prior.size() * m.edge_prior.size(), 0.0);
    const auto d = static_cast<std::uint32_t>(m.edge_prior.size());
    for (std::uint32_t i = 0; i < d; ++i)
      prod[i * d + i] = 1.0;
    for (std::uint32_t t = 1; t <= 20; ++t) {
      Matrix s = step_transition(t, m, sched).edges;
      std::vector<double> next(d * d, 0.0);
      for (std::uint32_t i = 0; i < d; ++i)
        for (std::uint32_t k = 0; k < d; ++k)
          for (std::uint32_t j = 0; j < d; ++j)
            next[i * d + j] += prod[i * d + k] * s(k, j);
      prod = next;
    }
    Matrix cum = transition(20, m, sched).edges;
    for (std::uint32_t i = 0; i < d; ++i)
      for (std::uint32_t j = 0; j < d; ++j)
        CHECK_THAT(prod[i * d + j], WithinAbs(cum(i, j), 1e-12));
  }
}

TEST_CASE("sample_prior", "[diffusion]") {
  Schedule sched(10);
  SECTION("delta prior") {
    Marginals m = marginals_of({ "C" });
    DiffusionState s = sample_prior(7, m, sched, 1);
    CHECK(s.t == 10);
    for (auto c: s.nodes)
      CHECK(c == 0);
  }

  SECTION("frequencies, symmetry and diagonal") {
    Marginals m = marginals_of({ "CCO", "c1ccccc1N", "CC(=O)OCl" });
    const std::uint32_t a = m.vocab.size();
    std::vector<double> counts(a, 0.0);
    const int draws = 10000;
    for (int d = 0; d < draws; ++d) {
      DiffusionState s = sample_prior(50, m, sched, derive_seed(5, d));
      for (auto c: s.nodes)
        counts[c] += 1;
      if (d < 200) {
        for (std::uint32_t i = 0; i < 50; ++i) {
          CHECK(s.edge(i, i) == kEdgeNone);
          for (std::uint32_t j = 0; j < 50; ++j)
            CHECK(s.edge(i, j) == s.edge(j, i));
        }
      }
    }
    const double total = 50.0 * draws;
    for (std::uint32_t c = 0; c < a; ++c) {
      const double p = m.node_prior[c];
      const double sigma = std::sqrt(total * p * (1 - p));
      CHECK(std::abs(counts[c] - total * p) <= 3 * sigma);
    }
  }
}

TEST_CASE("forward noising converges to the prior", "[diffusion]") {
  Marginals m = marginals_of({ "CCO", "c1ccccc1N", "CC(=O)OCl" });
  Schedule sched(50);
  Transition qT = transition(50, m, sched);
  Rng rng(17);
  const std::uint32_t x0 = 0;
  std::vector<double> counts(m.vocab.size(), 0.0);
  const int trials = 10000;
  std::span<const double> row(qT.nodes.data.data() + x0 * qT.nodes.dim, qT.nodes.dim);
  for (int i = 0; i < trials; ++i)
    counts[rng.categorical(row)] += 1;
  for (std::uint32_t c = 0; c < m.vocab.size(); ++c) {
    const double p = m.node_prior[c];
    CHECK(std::abs(counts[c] - trials * p) <= 3 * std::sqrt(trials * p * (1 - p)) + 1e-9);
  }
}

// Bayes' rule with the cumulative matrix built as a product of step
// matrices, independent of posterior().
std::vector<double> brute_posterior(std::uint32_t x_t, const std::vector<double> &p_hat,
                                    const Marginals &m, const Schedule &sched,
                                    std::uint32_t t) {
  const std::uint32_t d = m.vocab.size();
  std::vector<double> cum(d * d, 0.0);
  for (std::uint32_t i = 0; i < d; ++i)
    cum[i * d + i] = 1.0;
  for (std::uint32_t s = 1; s < t; ++s) {
    Matrix q = step_transition(s, m, sched).nodes;
    std::vector<double> next(d * d, 0.0);
    for (std::uint32_t i = 0; i < d; ++i)
      for (std::uint32_t k = 0; k < d; ++k)
        for (std::uint32_t j = 0; j < d; ++j)
          next[i * d + j] += cum[i * d + k] * q(k, j);
    cum = next;
  }
  Matrix step = step_transition(t, m, sched).nodes;
  std::vector<double> out(d, 0.0);
  for (std::uint32_t x0 = 0; x0 < d; ++x0) {
    // q(x_t | x0) = sum_x q(x_t | x) q(x | x0)
    double evidence = 0;
    for (std::uint32_t x = 0; x < d; ++x)
      evidence += step(x, x_t) * cum[x0 * d + x];
    for (std::uint32_t x = 0; x < d; ++x)
      out[x] += p_hat[x0] * step(x, x_t) * cum[x0 * d + x] / evidence;
  }
  return out;
}

TEST_CASE("posterior_step", "[diffusion]") {
  Marginals m = marginals_of({ "CCO", "c1ccccc1N", "CC(=O)OCl" });
  const std::uint32_t a = m.vocab.size();
  Schedule sched(5);

  SECTION("single-position posterior against Bayes enumeration") {
    Rng rng(3);
    for (std::uint32_t t = 1; t <= 5; ++t) {
      for (std::uint32_t x_t = 0; x_t < a; ++x_t) {
        std::vector<double> p_hat(a);
        double z = 0;
        for (auto &v: p_hat)
          z += (v = rng.uniform());
        for (auto &v: p_hat)
          v /= z;
        auto got = posterior(x_t, p_hat, step_transition(t, m, sched).nodes,
                             transition(t - 1, m, sched).nodes);
        auto want = brute_posterior(x_t, p_hat, m, sched, t);
        double sum = 0;
        for (std::uint32_t c = 0; c < a; ++c) {
          CHECK_THAT(got[c], WithinAbs(want[c], 1e-12));
          sum += got[c];
        }
        CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
      }
    }
  }

  SECTION("sampled three-atom graphs track the enumerated joint posterior") {
    DiffusionState s = sample_prior(3, m, sched, 8);
    s.t = 2;
    MarginalDenoiser den;
    DenoiserOutput pred = den.predict(s, m);
    // Joint over the three node categories is the product of the
    // per-position posteriors.
    std::vector<std::vector<double>> rows;
    for (std::uint32_t i = 0; i < 3; ++i) {
      std::vector<double> p(pred.node_row(i).begin(), pred.node_row(i).end());
      rows.push_back(brute_posterior(s.nodes[i], p, m, sched, 2));
    }
    std::map<std::array<std::uint32_t, 3>, double> freq;
    const int draws = 20000;
    for (int d = 0; d < draws; ++d) {
      DiffusionState n = posterior_step(s, pred, m, sched, derive_seed(1, d));
      CHECK(n.t == 1);
      freq[{ n.nodes[0], n.nodes[1], n.nodes[2] }] += 1.0 / draws;
    }
    for (const auto &[key, f]: freq) {
      double p = rows[0][key[0]] * rows[1][key[1]] * rows[2][key[2]];
      CHECK(std::abs(f - p) <= 4 * std::sqrt(p * (1 - p) / draws) + 1e-4);
    }
  }

  SECTION("echo prediction at t = 1 returns the noisy graph") {
    DiffusionState s = sample_prior(4, m, sched, 21);
    s.t = 1;
    anchor(s, parse_smiles("CO"), m.vocab);
    OneHotEchoDenoiser echo;
    StepStats stats;
    DiffusionState n = posterior_step(s, echo.predict(s, m), m, sched, 4, &stats);
    CHECK(n.t == 0);
    CHECK(n.nodes == s.nodes);
    CHECK(n.edges == s.edges);
    CHECK(stats.max_row_error < 1e-9);
  }

  SECTION("masked positions always hold the scaffold") {
    DiffusionState s = sample_prior(9, m, sched, 2);
    anchor(s, parse_smiles("c1ccccc1"), m.vocab);
    MarginalDenoiser den;
    for (int i = 0; i < 200; ++i) {
      DiffusionState n = posterior_step(s, den.predict(s, m), m, sched, derive_seed(9, i));
      CHECK(mask_holds(n));
    }
  }

  SECTION("shape mismatch") {
    DiffusionState s = sample_prior(4, m, sched, 2);
    DiffusionState other = sample_prior(5, m, sched, 2);
    MarginalDenoiser den;
    CHECK_THROWS_AS(posterior_step(s, den.predict(other, m), m, sched, 1), ShapeMismatch);
    DenoiserOutput bad = den.predict(s, m);
    bad.node_categories += 1;
    CHECK_THROWS_AS(posterior_step(s, bad, m, sched, 1), ShapeMismatch);
  }
}

std::vector<chem::MolGraph> corpus_scaffolds(std::size_t count) {
  std::vector<chem::MolGraph> out;
  std::set<std::string> seen;
  for (const auto &row: test::read_fixture("nci_sample500.csv")) {
    auto s = chem::murcko_scaffold(parse_smiles(row.at("smiles")));
    if (!s || s->num_atoms() > 14 || !seen.insert(chem::scaffold_key(s)).second)
      continue;
    out.push_back(*s);
    if (out.size() == count)
      break;
  }
  return out;
}

Marginals corpus_marginals(const std::vector<chem::MolGraph> &scaffolds) {
  std::vector<chem::MolGraph> mols;
  for (const auto &row: test::read_fixture("nci_sample500.csv"))
    mols.push_back(parse_smiles(row.at("smiles")));
  std::vector<chem::AtomType> extra;
  for (const auto &s: scaffolds)
    extra.insert(extra.end(), s.atoms().begin(), s.atoms().end());
  return compute_marginals(mols, extra);
}

TEST_CASE("extend_scaffold", "[diffusion]") {
  auto scaffolds = corpus_scaffolds(4);
  REQUIRE(scaffolds.size() == 4);
  Marginals m = corpus_marginals(scaffolds);
  MarginalDenoiser den;

  for (std::size_t i = 0; i < scaffolds.size(); ++i) {
    const auto &s = scaffolds[i];
    bool mask_ok = true;
    ExtendOptions opts;
    opts.observer = [&](const DiffusionState &st) { mask_ok = mask_ok && mask_holds(st); };
    chem::MolGraph out = extend_scaffold(s, den, m, derive_seed(4, i), opts);
    CHECK(mask_ok);
    CHECK(out.num_atoms() > s.num_atoms());
    CHECK(test::anchored_subgraph(s, out));
    CHECK(extend_scaffold(s, den, m, derive_seed(4, i)) == out);
  }

  SECTION("oversized scaffolds fall back to n' + 5") {
    Marginals small = marginals_of({ "CC", "CCC" });
    chem::MolGraph ring = parse_smiles("C1CCCC1");
    bool saw = false;
    ExtendOptions opts;
    opts.steps = 3;
    opts.observer = [&](const DiffusionState &st) {
      saw = true;
      CHECK(st.n == 10);
    };
    extend_scaffold(ring, den, small, 1, opts);
    CHECK(saw);
    CHECK_THROWS_AS(extend_scaffold(parse_smiles("c1ccccc1"), den, small, 1, opts),
                    std::invalid_argument);
  }

  CHECK_THROWS_AS(extend_scaffold(chem::MolGraph {}, den, m, 1), std::invalid_argument);
}

TEST_CASE("decode keeps the scaffold component", "[diffusion]") {
  Marginals m = marginals_of({ "CCO" });
  DiffusionState s;
  s.n = 5;
  s.nodes = { 0, 0, 1, 0, 0 };
  s.edges.assign(25, kEdgeNone);
  s.set_edge(0, 1, 1);
  s.set_edge(1, 2, 1);
  s.set_edge(3, 4, 2);
  chem::MolGraph g = decode(s, m.vocab);
  CHECK(g.num_atoms() == 3);
  CHECK(g.num_bonds() == 2);
}

TEST_CASE("generate_gdsa", "[diffusion]") {
  auto scaffolds = corpus_scaffolds(6);
  Marginals m = corpus_marginals(scaffolds);
  sas::ScaffoldLibrary lib;
  for (std::size_t i = 0; i < 30; ++i)
    lib.entries.push_back({ scaffolds[i % scaffolds.size()], 0, 1, i % scaffolds.size() });
  MarginalDenoiser den;
  GenerationReport report;
  auto out = generate_gdsa(lib, den, m, 77, {}, &report);
  CHECK(report.attempted == 30);
  CHECK(report.valid == out.size());
  CHECK(out.size() <= lib.entries.size());
  std::string first;
  for (const auto &g: out) {
    CHECK(chem::check_valence(g.mol).valid);
    CHECK(test::anchored_subgraph(lib.entries[g.library_index].scaffold, g.mol));
    first += chem::to_smiles(g.mol) + "\n";
  }
  std::string second;
  for (const auto &g: generate_gdsa(lib, den, m, 77))
    second += chem::to_smiles(g.mol) + "\n";
  CHECK(first == second);
  CHECK_THROWS_AS(generate_gdsa(sas::ScaffoldLibrary {}, den, m, 1), std::invalid_argument);
}

TEST_CASE("external denoiser protocol", "[diffusion]") {
  Marginals m = marginals_of({ "CCO", "c1ccccc1N" });
  Schedule sched(4);
  DiffusionState s = sample_prior(6, m, sched, 12);

  SECTION("the echo tool matches the in-process echo") {
    ExternalDenoiser ext(SCAFFKIT_ECHO_DENOISER);
    OneHotEchoDenoiser echo;
    for (int i = 0; i < 3; ++i) {
      DenoiserOutput x = ext.predict(s, m), y = echo.predict(s, m);
      CHECK(x.node_probs == y.node_probs);
      CHECK(x.edge_probs == y.edge_probs);
      s = posterior_step(s, x, m, sched, derive_seed(3, i));
    }
  }

  SECTION("codec") {
    std::string req = encode_request(s, m);
    CHECK(req.find("\"t\":4") != std::string::npos);
    DenoiserOutput out = decode_response(
        R"({"node_probs": [[0.5, 0.5, 0, 0], [1, 0, 0, 0]], "edge_probs": [[0, 1, [0.2, 0.8, 0, 0, 0]]]})",
        2, 4);
    CHECK(out.edge_row(1, 0)[1] == 0.8);
    CHECK(out.edge_row(0, 0)[0] == 1.0);
    CHECK_THROWS_AS(decode_response(R"({"node_probs": [[0.5, 0.4, 0, 0]]})", 1, 4),
                    ProtocolError);
    CHECK_THROWS_AS(decode_response("not json", 1, 4), ProtocolError);
    CHECK_THROWS_AS(decode_response(R"({"node_probs": [[1, 0]]})", 1, 4), ProtocolError);
    try {
      decode_response(R"({"node_probs": 3})", 1, 4);
      FAIL("expected ProtocolError");
    } catch (const ProtocolError &e) {
      CHECK(std::string(e.what()).find(R"({"node_probs": 3})") != std::string::npos);
    }
  }

  SECTION("a misbehaving child process") {
    ExternalDenoiser silent("true");
    CHECK_THROWS_AS(silent.predict(s, m), ProtocolError);
    ExternalDenoiser garbage("while read l; do echo oops; done");
    CHECK_THROWS_AS(garbage.predict(s, m), ProtocolError);
  }
}

}  // namespace
}  // namespace scaffkit::diffusion
