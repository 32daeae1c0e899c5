//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_DIFFUSION_DIFFUSION_H_
#define SCAFFKIT_DIFFUSION_DIFFUSION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "scaffkit/chem/mol_graph.h"
#include "scaffkit/sas/sas.h"

namespace scaffkit::diffusion {

// Edge categories: 0 is "no bond", the rest follow chem::BondOrder.
inline constexpr std::uint32_t kEdgeNone = 0;
inline constexpr std::uint32_t kEdgeCategories = 5;

inline std::uint32_t edge_category(chem::BondOrder order) {
  return static_cast<std::uint32_t>(order);
}

// Node categories are the distinct atom types seen in the data.
class Vocabulary {
public:
  std::uint32_t add(const chem::AtomType &type);
  std::optional<std::uint32_t> find(const chem::AtomType &type) const;
  const chem::AtomType &type(std::uint32_t id) const { return types_[id]; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(types_.size()); }

private:
  std::vector<chem::AtomType> types_;
};

struct Marginals {
  Vocabulary vocab;
  std::vector<double> node_prior;
  std::vector<double> edge_prior;
  // size_hist[n] is the probability of an n-atom molecule.
  std::vector<double> size_hist;
};

// Node frequencies over all atoms, edge frequencies over all unordered atom
// pairs (absent pairs count as "no bond"), normalized size histogram. Atom
// types in extra_types join the vocabulary with zero prior mass so that
// scaffolds using them can be anchored. A dataset without any atom pair has
// the all-"none" edge prior.
Marginals compute_marginals(std::span<const chem::MolGraph> mols,
                            std::span<const chem::AtomType> extra_types = {});

// Cosine schedule with alpha_bar(0) = 1.
class Schedule {
public:
  explicit Schedule(std::uint32_t steps, double s0 = 0.008);

  std::uint32_t steps() const { return steps_; }
  double alpha_bar(std::uint32_t t) const { return alpha_bar_[t]; }
  // alpha_bar(t) / alpha_bar(t - 1), for t >= 1.
  double alpha(std::uint32_t t) const;

private:
  std::uint32_t steps_;
  std::vector<double> alpha_bar_;
};

// Row-stochastic d x d matrix in row-major order.
struct Matrix {
  std::uint32_t dim = 0;
  std::vector<double> data;

  double operator()(std::uint32_t i, std::uint32_t j) const {
    return data[static_cast<std::size_t>(i) * dim + j];
  }
};

// coef * I + (1 - coef) * 1 prior^T
Matrix marginal_transition(std::span<const double> prior, double coef);

struct Transition {
  Matrix nodes;
  Matrix edges;
};

// Cumulative noise from the clean graph to step t (alpha_bar(t)).
Transition transition(std::uint32_t t, const Marginals &priors,
                      const Schedule &schedule);
// Single-step noise from t - 1 to t (alpha(t)), t >= 1.
Transition step_transition(std::uint32_t t, const Marginals &priors,
                           const Schedule &schedule);

// Dense categorical graph. edges is n x n, symmetric, "none" on the
// diagonal. The first `anchored` atoms and every pair among them are fixed
// to the scaffold.
struct DiffusionState {
  std::uint32_t t = 0;
  std::uint32_t n = 0;
  std::vector<std::uint32_t> nodes;
  std::vector<std::uint8_t> edges;

  std::uint32_t anchored = 0;
  std::vector<std::uint32_t> scaffold_nodes;
  // anchored x anchored
  std::vector<std::uint8_t> scaffold_edges;

  std::uint8_t edge(std::uint32_t i, std::uint32_t j) const {
    return edges[static_cast<std::size_t>(i) * n + j];
  }
  void set_edge(std::uint32_t i, std::uint32_t j, std::uint8_t c) {
    edges[static_cast<std::size_t>(i) * n + j] = c;
    edges[static_cast<std::size_t>(j) * n + i] = c;
  }
  bool node_masked(std::uint32_t i) const { return i < anchored; }
  bool edge_masked(std::uint32_t i, std::uint32_t j) const {
    return i < anchored && j < anchored;
  }
};

// Anchors scaffold s at atoms [0, n'): sets the mask and scaffold
// categories, then overwrites those positions. Throws
// std::invalid_argument if s does not fit or uses an atom type outside
// the vocabulary.
void anchor(DiffusionState &state, const chem::MolGraph &s,
            const Vocabulary &vocab);

// The masked overwrite: scaffold positions take the scaffold categories.
void apply_mask(DiffusionState &state);

// Whether every masked position holds its scaffold category.
bool mask_holds(const DiffusionState &state);

struct DenoiserOutput {
  std::uint32_t n = 0;
  std::uint32_t node_categories = 0;
  // n x node_categories
  std::vector<double> node_probs;
  // n x n x kEdgeCategories, symmetric
  std::vector<double> edge_probs;

  std::span<const double> node_row(std::uint32_t i) const {
    return { node_probs.data() + static_cast<std::size_t>(i) * node_categories,
             node_categories };
  }
  std::span<const double> edge_row(std::uint32_t i, std::uint32_t j) const {
    return { edge_probs.data()
                 + (static_cast<std::size_t>(i) * n + j) * kEdgeCategories,
             kEdgeCategories };
  }
};

// Draws n i.i.d. nodes and, for i < j, i.i.d. edges; returns t = T.
DiffusionState sample_prior(std::uint32_t n, const Marginals &priors,
                            const Schedule &schedule, std::uint64_t seed);

// Posterior over x_{t-1} for one position:
//   sum_x0 p_hat(x0) q(x_{t-1} | x_t, x0),
// with q(x_{t-1} | x_t, x0) proportional to Q_t[x_{t-1}, x_t] Qbar_{t-1}[x0, x_{t-1}].
// Clean categories that cannot reach x_t drop out and the remaining
// weights are renormalized; when none remain the result is one-hot at x_t.
std::vector<double> posterior(std::uint32_t x_t, std::span<const double> p_hat,
                              const Matrix &step, const Matrix &cumulative_prev);

struct StepStats {
  // Largest |sum - 1| over all posterior rows of the step.
  double max_row_error = 0.0;
};

// One reverse step t -> t - 1: per-position posteriors sampled
// independently, then the scaffold overwrite. Throws ShapeMismatch when
// pred does not match the state.
DiffusionState posterior_step(const DiffusionState &state,
                              const DenoiserOutput &pred,
                              const Marginals &priors, const Schedule &schedule,
                              std::uint64_t seed, StepStats *stats = nullptr);

class Denoiser {
public:
  virtual ~Denoiser() = default;
  virtual DenoiserOutput predict(const DiffusionState &state,
                                 const Marginals &priors) = 0;
};

// Every row is the dataset marginal.
class MarginalDenoiser: public Denoiser {
public:
  DenoiserOutput predict(const DiffusionState &state,
                         const Marginals &priors) override;
};

// One-hot at the current noisy category.
class OneHotEchoDenoiser: public Denoiser {
public:
  DenoiserOutput predict(const DiffusionState &state,
                         const Marginals &priors) override;
};

// Drives a child process (run through /bin/sh -c) over line-delimited JSON:
// request {"t", "nodes", "edges": [[i, j, c], ...], "num_node_types",
// "num_edge_types"} listing bonded pairs with i < j; response
// {"node_probs": [[...]], "edge_probs": [[i, j, [...]], ...]}. Pairs the
// response leaves out are "no bond" with certainty. Rows must sum to 1
// within 1e-6 and are renormalized. Protocol violations throw
// ProtocolError quoting the offending line. Calls are serialized.
class ExternalDenoiser: public Denoiser {
public:
  explicit ExternalDenoiser(const std::string &command);
  ~ExternalDenoiser() override;
  ExternalDenoiser(const ExternalDenoiser &) = delete;
  ExternalDenoiser &operator=(const ExternalDenoiser &) = delete;

  DenoiserOutput predict(const DiffusionState &state,
                         const Marginals &priors) override;

private:
  struct Impl;
  Impl *impl_;
};

// Request/response codec shared with ExternalDenoiser; exposed for tests
// and for denoiser implementations written against this library.
std::string encode_request(const DiffusionState &state, const Marginals &priors);
DenoiserOutput decode_response(const std::string &line, std::uint32_t n,
                               std::uint32_t node_categories);

// Dense state to molecule: "none" edges dropped, only the connected
// component holding atom 0 kept (atom order preserved).
chem::MolGraph decode(const DiffusionState &state, const Vocabulary &vocab);

struct ExtendOptions {
  std::uint32_t steps = 50;
  // Fresh trajectories tried when decoding leaves nothing beyond the
  // scaffold.
  int max_attempts = 10;
  int max_size_rejections = 100;
  // Called with every state, after each overwrite; for invariance checks.
  std::function<void(const DiffusionState &)> observer;
  // Called with the statistics of every reverse step.
  std::function<void(const StepStats &)> step_observer;
};

// Draws n > n' from the size histogram (n' + 5 after max_size_rejections
// failures), anchors s at [0, n'), and runs the reverse chain from T:
// overwrite, predict, sample. Returns the decoded graph, which holds s at
// atoms [0, n').
chem::MolGraph extend_scaffold(const chem::MolGraph &s, Denoiser &denoiser,
                               const Marginals &priors, std::uint64_t seed,
                               const ExtendOptions &opts = {});

struct GeneratedMolecule {
  chem::MolGraph mol;
  std::size_t library_index;
};

struct GenerationReport {
  std::size_t attempted = 0;
  std::size_t valid = 0;
  double validity_rate() const {
    return attempted == 0 ? 0.0
                          : static_cast<double>(valid) / static_cast<double>(attempted);
  }
};

// One extension per library entry with per-entry derived seeds; only
// molecules passing check_valence are kept.
std::vector<GeneratedMolecule> generate_gdsa(const sas::ScaffoldLibrary &lib,
                                             Denoiser &denoiser,
                                             const Marginals &priors,
                                             std::uint64_t seed,
                                             const ExtendOptions &opts = {},
                                             GenerationReport *report = nullptr);

}  // namespace scaffkit::diffusion

#endif  // SCAFFKIT_DIFFUSION_DIFFUSION_H_
