//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/diffusion/diffusion.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "scaffkit/chem/valence.h"
#include "scaffkit/error.h"
#include "scaffkit/util/random.h"

namespace scaffkit::diffusion {

std::uint32_t Vocabulary::add(const chem::AtomType &type) {
  if (auto id = find(type))
    return *id;
  types_.push_back(type);
  return size() - 1;
}

std::optional<std::uint32_t> Vocabulary::find(const chem::AtomType &type) const {
  auto it = std::find(types_.begin(), types_.end(), type);
  if (it == types_.end())
    return std::nullopt;
  return static_cast<std::uint32_t>(it - types_.begin());
}

Marginals compute_marginals(std::span<const chem::MolGraph> mols,
                            std::span<const chem::AtomType> extra_types) {
  if (mols.empty())
    throw std::invalid_argument("marginals need at least one molecule");

  // Sorted vocabulary so that category ids do not depend on dataset order.
  std::vector<chem::AtomType> types;
  for (const auto &m: mols)
    types.insert(types.end(), m.atoms().begin(), m.atoms().end());
  types.insert(types.end(), extra_types.begin(), extra_types.end());
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());

  Marginals out;
  for (const auto &t: types)
    out.vocab.add(t);

  std::vector<double> node_counts(out.vocab.size(), 0.0);
  std::vector<double> edge_counts(kEdgeCategories, 0.0);
  std::size_t n_max = 0;
  double atoms = 0.0, pairs = 0.0;
  for (const auto &m: mols) {
    for (const auto &a: m.atoms())
      node_counts[*out.vocab.find(a)] += 1.0;
    const double n = static_cast<double>(m.num_atoms());
    atoms += n;
    const double p = n * (n - 1.0) / 2.0;
    pairs += p;
    for (const auto &[key, order]: m.bonds())
      edge_counts[edge_category(order)] += 1.0;
    edge_counts[kEdgeNone] += p - static_cast<double>(m.num_bonds());
    n_max = std::max(n_max, m.num_atoms());
  }

  out.node_prior.resize(node_counts.size());
  for (std::size_t c = 0; c < node_counts.size(); ++c)
    out.node_prior[c] = node_counts[c] / atoms;

  out.edge_prior.assign(kEdgeCategories, 0.0);
  if (pairs == 0.0) {
    out.edge_prior[kEdgeNone] = 1.0;
  } else {
    for (std::uint32_t c = 0; c < kEdgeCategories; ++c)
      out.edge_prior[c] = edge_counts[c] / pairs;
  }

  out.size_hist.assign(n_max + 1, 0.0);
  for (const auto &m: mols)
    out.size_hist[m.num_atoms()] += 1.0 / static_cast<double>(mols.size());
  return out;
}

Schedule::Schedule(std::uint32_t steps, double s0): steps_(steps) {
  if (steps == 0)
    throw std::invalid_argument("diffusion needs at least one step");
  auto f = [&](double t) {
    double c = std::cos((t / steps + s0) / (1.0 + s0) * std::numbers::pi / 2.0);
    return c * c;
  };
  const double f0 = f(0.0);
  alpha_bar_.resize(steps + 1);
  for (std::uint32_t t = 0; t <= steps; ++t)
    alpha_bar_[t] = std::clamp(f(static_cast<double>(t)) / f0, 0.0, 1.0);
  alpha_bar_[0] = 1.0;
}

double Schedule::alpha(std::uint32_t t) const {
  if (t == 0 || t > steps_)
    throw std::out_of_range("step index outside [1, T]");
  return alpha_bar_[t - 1] > 0.0 ? alpha_bar_[t] / alpha_bar_[t - 1] : 0.0;
}

Matrix marginal_transition(std::span<const double> prior, double coef) {
  Matrix q;
  q.dim = static_cast<std::uint32_t>(prior.size());
  q.data.resize(static_cast<std::size_t>(q.dim) * q.dim);
  for (std::uint32_t i = 0; i < q.dim; ++i) {
    for (std::uint32_t j = 0; j < q.dim; ++j)
      q.data[static_cast<std::size_t>(i) * q.dim + j]
          = (1.0 - coef) * prior[j] + (i == j ? coef : 0.0);
  }
  return q;
}

Transition transition(std::uint32_t t, const Marginals &priors,
                      const Schedule &schedule) {
  if (t > schedule.steps())
    throw std::out_of_range("step index outside [0, T]");
  const double ab = schedule.alpha_bar(t);
  return { marginal_transition(priors.node_prior, ab),
           marginal_transition(priors.edge_prior, ab) };
}

Transition step_transition(std::uint32_t t, const Marginals &priors,
                           const Schedule &schedule) {
  const double a = schedule.alpha(t);
  return { marginal_transition(priors.node_prior, a),
           marginal_transition(priors.edge_prior, a) };
}

void anchor(DiffusionState &state, const chem::MolGraph &s,
            const Vocabulary &vocab) {
  const auto k = static_cast<std::uint32_t>(s.num_atoms());
  if (k > state.n)
    throw std::invalid_argument("scaffold larger than the graph");
  state.anchored = k;
  state.scaffold_nodes.resize(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    auto id = vocab.find(s.atom(i));
    if (!id)
      throw std::invalid_argument("scaffold atom " + std::to_string(i)
                                  + " has a type outside the vocabulary");
    state.scaffold_nodes[i] = *id;
  }
  state.scaffold_edges.assign(static_cast<std::size_t>(k) * k, kEdgeNone);
  for (const auto &[key, order]: s.bonds()) {
    auto c = static_cast<std::uint8_t>(edge_category(order));
    state.scaffold_edges[static_cast<std::size_t>(key.first) * k + key.second] = c;
    state.scaffold_edges[static_cast<std::size_t>(key.second) * k + key.first] = c;
  }
  apply_mask(state);
}

void apply_mask(DiffusionState &state) {
  const std::uint32_t k = state.anchored;
  for (std::uint32_t i = 0; i < k; ++i) {
    state.nodes[i] = state.scaffold_nodes[i];
    for (std::uint32_t j = i + 1; j < k; ++j)
      state.set_edge(i, j, state.scaffold_edges[static_cast<std::size_t>(i) * k + j]);
  }
}

bool mask_holds(const DiffusionState &state) {
  const std::uint32_t k = state.anchored;
  for (std::uint32_t i = 0; i < k; ++i) {
    if (state.nodes[i] != state.scaffold_nodes[i])
      return false;
    for (std::uint32_t j = 0; j < k; ++j) {
      if (state.edge(i, j) != state.scaffold_edges[static_cast<std::size_t>(i) * k + j])
        return false;
    }
  }
  return true;
}

DiffusionState sample_prior(std::uint32_t n, const Marginals &priors,
                            const Schedule &schedule, std::uint64_t seed) {
  if (n == 0)
    throw std::invalid_argument("graph needs at least one atom");
  Rng rng(seed);
  DiffusionState s;
  s.t = schedule.steps();
  s.n = n;
  s.nodes.resize(n);
  s.edges.assign(static_cast<std::size_t>(n) * n, kEdgeNone);
  for (std::uint32_t i = 0; i < n; ++i)
    s.nodes[i] = static_cast<std::uint32_t>(rng.categorical(priors.node_prior));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j)
      s.set_edge(i, j, static_cast<std::uint8_t>(rng.categorical(priors.edge_prior)));
  }
  return s;
}

std::vector<double> posterior(std::uint32_t x_t, std::span<const double> p_hat,
                              const Matrix &step, const Matrix &cumulative_prev) {
  const std::uint32_t d = step.dim;
  std::vector<double> out(d, 0.0), q(d);
  double weight = 0.0;
  for (std::uint32_t x0 = 0; x0 < d; ++x0) {
    if (p_hat[x0] <= 0.0)
      continue;
    double z = 0.0;
    for (std::uint32_t x = 0; x < d; ++x) {
      q[x] = step(x, x_t) * cumulative_prev(x0, x);
      z += q[x];
    }
    if (z <= 0.0)
      continue;
    for (std::uint32_t x = 0; x < d; ++x)
      out[x] += p_hat[x0] * q[x] / z;
    weight += p_hat[x0];
  }
  if (weight <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[x_t] = 1.0;
    return out;
  }
  for (auto &v: out)
    v /= weight;
  return out;
}

namespace {

void track(StepStats *stats, std::span<const double> row) {
  if (!stats)
    return;
  double sum = 0.0;
  for (double v: row)
    sum += v;
  stats->max_row_error = std::max(stats->max_row_error, std::abs(sum - 1.0));
}

}  // namespace

DiffusionState posterior_step(const DiffusionState &state,
                              const DenoiserOutput &pred,
                              const Marginals &priors, const Schedule &schedule,
                              std::uint64_t seed, StepStats *stats) {
  const std::uint32_t a = priors.vocab.size();
  if (state.t == 0)
    throw std::invalid_argument("posterior step from t = 0");
  if (pred.n != state.n || pred.node_categories != a
      || pred.node_probs.size() != static_cast<std::size_t>(state.n) * a
      || pred.edge_probs.size()
             != static_cast<std::size_t>(state.n) * state.n * kEdgeCategories)
    throw ShapeMismatch("denoiser output does not match a graph of "
                        + std::to_string(state.n) + " atoms and "
                        + std::to_string(a) + " atom types");

  const Transition step = step_transition(state.t, priors, schedule);
  const Transition prev = transition(state.t - 1, priors, schedule);

  Rng rng(seed);
  DiffusionState next = state;
  next.t = state.t - 1;
  for (std::uint32_t i = 0; i < state.n; ++i) {
    auto row = posterior(state.nodes[i], pred.node_row(i), step.nodes, prev.nodes);
    track(stats, row);
    next.nodes[i] = static_cast<std::uint32_t>(rng.categorical(row));
  }
  for (std::uint32_t i = 0; i < state.n; ++i) {
    for (std::uint32_t j = i + 1; j < state.n; ++j) {
      auto row = posterior(state.edge(i, j), pred.edge_row(i, j), step.edges,
                           prev.edges);
      track(stats, row);
      next.set_edge(i, j, static_cast<std::uint8_t>(rng.categorical(row)));
    }
  }
  apply_mask(next);
  return next;
}

namespace {

DenoiserOutput blank_output(const DiffusionState &state, std::uint32_t a) {
  DenoiserOutput out;
  out.n = state.n;
  out.node_categories = a;
  out.node_probs.assign(static_cast<std::size_t>(state.n) * a, 0.0);
  out.edge_probs.assign(static_cast<std::size_t>(state.n) * state.n * kEdgeCategories,
                        0.0);
  return out;
}

}  // namespace

DenoiserOutput MarginalDenoiser::predict(const DiffusionState &state,
                                         const Marginals &priors) {
  const std::uint32_t a = priors.vocab.size();
  DenoiserOutput out = blank_output(state, a);
  for (std::uint32_t i = 0; i < state.n; ++i)
    std::copy(priors.node_prior.begin(), priors.node_prior.end(),
              out.node_probs.begin() + static_cast<std::ptrdiff_t>(i) * a);
  for (std::size_t p = 0; p < static_cast<std::size_t>(state.n) * state.n; ++p)
    std::copy(priors.edge_prior.begin(), priors.edge_prior.end(),
              out.edge_probs.begin() + static_cast<std::ptrdiff_t>(p * kEdgeCategories));
  return out;
}

DenoiserOutput OneHotEchoDenoiser::predict(const DiffusionState &state,
                                           const Marginals &priors) {
  const std::uint32_t a = priors.vocab.size();
  DenoiserOutput out = blank_output(state, a);
  for (std::uint32_t i = 0; i < state.n; ++i)
    out.node_probs[static_cast<std::size_t>(i) * a + state.nodes[i]] = 1.0;
  for (std::uint32_t i = 0; i < state.n; ++i) {
    for (std::uint32_t j = 0; j < state.n; ++j)
      out.edge_probs[(static_cast<std::size_t>(i) * state.n + j) * kEdgeCategories
                     + state.edge(i, j)] = 1.0;
  }
  return out;
}

chem::MolGraph decode(const DiffusionState &state, const Vocabulary &vocab) {
  chem::MolGraph full;
  for (std::uint32_t i = 0; i < state.n; ++i)
    full.add_atom(vocab.type(state.nodes[i]));
  for (std::uint32_t i = 0; i < state.n; ++i) {
    for (std::uint32_t j = i + 1; j < state.n; ++j) {
      if (state.edge(i, j) != kEdgeNone)
        full.add_bond(i, j, static_cast<chem::BondOrder>(state.edge(i, j)));
    }
  }
  std::vector<bool> keep(state.n, false);
  const auto components = chem::connected_components(full);
  for (auto v: components.front())
    keep[v] = true;
  return full.subgraph(keep);
}

namespace {

std::uint32_t draw_size(std::uint32_t min_exclusive, const Marginals &priors,
                        Rng &rng, int max_rejections) {
  for (int r = 0; r < max_rejections; ++r) {
    auto n = static_cast<std::uint32_t>(rng.categorical(priors.size_hist));
    if (n > min_exclusive)
      return n;
  }
  return min_exclusive + 5;
}

}  // namespace

chem::MolGraph extend_scaffold(const chem::MolGraph &s, Denoiser &denoiser,
                               const Marginals &priors, std::uint64_t seed,
                               const ExtendOptions &opts) {
  if (s.empty())
    throw std::invalid_argument("cannot extend an empty scaffold");
  const Schedule schedule(opts.steps);
  const auto n_prime = static_cast<std::uint32_t>(s.num_atoms());

  chem::MolGraph result;
  for (int attempt = 0; attempt < std::max(opts.max_attempts, 1); ++attempt) {
    const std::uint64_t attempt_seed = derive_seed(seed, static_cast<std::uint64_t>(attempt));
    Rng rng(attempt_seed);
    const std::uint32_t n = draw_size(n_prime, priors, rng, opts.max_size_rejections);

    DiffusionState state = sample_prior(n, priors, schedule, rng.next());
    anchor(state, s, priors.vocab);
    if (opts.observer)
      opts.observer(state);
    while (state.t > 0) {
      apply_mask(state);
      DenoiserOutput pred = denoiser.predict(state, priors);
      StepStats stats;
      state = posterior_step(state, pred, priors, schedule, rng.next(), &stats);
      if (opts.observer)
        opts.observer(state);
      if (opts.step_observer)
        opts.step_observer(stats);
    }
    result = decode(state, priors.vocab);
    if (result.num_atoms() > n_prime)
      break;
  }
  return result;
}

std::vector<GeneratedMolecule> generate_gdsa(const sas::ScaffoldLibrary &lib,
                                             Denoiser &denoiser,
                                             const Marginals &priors,
                                             std::uint64_t seed,
                                             const ExtendOptions &opts,
                                             GenerationReport *report) {
  if (lib.entries.empty())
    throw std::invalid_argument("empty scaffold library");
  std::vector<GeneratedMolecule> out;
  GenerationReport local;
  for (std::size_t i = 0; i < lib.entries.size(); ++i) {
    chem::MolGraph mol = extend_scaffold(lib.entries[i].scaffold, denoiser, priors,
                                         derive_seed(seed, i), opts);
    ++local.attempted;
    if (chem::check_valence(mol).valid) {
      ++local.valid;
      out.push_back({ std::move(mol), i });
    }
  }
  if (report)
    *report = local;
  return out;
}

}  // namespace scaffkit::diffusion
