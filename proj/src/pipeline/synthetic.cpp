//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/pipeline/synthetic.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/chem/valence.h"
#include "scaffkit/util/random.h"

namespace scaffkit::pipeline {
namespace {

// Mostly saturated ring systems, so that the atom and bond marginals of the
// assay are dominated by aliphatic carbon and single bonds.
const std::vector<std::string> kInactiveScaffolds {
  "C1CCCCC1", "C1CCNCC1",  "C1COCCN1",       "C1CCOC1",  "C1CCCC1",     "C1CCNC1",
  "C1CNCCN1", "C1CCCCCC1", "C1CCC2CCCCC2C1", "C1CC1",    "C1CCC(CC1)C1CCCCC1",
  "c1ccccc1", "c1ccncc1",
};

const std::vector<std::string> kSubstituents {
  "C", "CC", "CCC", "CCCC", "CC(C)C", "CCO", "OC", "OCC", "CCN", "N", "O", "CC(=O)O",
  "C(=O)N", "F", "CCCl",
};

// Carbon atoms that still carry an implicit hydrogen.
std::vector<std::uint32_t> open_sites(const chem::MolGraph &mol) {
  const auto h = chem::hydrogen_counts(mol);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < mol.num_atoms(); ++i) {
    const auto &a = mol.atom(i);
    if (a.element == chem::Element::kC && a.implicit_hydrogens() && h[i] > 0)
      out.push_back(i);
  }
  return out;
}

void attach(chem::MolGraph &mol, std::uint32_t site, const chem::MolGraph &group) {
  const std::uint32_t base = mol.num_atoms();
  for (std::uint32_t i = 0; i < group.num_atoms(); ++i)
    mol.add_atom(group.atom(i));
  for (const auto &[key, order]: group.bonds())
    mol.add_bond(base + key.first, base + key.second, order);
  mol.add_bond(site, base, chem::BondOrder::kSingle);
}

// Decorates a core with 2-4 substituents; retries until the result is
// valid and survives a SMILES round trip.
Record decorate(const std::string &core, int label, Rng &rng) {
  const chem::MolGraph scaffold = chem::parse_smiles(core);
  for (int attempt = 0; attempt < 100; ++attempt) {
    chem::MolGraph mol = scaffold;
    const std::uint64_t groups = 2 + rng.below(3);
    for (std::uint64_t g = 0; g < groups; ++g) {
      const auto sites = open_sites(mol);
      if (sites.empty())
        break;
      const auto &sub = kSubstituents[rng.below(kSubstituents.size())];
      attach(mol, sites[rng.below(sites.size())], chem::parse_smiles(sub));
    }
    if (!chem::check_valence(mol).valid)
      continue;
    std::string smiles = chem::to_smiles(mol);
    chem::MolGraph back = chem::parse_smiles(smiles);
    if (!chem::check_valence(back).valid)
      continue;
    return { "", std::move(smiles), label, std::move(back) };
  }
  throw std::logic_error("could not decorate " + core);
}

Record chain(Rng &rng) {
  std::string core(3 + rng.below(6), 'C');
  return decorate(core, 0, rng);
}

}  // namespace

const std::vector<std::string> &synthetic_active_scaffolds() {
  static const std::vector<std::string> kActive {
    "c1ccc2[nH]ccc2c1",
    "c1ccc(-c2ncccn2)cc1",
    "O=C1CCc2ccccc2N1",
    "c1ccc(nc1)N1CCNCC1",
  };
  return kActive;
}

Assay synthetic_assay(const SyntheticOptions &opts) {
  if (opts.molecules == 0 || !(opts.active_fraction > 0.0 && opts.active_fraction < 1.0))
    throw std::invalid_argument("synthetic assay needs molecules and 0 < active fraction < 1");
  Rng rng(derive_seed(opts.seed, "synthetic"));
  const auto n_act = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(opts.molecules * opts.active_fraction)));
  const auto n_dom = static_cast<std::size_t>(std::llround(n_act * opts.dominant_fraction));
  const auto &active = synthetic_active_scaffolds();

  std::vector<Record> records;
  for (std::size_t i = 0; i < n_act; ++i) {
    const std::size_t family = i < n_dom ? 0 : 1 + (i - n_dom) % (active.size() - 1);
    records.push_back(decorate(active[family], 1, rng));
  }
  for (std::size_t i = n_act; i < opts.molecules; ++i) {
    if (rng.uniform() < 0.1)
      records.push_back(chain(rng));
    else
      records.push_back(decorate(kInactiveScaffolds[rng.below(kInactiveScaffolds.size())], 0, rng));
  }
  rng.shuffle(records);

  Assay assay;
  assay.id = fmt::format("synthetic_{}", opts.seed);
  for (std::size_t i = 0; i < records.size(); ++i)
    records[i].id = fmt::format("SYN{:05}", i);
  assay.records = std::move(records);
  return assay;
}

}  // namespace scaffkit::pipeline
