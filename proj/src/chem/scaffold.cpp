//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/chem/scaffold.h"

#include <algorithm>
#include <cstdio>
#include <deque>

#include "scaffkit/util/hash.h"

namespace scaffkit::chem {

std::optional<MolGraph> murcko_scaffold(const MolGraph &mol) {
  const auto n = static_cast<std::uint32_t>(mol.num_atoms());
  RingInfo rings = find_rings(mol);
  if (std::none_of(rings.ring_atom.begin(), rings.ring_atom.end(),
                   [](bool b) { return b; }))
    return std::nullopt;

  std::vector<bool> keep(n, true);
  std::vector<std::size_t> degree(n);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t i = 0; i < n; ++i) {
    degree[i] = mol.degree(i);
    if (!rings.ring_atom[i] && degree[i] <= 1)
      queue.push_back(i);
  }
  while (!queue.empty()) {
    std::uint32_t a = queue.front();
    queue.pop_front();
    if (!keep[a])
      continue;
    keep[a] = false;
    for (const auto &nb: mol.neighbors(a)) {
      if (!keep[nb.atom])
        continue;
      if (--degree[nb.atom] <= 1 && !rings.ring_atom[nb.atom])
        queue.push_back(nb.atom);
    }
  }

  std::vector<bool> framework = keep;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!framework[i])
      continue;
    for (const auto &nb: mol.neighbors(i)) {
      if (!framework[nb.atom] && nb.order == BondOrder::kDouble)
        keep[nb.atom] = true;
    }
  }

  MolGraph scaffold = mol.subgraph(keep);
  std::uint32_t k = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!keep[i])
      continue;
    const std::size_t lost = mol.degree(i) - scaffold.degree(k);
    if (lost > 0) {
      AtomType &a = scaffold.atom(k);
      if (a.formal_charge == 0 && !a.aromatic)
        a.explicit_h = 0;
      else if (a.formal_charge != 0 || a.element != Element::kC)
        a.explicit_h = static_cast<std::uint8_t>(
            std::min<std::size_t>(a.explicit_h + lost, 4));
    }
    ++k;
  }
  return scaffold;
}

std::uint64_t graph_hash(const MolGraph &mol) {
  const auto n = static_cast<std::uint32_t>(mol.num_atoms());
  std::vector<std::uint64_t> label(n), next(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const AtomType &a = mol.atom(i);
    std::uint64_t h = static_cast<std::uint64_t>(a.element);
    h = hash_combine(h, a.aromatic);
    h = hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 8));
    h = hash_combine(h, a.explicit_h);
    h = hash_combine(h, mol.degree(i));
    label[i] = h;
  }

  std::vector<std::uint64_t> nb_terms;
  for (std::uint32_t round = 0; round < std::max<std::uint32_t>(n, 1); ++round) {
    for (std::uint32_t i = 0; i < n; ++i) {
      nb_terms.clear();
      for (const auto &nb: mol.neighbors(i))
        nb_terms.push_back(hash_combine(static_cast<std::uint64_t>(nb.order),
                                        label[nb.atom]));
      std::sort(nb_terms.begin(), nb_terms.end());
      std::uint64_t h = hash_combine(label[i], round);
      for (auto t: nb_terms)
        h = hash_combine(h, t);
      next[i] = h;
    }
    label.swap(next);
  }

  std::vector<std::uint64_t> sorted = label;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = hash_combine(n, mol.num_bonds());
  for (auto l: sorted)
    h = hash_combine(h, l);
  return h;
}

std::string scaffold_key(const std::optional<MolGraph> &scaffold) {
  if (!scaffold)
    return "";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(graph_hash(*scaffold)));
  return buf;
}

}  // namespace scaffkit::chem
