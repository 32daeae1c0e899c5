//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/chem/valence.h"

#include <algorithm>
#include <climits>
#include <functional>

namespace scaffkit::chem {
namespace {

int integral_order(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return 1;
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  default:
    return 0;
  }
}

// Whether an aromatic atom must carry one of the localized double bonds:
// true when, with every aromatic bond counted once, one unit of valence is
// still free.
bool needs_double_bond(const MolGraph &mol, std::uint32_t i) {
  const AtomType &a = mol.atom(i);
  if (!a.aromatic)
    return false;
  int base = a.implicit_hydrogens() ? 0 : a.explicit_h;
  for (const auto &nb: mol.neighbors(i))
    base += nb.order == BondOrder::kAromatic ? 1 : integral_order(nb.order);
  for (int v: allowed_valences(a.element, a.formal_charge)) {
    if (v >= base)
      return v - base >= 1;
  }
  return false;
}

class Matcher {
public:
  Matcher(const MolGraph &mol, const std::vector<bool> &needs)
      : mol_(mol), needs_(needs), mate_(mol.num_atoms(), -1) { }

  bool solve(const std::vector<std::uint32_t> &atoms) {
    steps_ = 0;
    return search(atoms);
  }

  // Greedy fallback so that failures still report specific atoms.
  void greedy(const std::vector<std::uint32_t> &atoms) {
    for (auto v: atoms) {
      if (mate_[v] >= 0)
        continue;
      for (const auto &nb: mol_.neighbors(v)) {
        if (usable(v, nb) && mate_[nb.atom] < 0) {
          mate_[v] = static_cast<int>(nb.atom);
          mate_[nb.atom] = static_cast<int>(v);
          break;
        }
      }
    }
  }

  int mate(std::uint32_t v) const { return mate_[v]; }

private:
  bool usable(std::uint32_t, const Neighbor &nb) const {
    return nb.order == BondOrder::kAromatic && needs_[nb.atom];
  }

  bool search(const std::vector<std::uint32_t> &atoms) {
    if (++steps_ > kMaxSteps)
      return false;

    // Branch on the unmatched atom with the fewest options.
    int best = -1;
    int best_count = INT_MAX;
    for (auto v: atoms) {
      if (mate_[v] >= 0)
        continue;
      int count = 0;
      for (const auto &nb: mol_.neighbors(v))
        count += usable(v, nb) && mate_[nb.atom] < 0;
      if (count == 0)
        return false;
      if (count < best_count) {
        best_count = count;
        best = static_cast<int>(v);
      }
    }
    if (best < 0)
      return true;

    auto v = static_cast<std::uint32_t>(best);
    for (const auto &nb: mol_.neighbors(v)) {
      if (!usable(v, nb) || mate_[nb.atom] >= 0)
        continue;
      mate_[v] = static_cast<int>(nb.atom);
      mate_[nb.atom] = best;
      if (search(atoms))
        return true;
      mate_[v] = mate_[nb.atom] = -1;
    }
    return false;
  }

  static constexpr int kMaxSteps = 200000;

  const MolGraph &mol_;
  const std::vector<bool> &needs_;
  std::vector<int> mate_;
  int steps_ = 0;
};

}  // namespace

Kekulization kekulize(const MolGraph &mol) {
  const auto n = static_cast<std::uint32_t>(mol.num_atoms());
  Kekulization out;
  out.orders = mol.bonds();

  std::vector<bool> needs(n, false);
  for (std::uint32_t i = 0; i < n; ++i)
    needs[i] = needs_double_bond(mol, i);

  // Components of the graph restricted to aromatic bonds between atoms that
  // need a double bond; each is matched independently.
  Matcher matcher(mol, needs);
  std::vector<bool> seen(n, false);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!needs[s] || seen[s])
      continue;
    std::vector<std::uint32_t> comp, stack { s };
    seen[s] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (const auto &nb: mol.neighbors(v)) {
        if (nb.order == BondOrder::kAromatic && needs[nb.atom]
            && !seen[nb.atom]) {
          seen[nb.atom] = true;
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    if (!matcher.solve(comp)) {
      out.success = false;
      matcher.greedy(comp);
      for (auto v: comp) {
        if (matcher.mate(v) < 0)
          out.unmatched.push_back(v);
      }
      // Greedy may still pair everything in odd corner cases; make sure
      // the failure is attributed somewhere.
      if (out.unmatched.empty())
        out.unmatched.push_back(comp.front());
    }
  }
  std::sort(out.unmatched.begin(), out.unmatched.end());

  for (auto &[key, order]: out.orders) {
    if (order != BondOrder::kAromatic)
      continue;
    bool paired = matcher.mate(key.first) == static_cast<int>(key.second);
    order = paired ? BondOrder::kDouble : BondOrder::kSingle;
  }
  return out;
}

namespace {

// Localized bond-order sum per atom. Atoms left unmatched by a failed
// kekulization are credited the double bond they were owed.
std::vector<int> bond_order_sums(const MolGraph &mol, const Kekulization &k) {
  std::vector<int> sums(mol.num_atoms(), 0);
  for (const auto &[key, order]: k.orders) {
    int v = integral_order(order);
    sums[key.first] += v;
    sums[key.second] += v;
  }
  for (auto v: k.unmatched)
    sums[v] += 1;
  return sums;
}

int implicit_fill(const AtomType &a, int sum) {
  for (int v: allowed_valences(a.element, a.formal_charge)) {
    if (v >= sum)
      return v - sum;
  }
  return 0;
}

}  // namespace

std::vector<int> hydrogen_counts(const MolGraph &mol) {
  Kekulization k = kekulize(mol);
  std::vector<int> sums = bond_order_sums(mol, k);
  std::vector<int> h(mol.num_atoms(), 0);
  for (std::uint32_t i = 0; i < mol.num_atoms(); ++i) {
    const AtomType &a = mol.atom(i);
    h[i] = a.implicit_hydrogens() ? implicit_fill(a, sums[i]) : a.explicit_h;
  }
  return h;
}

ValidityReport check_valence(const MolGraph &mol) {
  ValidityReport report;
  auto flag = [&](std::uint32_t atom, std::string reason) {
    report.violations.push_back({ atom, std::move(reason) });
  };

  RingInfo rings = find_rings(mol);
  for (std::uint32_t i = 0; i < mol.num_atoms(); ++i) {
    const AtomType &a = mol.atom(i);
    if (a.formal_charge < -2 || a.formal_charge > 2)
      flag(i, "formal charge out of range");
    if (a.aromatic && !rings.ring_atom[i])
      flag(i, "aromatic atom outside a ring");
  }
  for (const auto &[key, order]: mol.bonds()) {
    if (order != BondOrder::kAromatic)
      continue;
    if (!mol.atom(key.first).aromatic || !mol.atom(key.second).aromatic)
      flag(key.first, "aromatic bond to a non-aromatic atom");
    else if (!rings.in_ring(key.first, key.second))
      flag(key.first, "aromatic bond outside a ring");
  }

  Kekulization k = kekulize(mol);
  for (auto v: k.unmatched)
    flag(v, "aromatic system cannot be kekulized");

  std::vector<int> sums = bond_order_sums(mol, k);
  for (std::uint32_t i = 0; i < mol.num_atoms(); ++i) {
    const AtomType &a = mol.atom(i);
    auto valences = allowed_valences(a.element, a.formal_charge);
    if (valences.empty()) {
      flag(i, "no valence model for this element and charge");
      continue;
    }
    int total = sums[i] + (a.implicit_hydrogens() ? 0 : a.explicit_h);
    if (total > valences.back()) {
      flag(i, "valence " + std::to_string(total) + " exceeds "
                  + std::to_string(valences.back()));
    }
  }

  std::stable_sort(report.violations.begin(), report.violations.end(),
                   [](const Violation &x, const Violation &y) {
                     return x.atom < y.atom;
                   });
  report.valid = report.violations.empty();
  return report;
}

}  // namespace scaffkit::chem
