//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/chem/mol_graph.h"

#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>
#include <string>

namespace scaffkit::chem {
namespace {

struct ElementInfo {
  std::string_view symbol;
  int z;
};

constexpr std::array<ElementInfo, kNumElements> kElements = { {
    { "B", 5 },
    { "C", 6 },
    { "N", 7 },
    { "O", 8 },
    { "P", 15 },
    { "S", 16 },
    { "F", 9 },
    { "Cl", 17 },
    { "Br", 35 },
    { "I", 53 },
} };

// Valences by electron count (atomic number minus charge). Only the rows
// reachable from the supported elements with |charge| <= 2 are present.
std::span<const int> valences_for_electrons(int electrons) {
  static constexpr int kOne[] = { 1 };
  static constexpr int kTwo[] = { 2 };
  static constexpr int kThree[] = { 3 };
  static constexpr int kFour[] = { 4 };
  static constexpr int kZero[] = { 0 };
  static constexpr int kPnictogen[] = { 3, 5 };
  static constexpr int kChalcogen[] = { 2, 4, 6 };
  static constexpr int kIodine[] = { 1, 3, 5 };

  switch (electrons) {
  case 3:   // Li
  case 11:  // Na
  case 19:  // K
  case 37:  // Rb
  case 55:  // Cs
    return kOne;
  case 4:   // Be
  case 12:  // Mg
    return kTwo;
  case 5:   // B
  case 13:  // Al
    return kThree;
  case 6:   // C
  case 14:  // Si
    return kFour;
  case 7:  // N
    return kThree;
  case 8:  // O
    return kTwo;
  case 9:   // F
  case 17:  // Cl
  case 35:  // Br
    return kOne;
  case 53:  // I
    return kIodine;
  case 10:
  case 18:
  case 36:
  case 54:
    return kZero;
  case 15:  // P
  case 33:  // As
  case 51:  // Sb
    return kPnictogen;
  case 16:  // S
  case 34:  // Se
  case 52:  // Te
    return kChalcogen;
  case 31:  // Ga
  case 49:  // In
    return kThree;
  case 32:  // Ge
  case 50:  // Sn
    return kFour;
  default:
    return {};
  }
}

}  // namespace

int atomic_number(Element e) {
  return kElements[static_cast<int>(e)].z;
}

std::string_view element_symbol(Element e) {
  return kElements[static_cast<int>(e)].symbol;
}

std::optional<Element> element_from_symbol(std::string_view symbol) {
  for (int i = 0; i < kNumElements; ++i) {
    if (kElements[i].symbol == symbol)
      return static_cast<Element>(i);
  }
  return std::nullopt;
}

std::span<const int> allowed_valences(Element e, int formal_charge) {
  return valences_for_electrons(atomic_number(e) - formal_charge);
}

int half_bond_order(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return 2;
  case BondOrder::kDouble:
    return 4;
  case BondOrder::kTriple:
    return 6;
  case BondOrder::kAromatic:
    return 3;
  case BondOrder::kNone:
    break;
  }
  return 0;
}

std::uint32_t MolGraph::add_atom(const AtomType &atom) {
  atoms_.push_back(atom);
  adjacency_.emplace_back();
  return static_cast<std::uint32_t>(atoms_.size() - 1);
}

void MolGraph::add_bond(std::uint32_t i, std::uint32_t j, BondOrder order) {
  if (i == j)
    throw std::invalid_argument("self-loop on atom " + std::to_string(i));
  if (i >= atoms_.size() || j >= atoms_.size())
    throw std::invalid_argument("bond endpoint out of range");
  if (order == BondOrder::kNone)
    throw std::invalid_argument("cannot store a bond of order none");

  BondKey key { std::min(i, j), std::max(i, j) };
  if (!bonds_.emplace(key, order).second)
    throw std::invalid_argument("duplicate bond " + std::to_string(key.first)
                                + "-" + std::to_string(key.second));

  auto insert_sorted = [](std::vector<Neighbor> &adj, Neighbor nb) {
    auto it = std::lower_bound(
        adj.begin(), adj.end(), nb.atom,
        [](const Neighbor &a, std::uint32_t idx) { return a.atom < idx; });
    adj.insert(it, nb);
  };
  insert_sorted(adjacency_[i], { j, order });
  insert_sorted(adjacency_[j], { i, order });
}

void MolGraph::set_bond_order(std::uint32_t i, std::uint32_t j,
                              BondOrder order) {
  BondKey key { std::min(i, j), std::max(i, j) };
  auto it = bonds_.find(key);
  if (it == bonds_.end() || order == BondOrder::kNone)
    throw std::invalid_argument("set_bond_order on a missing bond");
  it->second = order;
  for (auto &nb: adjacency_[i])
    if (nb.atom == j)
      nb.order = order;
  for (auto &nb: adjacency_[j])
    if (nb.atom == i)
      nb.order = order;
}

std::optional<BondOrder> MolGraph::bond(std::uint32_t i,
                                        std::uint32_t j) const {
  auto it = bonds_.find({ std::min(i, j), std::max(i, j) });
  if (it == bonds_.end())
    return std::nullopt;
  return it->second;
}

MolGraph MolGraph::subgraph(const std::vector<bool> &keep) const {
  std::vector<std::uint32_t> new_index(atoms_.size(), UINT32_MAX);
  MolGraph out;
  for (std::uint32_t i = 0; i < atoms_.size(); ++i) {
    if (keep[i])
      new_index[i] = out.add_atom(atoms_[i]);
  }
  for (const auto &[key, order]: bonds_) {
    if (keep[key.first] && keep[key.second])
      out.add_bond(new_index[key.first], new_index[key.second], order);
  }
  return out;
}

MolGraph MolGraph::permuted(std::span<const std::uint32_t> order) const {
  if (order.size() != atoms_.size())
    throw std::invalid_argument("permutation size mismatch");
  std::vector<std::uint32_t> new_index(atoms_.size());
  MolGraph out;
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    new_index[order[k]] = k;
    out.add_atom(atoms_[order[k]]);
  }
  for (const auto &[key, ord]: bonds_)
    out.add_bond(new_index[key.first], new_index[key.second], ord);
  return out;
}

std::vector<std::vector<std::uint32_t>>
connected_components(const MolGraph &mol) {
  std::vector<std::vector<std::uint32_t>> comps;
  std::vector<bool> seen(mol.num_atoms(), false);
  for (std::uint32_t s = 0; s < mol.num_atoms(); ++s) {
    if (seen[s])
      continue;
    auto &comp = comps.emplace_back();
    std::vector<std::uint32_t> stack { s };
    seen[s] = true;
    while (!stack.empty()) {
      std::uint32_t a = stack.back();
      stack.pop_back();
      comp.push_back(a);
      for (const auto &nb: mol.neighbors(a)) {
        if (!seen[nb.atom]) {
          seen[nb.atom] = true;
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
  }
  return comps;
}

RingInfo find_rings(const MolGraph &mol) {
  const auto n = static_cast<std::uint32_t>(mol.num_atoms());
  RingInfo info;
  info.ring_atom.assign(n, false);
  for (const auto &[key, order]: mol.bonds())
    info.ring_bond[key] = true;

  // Tarjan bridge finding, iterative to survive long chains.
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  struct Frame {
    std::uint32_t atom;
    std::uint32_t parent;
    std::size_t next;
  };
  for (std::uint32_t root = 0; root < n; ++root) {
    if (disc[root] >= 0)
      continue;
    std::vector<Frame> stack { { root, UINT32_MAX, 0 } };
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &adj = mol.neighbors(f.atom);
      if (f.next < adj.size()) {
        std::uint32_t v = adj[f.next++].atom;
        if (v == f.parent)
          continue;
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({ v, f.atom, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], disc[v]);
        }
      } else {
        std::uint32_t u = f.atom, p = f.parent;
        stack.pop_back();
        if (p != UINT32_MAX) {
          low[p] = std::min(low[p], low[u]);
          if (low[u] > disc[p])
            info.ring_bond[{ std::min(u, p), std::max(u, p) }] = false;
        }
      }
    }
  }

  for (const auto &[key, ring]: info.ring_bond) {
    if (ring) {
      info.ring_atom[key.first] = true;
      info.ring_atom[key.second] = true;
    }
  }
  return info;
}

}  // namespace scaffkit::chem
