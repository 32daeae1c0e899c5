//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_CHEM_MOL_GRAPH_H_
#define SCAFFKIT_CHEM_MOL_GRAPH_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace scaffkit::chem {

enum class Element : std::uint8_t { kB, kC, kN, kO, kP, kS, kF, kCl, kBr, kI };

inline constexpr int kNumElements = 10;

int atomic_number(Element e);
std::string_view element_symbol(Element e);
std::optional<Element> element_from_symbol(std::string_view symbol);

// Allowed valences of an element carrying the given formal charge, in
// ascending order. Charged atoms take the valences of the isoelectronic
// neutral element, so N+ behaves like C and O- like F.
std::span<const int> allowed_valences(Element e, int formal_charge);

struct AtomType {
  Element element = Element::kC;
  bool aromatic = false;
  std::int8_t formal_charge = 0;
  // An atom with no charge and no explicit hydrogens is filled up with
  // implicit hydrogens to its lowest fitting valence, as an organic-subset
  // SMILES atom would be. Otherwise its hydrogen count is exactly this.
  std::uint8_t explicit_h = 0;

  bool implicit_hydrogens() const {
    return formal_charge == 0 && explicit_h == 0;
  }

  auto operator<=>(const AtomType &) const = default;
};

enum class BondOrder : std::uint8_t {
  kNone = 0,
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

inline constexpr int kNumBondOrders = 4;

// Bond order in units of half bonds (aromatic = 3).
int half_bond_order(BondOrder order);

struct Neighbor {
  std::uint32_t atom;
  BondOrder order;
};

// Attributed molecular graph: typed atoms and an undirected set of typed
// bonds keyed by (i, j) with i < j.
class MolGraph {
public:
  using BondKey = std::pair<std::uint32_t, std::uint32_t>;
  using BondMap = std::map<BondKey, BondOrder>;

  MolGraph() = default;

  std::uint32_t add_atom(const AtomType &atom);

  // Throws std::invalid_argument on self-loops, out-of-range endpoints,
  // kNone orders and duplicate bonds.
  void add_bond(std::uint32_t i, std::uint32_t j, BondOrder order);
  void set_bond_order(std::uint32_t i, std::uint32_t j, BondOrder order);

  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t num_bonds() const { return bonds_.size(); }
  bool empty() const { return atoms_.empty(); }

  const AtomType &atom(std::uint32_t i) const { return atoms_[i]; }
  AtomType &atom(std::uint32_t i) { return atoms_[i]; }
  const std::vector<AtomType> &atoms() const { return atoms_; }

  const BondMap &bonds() const { return bonds_; }
  std::optional<BondOrder> bond(std::uint32_t i, std::uint32_t j) const;

  // Neighbors in ascending atom order.
  const std::vector<Neighbor> &neighbors(std::uint32_t i) const {
    return adjacency_[i];
  }
  std::size_t degree(std::uint32_t i) const { return adjacency_[i].size(); }

  // Induced subgraph on the atoms with keep[i] set, preserving order.
  MolGraph subgraph(const std::vector<bool> &keep) const;

  // Relabels atoms so that new index k holds old atom order[k].
  MolGraph permuted(std::span<const std::uint32_t> order) const;

  bool operator==(const MolGraph &other) const {
    return atoms_ == other.atoms_ && bonds_ == other.bonds_;
  }

private:
  std::vector<AtomType> atoms_;
  BondMap bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// Connected components as atom-index lists, ordered by their lowest atom.
std::vector<std::vector<std::uint32_t>> connected_components(const MolGraph &mol);

struct RingInfo {
  std::vector<bool> ring_atom;
  // Keyed the same way as MolGraph::bonds().
  std::map<MolGraph::BondKey, bool> ring_bond;

  bool in_ring(std::uint32_t i, std::uint32_t j) const {
    auto it = ring_bond.find({ std::min(i, j), std::max(i, j) });
    return it != ring_bond.end() && it->second;
  }
};

// A bond is a ring bond iff it is not a bridge of the graph.
RingInfo find_rings(const MolGraph &mol);

}  // namespace scaffkit::chem

#endif  // SCAFFKIT_CHEM_MOL_GRAPH_H_
