//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_CHEM_VALENCE_H_
#define SCAFFKIT_CHEM_VALENCE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scaffkit/chem/mol_graph.h"

namespace scaffkit::chem {

struct Violation {
  std::uint32_t atom;
  std::string reason;

  bool operator==(const Violation &) const = default;
};

struct ValidityReport {
  bool valid = true;
  std::vector<Violation> violations;
};

// Assignment of alternating single/double bonds to the aromatic bonds.
struct Kekulization {
  bool success = true;
  // Per bond (same key order as MolGraph::bonds()): the localized order.
  MolGraph::BondMap orders;
  // Aromatic atoms that needed a double bond and did not get one.
  std::vector<std::uint32_t> unmatched;
};

Kekulization kekulize(const MolGraph &mol);

// Total hydrogens (explicit or implicit) on every atom.
std::vector<int> hydrogen_counts(const MolGraph &mol);

// Bond-order sums (with aromatic bonds localized) plus hydrogens must fit an
// allowed valence of the element at its formal charge; aromatic atoms and
// bonds must lie in rings and the aromatic systems must kekulize.
ValidityReport check_valence(const MolGraph &mol);

}  // namespace scaffkit::chem

#endif  // SCAFFKIT_CHEM_VALENCE_H_
