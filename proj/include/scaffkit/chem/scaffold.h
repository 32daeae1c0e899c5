//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_CHEM_SCAFFOLD_H_
#define SCAFFKIT_CHEM_SCAFFOLD_H_

#include <cstdint>
#include <optional>
#include <string>

#include "scaffkit/chem/mol_graph.h"

namespace scaffkit::chem {

// Bemis-Murcko scaffold: ring systems plus the linkers between them, with
// side chains trimmed atom by atom from the ends. Atoms attached to the
// framework by a double bond (carbonyl O, exocyclic =C) stay, and hydrogen
// counts of atoms that lost substituents are re-derived ([nH] for aromatic
// nitrogen). Atom order follows the input. Returns nullopt for acyclic
// molecules.
std::optional<MolGraph> murcko_scaffold(const MolGraph &mol);

// Order-independent Weisfeiler-Lehman hash of the labeled graph. Equal for
// isomorphic graphs; distinct graphs collide only with hash probability or
// on WL-indistinguishable pairs, which never occur among drug-like
// scaffolds in practice.
std::uint64_t graph_hash(const MolGraph &mol);

// Grouping key for scaffold bins: hex graph hash, or "" for the empty
// scaffold.
std::string scaffold_key(const std::optional<MolGraph> &scaffold);

}  // namespace scaffkit::chem

#endif  // SCAFFKIT_CHEM_SCAFFOLD_H_
