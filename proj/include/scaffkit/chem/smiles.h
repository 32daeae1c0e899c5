//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_CHEM_SMILES_H_
#define SCAFFKIT_CHEM_SMILES_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scaffkit/chem/mol_graph.h"

namespace scaffkit::chem {

struct ParseWarning {
  std::size_t offset;
  std::string message;
};

// Parses the supported SMILES subset: organic-subset atoms, bracket atoms
// with charge and hydrogen count, aromatic lowercase atoms, branches, ring
// closures up to %99 and dot-disconnected components. Stereo marks, isotopes
// and atom classes are accepted and discarded with a warning.
//
// Throws ParseError carrying the byte offset of the offending character.
MolGraph parse_smiles(std::string_view text,
                      std::vector<ParseWarning> *warnings = nullptr);

struct SmilesOutput {
  std::string smiles;
  // atom_order[k] is the input atom written k-th, which is also its index
  // when the string is parsed back.
  std::vector<std::uint32_t> atom_order;
};

// Deterministic depth-first writer starting from the lowest-index atom of
// each component. Not canonical. Throws SerializationError when an atom has
// no SMILES rendering or, unless allow_invalid is set, when the molecule
// fails check_valence.
SmilesOutput write_smiles(const MolGraph &mol, bool allow_invalid = false);

inline std::string to_smiles(const MolGraph &mol, bool allow_invalid = false) {
  return write_smiles(mol, allow_invalid).smiles;
}

}  // namespace scaffkit::chem

#endif  // SCAFFKIT_CHEM_SMILES_H_
