//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_TESTS_TEST_SUPPORT_H_
#define SCAFFKIT_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scaffkit/chem/mol_graph.h"
#include "scaffkit/fingerprint/fingerprint.h"

namespace scaffkit::test {

// Labeled-graph isomorphism by backtracking; intended for small molecules.
bool isomorphic(const chem::MolGraph &a, const chem::MolGraph &b);

// Whether `sub` equals the induced labeled subgraph of `mol` on atoms
// [0, sub.num_atoms()), bond orders included.
bool anchored_subgraph(const chem::MolGraph &sub, const chem::MolGraph &mol);

// Header-keyed rows of a comma-separated fixture under tests/data.
std::vector<std::map<std::string, std::string>> read_fixture(const std::string &name);

std::string data_path(const std::string &name);

// Random relabeling of the atoms.
chem::MolGraph shuffled(const chem::MolGraph &mol, std::uint64_t seed);

// A screened list of 150 molecules whose top 101 have positive scores.
// Actives sit at ranks 1, 5, 20, 99, 100 and 101; ranks 99 and 100 share one
// scaffold fingerprint while every other scaffold is a distinct random one.
struct RerankFixture {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<fp::Fingerprint> scaffold_fps;
};
RerankFixture duplicate_scaffold_fixture(std::uint64_t seed);

}  // namespace scaffkit::test

#endif  // SCAFFKIT_TESTS_TEST_SUPPORT_H_
