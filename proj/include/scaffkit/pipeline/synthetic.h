//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_PIPELINE_SYNTHETIC_H_
#define SCAFFKIT_PIPELINE_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scaffkit/pipeline/assay.h"

namespace scaffkit::pipeline {

struct SyntheticOptions {
  std::size_t molecules = 2000;
  double active_fraction = 0.01;
  // Share of the actives built on the first active scaffold; the rest are
  // spread evenly over the other three.
  double dominant_fraction = 0.6;
  std::uint64_t seed = 0;
};

// The four ring systems actives are planted around.
const std::vector<std::string> &synthetic_active_scaffolds();

// Seeded benchmark assay: actives decorate one of four scaffolds, inactives
// decorate a disjoint set of ring systems or are acyclic chains. Every
// molecule passes check_valence and round-trips through SMILES. Record ids
// are SYN00000 onwards in shuffled order.
Assay synthetic_assay(const SyntheticOptions &opts = {});

}  // namespace scaffkit::pipeline

#endif  // SCAFFKIT_PIPELINE_SYNTHETIC_H_
