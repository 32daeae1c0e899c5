//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_PIPELINE_ASSAY_H_
#define SCAFFKIT_PIPELINE_ASSAY_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "scaffkit/chem/mol_graph.h"

namespace scaffkit::pipeline {

struct Record {
  std::string id;
  std::string smiles;
  int label;
  chem::MolGraph mol;
};

struct QuarantinedRow {
  // 1-based line number in the input file.
  std::size_t line;
  std::string id;
  std::string smiles;
  std::string reason;
};

struct Assay {
  std::string id;
  std::vector<Record> records;
  std::vector<QuarantinedRow> quarantined;

  std::size_t total_count() const { return records.size(); }
  std::size_t active_count() const;
  double active_fraction() const;
};

// Reads a CSV with header id,smiles,label. Rows whose SMILES does not
// parse, or whose label is not 0/1, are quarantined with the reason.
// Throws HeaderError for a wrong header or a repeated id, IoError when the
// file cannot be read.
Assay read_assay(std::istream &is, const std::string &assay_id);
Assay ingest(const std::string &path);

// CSV: line,id,smiles,reason
void write_quarantine(std::ostream &os, const Assay &assay);
// CSV: id,smiles,label
void write_assay(std::ostream &os, const Assay &assay);

}  // namespace scaffkit::pipeline

#endif  // SCAFFKIT_PIPELINE_ASSAY_H_
