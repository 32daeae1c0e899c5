//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/pipeline/assay.h"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/error.h"

namespace scaffkit::pipeline {
namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

void strip_cr(std::string &line) {
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
}

// Quotes a field only when it needs it.
std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c: s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::size_t Assay::active_count() const {
  std::size_t n = 0;
  for (const auto &r: records)
    n += static_cast<std::size_t>(r.label == 1);
  return n;
}

double Assay::active_fraction() const {
  return records.empty() ? 0.0
                         : static_cast<double>(active_count())
                               / static_cast<double>(records.size());
}

Assay read_assay(std::istream &is, const std::string &assay_id) {
  std::string line;
  if (!std::getline(is, line))
    throw HeaderError("empty input; expected header id,smiles,label");
  strip_cr(line);
  if (line != "id,smiles,label")
    throw HeaderError("expected header id,smiles,label, got '" + line + "'");

  Assay assay;
  assay.id = assay_id;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty())
      continue;
    auto fields = split_fields(line);
    if (fields.size() != 3) {
      assay.quarantined.push_back({ lineno, fields.front(), "",
                                    "expected 3 fields, got "
                                        + std::to_string(fields.size()) });
      continue;
    }
    const std::string &id = fields[0];
    if (!seen.insert(id).second)
      throw HeaderError("duplicate id '" + id + "' on line " + std::to_string(lineno));
    if (fields[2] != "0" && fields[2] != "1") {
      assay.quarantined.push_back({ lineno, id, fields[1],
                                    "label '" + fields[2] + "' is not 0 or 1" });
      continue;
    }
    try {
      chem::MolGraph mol = chem::parse_smiles(fields[1]);
      if (mol.empty())
        throw ParseError("empty SMILES", 0);
      assay.records.push_back({ id, fields[1], fields[2] == "1" ? 1 : 0, std::move(mol) });
    } catch (const ParseError &e) {
      assay.quarantined.push_back({ lineno, id, fields[1], e.what() });
    }
  }

  spdlog::info("assay {}: {} records, {} actives, {} quarantined", assay.id,
               assay.records.size(), assay.active_count(), assay.quarantined.size());
  if (assay.active_fraction() > 0.01)
    spdlog::warn("assay {}: active fraction {:.4f} is above 1%", assay.id,
                 assay.active_fraction());
  return assay;
}

Assay ingest(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  return read_assay(in, std::filesystem::path(path).stem().string());
}

void write_quarantine(std::ostream &os, const Assay &assay) {
  os << "line,id,smiles,reason\n";
  for (const auto &q: assay.quarantined)
    os << q.line << ',' << csv_field(q.id) << ',' << csv_field(q.smiles) << ','
       << csv_field(q.reason) << '\n';
}

void write_assay(std::ostream &os, const Assay &assay) {
  os << "id,smiles,label\n";
  for (const auto &r: assay.records)
    os << r.id << ',' << r.smiles << ',' << r.label << '\n';
}

}  // namespace scaffkit::pipeline
