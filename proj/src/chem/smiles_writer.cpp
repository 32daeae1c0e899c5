//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/chem/valence.h"
#include "scaffkit/error.h"

namespace scaffkit::chem {
namespace {

bool has_organic_form(const AtomType &a) {
  if (a.aromatic) {
    switch (a.element) {
    case Element::kB:
    case Element::kC:
    case Element::kN:
    case Element::kO:
    case Element::kP:
    case Element::kS:
      return true;
    default:
      return false;
    }
  }
  return true;
}

std::string atom_text(const AtomType &a, std::uint32_t index) {
  if (a.aromatic && !has_organic_form(a)) {
    throw SerializationError("atom " + std::to_string(index)
                             + ": aromatic " + std::string(element_symbol(a.element))
                             + " has no SMILES rendering");
  }

  std::string sym(element_symbol(a.element));
  if (a.aromatic)
    sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
  if (a.implicit_hydrogens())
    return sym;

  std::string out = "[" + sym;
  if (a.explicit_h > 0) {
    out += 'H';
    if (a.explicit_h > 1)
      out += std::to_string(a.explicit_h);
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    int mag = std::abs(a.formal_charge);
    if (mag > 1)
      out += std::to_string(mag);
  }
  out += ']';
  return out;
}

class SmilesWriter {
public:
  explicit SmilesWriter(const MolGraph &mol)
      : mol_(mol), rings_(find_rings(mol)),
        visited_(mol.num_atoms(), false), closures_(mol.num_atoms()),
        children_(mol.num_atoms()) { }

  SmilesOutput write() {
    for (auto &comp: connected_components(mol_)) {
      if (!out_.smiles.empty())
        out_.smiles += '.';
      const std::uint32_t root = comp.front();
      plan(root);
      emit(root);
    }
    return std::move(out_);
  }

private:
  struct Closure {
    std::uint32_t partner;
    bool opening;
  };

  // First pass: DFS tree with ascending neighbor order; non-tree edges
  // become ring closures, recorded on both endpoints.
  void plan(std::uint32_t root) {
    struct Frame {
      std::uint32_t atom;
      std::uint32_t parent;
      std::size_t next;
    };
    std::vector<Frame> stack { { root, UINT32_MAX, 0 } };
    visited_[root] = true;
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &adj = mol_.neighbors(f.atom);
      if (f.next == adj.size()) {
        stack.pop_back();
        continue;
      }
      const std::uint32_t v = adj[f.next++].atom;
      const std::uint32_t u = f.atom;
      if (v == f.parent)
        continue;
      if (!visited_[v]) {
        visited_[v] = true;
        children_[u].push_back(v);
        stack.push_back({ v, u, 0 });
      } else if (!closure_seen(u, v)) {
        // v is an ancestor of u: v opens the ring, u closes it.
        closures_[v].push_back({ u, true });
        closures_[u].push_back({ v, false });
      }
    }
  }

  bool closure_seen(std::uint32_t u, std::uint32_t v) const {
    for (const auto &c: closures_[u])
      if (c.partner == v)
        return true;
    return false;
  }

  std::string bond_text(std::uint32_t a, std::uint32_t b) const {
    const BondOrder order = *mol_.bond(a, b);
    const bool both_aromatic = mol_.atom(a).aromatic && mol_.atom(b).aromatic;
    switch (order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic && rings_.in_ring(a, b) ? "" : ":";
    case BondOrder::kNone:
      break;
    }
    return "";
  }

  std::string label_text(int label) const {
    if (label < 10)
      return std::to_string(label);
    return "%" + std::to_string(label);
  }

  int take_label() {
    for (int l = 1; l < 100; ++l) {
      if (std::find(in_use_.begin(), in_use_.end(), l) == in_use_.end()) {
        in_use_.push_back(l);
        return l;
      }
    }
    throw SerializationError("more than 99 simultaneously open ring closures");
  }

  // Second pass: all children but the last are written as branches.
  void emit(std::uint32_t root) {
    struct Frame {
      std::uint32_t atom;
      std::size_t child;
      bool close_paren;
    };
    write_atom(root);
    std::vector<Frame> stack { { root, 0, false } };
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &kids = children_[f.atom];
      if (f.child == kids.size()) {
        const bool close = f.close_paren;
        stack.pop_back();
        if (close)
          out_.smiles += ')';
        continue;
      }
      const std::size_t i = f.child++;
      const std::uint32_t parent = f.atom;
      const std::uint32_t v = kids[i];
      const bool paren = i + 1 < kids.size();
      if (paren)
        out_.smiles += '(';
      out_.smiles += bond_text(parent, v);
      write_atom(v);
      stack.push_back({ v, 0, paren });
    }
  }

  void write_atom(std::uint32_t a) {
    out_.smiles += atom_text(mol_.atom(a), a);
    out_.atom_order.push_back(a);
    for (const auto &c: closures_[a]) {
      if (c.opening) {
        int label = take_label();
        open_labels_.push_back({ a, c.partner, label });
        out_.smiles += label_text(label);
      } else {
        auto it = std::find_if(open_labels_.begin(), open_labels_.end(),
                               [&](const OpenLabel &o) {
                                 return o.from == c.partner && o.to == a;
                               });
        out_.smiles += bond_text(c.partner, a);
        out_.smiles += label_text(it->label);
        in_use_.erase(std::find(in_use_.begin(), in_use_.end(), it->label));
        open_labels_.erase(it);
      }
    }
  }

  struct OpenLabel {
    std::uint32_t from;
    std::uint32_t to;
    int label;
  };

  const MolGraph &mol_;
  RingInfo rings_;
  std::vector<bool> visited_;
  std::vector<std::vector<Closure>> closures_;
  std::vector<std::vector<std::uint32_t>> children_;
  std::vector<OpenLabel> open_labels_;
  std::vector<int> in_use_;
  SmilesOutput out_;
};

}  // namespace

SmilesOutput write_smiles(const MolGraph &mol, bool allow_invalid) {
  if (!allow_invalid) {
    ValidityReport report = check_valence(mol);
    if (!report.valid) {
      const auto &v = report.violations.front();
      throw SerializationError("atom " + std::to_string(v.atom) + ": "
                               + v.reason);
    }
  }
  return SmilesWriter(mol).write();
}

}  // namespace scaffkit::chem
