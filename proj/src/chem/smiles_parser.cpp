//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "scaffkit/chem/smiles.h"
#include "scaffkit/error.h"

namespace scaffkit::chem {
namespace {

struct RingOpening {
  std::uint32_t atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

struct PendingBond {
  BondOrder order;
  std::size_t offset;
};

class SmilesParser {
public:
  SmilesParser(std::string_view text, std::vector<ParseWarning> *warnings)
      : text_(text), warnings_(warnings) { }

  MolGraph parse() {
    if (text_.empty())
      throw ParseError("empty SMILES", 0);

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        open_branch();
      } else if (c == ')') {
        close_branch();
      } else if (c == '.') {
        if (pending_)
          throw ParseError("bond before '.'", pending_->offset);
        if (prev_ < 0)
          throw ParseError("'.' without a preceding atom", pos_);
        if (!branches_.empty())
          throw ParseError("'.' inside a branch", pos_);
        prev_ = -1;
        ++pos_;
      } else if (is_bond_char(c)) {
        read_bond();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_closure();
      } else if (c == '[') {
        add_atom(read_bracket_atom());
      } else {
        add_atom(read_organic_atom());
      }
    }

    if (pending_)
      throw ParseError("dangling bond", pending_->offset);
    if (!branches_.empty())
      throw ParseError("unclosed branch", branches_.back().offset);
    if (!rings_.empty()) {
      throw ParseError("unbalanced ring closure " + std::to_string(rings_.begin()->first),
                       rings_.begin()->second.offset);
    }
    if (prev_ < 0)
      throw ParseError("SMILES ends without an atom", text_.size());

    demote_acyclic_aromatic_bonds();
    return std::move(mol_);
  }

private:
  struct Branch {
    std::uint32_t atom;
    std::size_t offset;
  };

  static bool is_bond_char(char c) {
    return c == '-' || c == '=' || c == '#' || c == ':' || c == '/'
           || c == '\\' || c == '$';
  }

  void warn(std::size_t offset, std::string message) {
    if (warnings_ != nullptr)
      warnings_->push_back({ offset, std::move(message) });
  }

  void open_branch() {
    if (prev_ < 0)
      throw ParseError("branch without a preceding atom", pos_);
    if (pending_)
      throw ParseError("bond before '('", pending_->offset);
    branches_.push_back({ static_cast<std::uint32_t>(prev_), pos_ });
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty())
      throw ParseError("unmatched ')'", pos_);
    if (pending_)
      throw ParseError("dangling bond before ')'", pending_->offset);
    if (text_[pos_ - 1] == '(')
      throw ParseError("empty branch", pos_ - 1);
    prev_ = branches_.back().atom;
    branches_.pop_back();
    ++pos_;
  }

  void read_bond() {
    if (pending_)
      throw ParseError("two consecutive bond symbols", pos_);
    if (prev_ < 0)
      throw ParseError("bond without a preceding atom", pos_);
    BondOrder order;
    switch (text_[pos_]) {
    case '-':
      order = BondOrder::kSingle;
      break;
    case '=':
      order = BondOrder::kDouble;
      break;
    case '#':
      order = BondOrder::kTriple;
      break;
    case ':':
      order = BondOrder::kAromatic;
      break;
    case '/':
    case '\\':
      warn(pos_, "directional bond treated as single");
      order = BondOrder::kSingle;
      break;
    default:
      throw ParseError("unsupported bond symbol '$'", pos_);
    }
    pending_ = PendingBond { order, pos_ };
    ++pos_;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0)
      throw ParseError("ring closure without a preceding atom", pos_);
    int label;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size()
          || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))
          || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
        throw ParseError("malformed %nn ring closure", pos_);
      label = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      label = text_[pos_] - '0';
      ++pos_;
    }

    std::optional<BondOrder> order;
    if (pending_) {
      order = pending_->order;
      pending_.reset();
    }

    const auto here = static_cast<std::uint32_t>(prev_);
    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_.emplace(label, RingOpening { here, order, start });
      return;
    }

    RingOpening open = it->second;
    rings_.erase(it);
    if (open.atom == here)
      throw ParseError("ring closure bonds an atom to itself", start);
    if (mol_.bond(open.atom, here))
      throw ParseError("ring closure duplicates an existing bond", start);
    if (open.order && order && *open.order != *order)
      throw ParseError("conflicting ring closure bond orders", start);
    BondOrder final = order ? *order
                            : open.order ? *open.order
                                         : default_order(open.atom, here);
    if (!order && !open.order && final == BondOrder::kAromatic)
      implicit_aromatic_.insert(key(open.atom, here));
    mol_.add_bond(open.atom, here, final);
  }

  BondOrder default_order(std::uint32_t a, std::uint32_t b) const {
    return mol_.atom(a).aromatic && mol_.atom(b).aromatic
               ? BondOrder::kAromatic
               : BondOrder::kSingle;
  }

  static MolGraph::BondKey key(std::uint32_t a, std::uint32_t b) {
    return { std::min(a, b), std::max(a, b) };
  }

  void add_atom(const AtomType &atom) {
    const std::uint32_t idx = mol_.add_atom(atom);
    if (prev_ >= 0) {
      const auto p = static_cast<std::uint32_t>(prev_);
      if (pending_) {
        mol_.add_bond(p, idx, pending_->order);
      } else {
        BondOrder order = default_order(p, idx);
        if (order == BondOrder::kAromatic)
          implicit_aromatic_.insert(key(p, idx));
        mol_.add_bond(p, idx, order);
      }
    } else if (pending_) {
      throw ParseError("bond without a preceding atom", pending_->offset);
    }
    pending_.reset();
    prev_ = static_cast<int>(idx);
  }

  AtomType read_organic_atom() {
    const std::size_t start = pos_;
    const char c = text_[pos_];
    AtomType atom;
    auto two = text_.substr(pos_, 2);
    if (two == "Cl" || two == "Br") {
      atom.element = two == "Cl" ? Element::kCl : Element::kBr;
      pos_ += 2;
      return atom;
    }
    switch (c) {
    case 'B':
    case 'C':
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I':
      atom.element = *element_from_symbol(std::string_view(&text_[pos_], 1));
      break;
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's': {
      char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      atom.element = *element_from_symbol(std::string_view(&upper, 1));
      atom.aromatic = true;
      break;
    }
    default:
      throw ParseError(std::string("unknown element '") + c + "'", start);
    }
    ++pos_;
    return atom;
  }

  int read_number() {
    int value = 0;
    while (pos_ < text_.size()
           && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 1000000)
        throw ParseError("number too large", pos_);
      ++pos_;
    }
    return value;
  }

  bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

  AtomType read_bracket_atom() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    AtomType atom;

    if (pos_ < text_.size()
        && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      std::size_t iso = pos_;
      read_number();
      warn(iso, "isotope ignored");
    }

    const std::size_t sym = pos_;
    if (pos_ >= text_.size())
      throw ParseError("bad bracket atom: unterminated", open);
    char c = text_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      // Aromatic symbol; two-letter aromatic symbols (se, as) are not
      // in the supported element set.
      if (text_.substr(pos_, 2) == "se" || text_.substr(pos_, 2) == "as")
        throw ParseError("unknown element '" + std::string(text_.substr(pos_, 2)) + "'", sym);
      char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      auto e = element_from_symbol(std::string_view(&upper, 1));
      if (!e || (*e != Element::kB && *e != Element::kC && *e != Element::kN
                 && *e != Element::kO && *e != Element::kP && *e != Element::kS))
        throw ParseError(std::string("unknown element '") + c + "'", sym);
      atom.element = *e;
      atom.aromatic = true;
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::size_t len = 1;
      if (pos_ + 1 < text_.size()
          && std::islower(static_cast<unsigned char>(text_[pos_ + 1])))
        len = 2;
      auto e = element_from_symbol(text_.substr(pos_, len));
      if (!e) {
        throw ParseError(
            "unknown element '" + std::string(text_.substr(pos_, len)) + "'", sym);
      }
      atom.element = *e;
      pos_ += len;
    } else if (c == '*') {
      throw ParseError("unknown element '*'", sym);
    } else {
      throw ParseError("bad bracket atom: missing element symbol", sym);
    }

    if (at('@')) {
      std::size_t chir = pos_;
      ++pos_;
      if (at('@')) {
        ++pos_;
      } else if (pos_ + 1 < text_.size()
                 && std::isupper(static_cast<unsigned char>(text_[pos_]))
                 && std::isupper(static_cast<unsigned char>(text_[pos_ + 1]))) {
        pos_ += 2;  // @TH1, @AL2, @SP3, @TB10, @OH20
        read_number();
      }
      warn(chir, "chirality ignored");
    }

    if (at('H')) {
      ++pos_;
      int h = 1;
      if (pos_ < text_.size()
          && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        h = read_number();
      if (h > 4)
        throw ParseError("bad bracket atom: hydrogen count", pos_ - 1);
      atom.explicit_h = static_cast<std::uint8_t>(h);
    }

    if (at('+') || at('-')) {
      const std::size_t ch = pos_;
      const char sign = text_[pos_];
      ++pos_;
      int magnitude = 1;
      if (pos_ < text_.size()
          && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        magnitude = read_number();
      } else {
        while (at(sign)) {
          ++magnitude;
          ++pos_;
        }
      }
      if (magnitude > 2)
        throw ParseError("bad bracket atom: formal charge out of range", ch);
      atom.formal_charge = static_cast<std::int8_t>(sign == '+' ? magnitude : -magnitude);
    }

    if (at(':')) {
      std::size_t cls = pos_;
      ++pos_;
      if (pos_ >= text_.size()
          || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        throw ParseError("bad bracket atom: atom class", cls);
      read_number();
      warn(cls, "atom class ignored");
    }

    if (!at(']'))
      throw ParseError("bad bracket atom", pos_ < text_.size() ? pos_ : open);
    ++pos_;
    return atom;
  }

  // Implicit bonds between aromatic atoms outside any ring join aromatic
  // systems (biphenyl) and are single bonds.
  void demote_acyclic_aromatic_bonds() {
    if (implicit_aromatic_.empty())
      return;
    RingInfo rings = find_rings(mol_);
    for (const auto &k: implicit_aromatic_) {
      if (!rings.in_ring(k.first, k.second))
        mol_.set_bond_order(k.first, k.second, BondOrder::kSingle);
    }
  }

  std::string_view text_;
  std::vector<ParseWarning> *warnings_;
  std::size_t pos_ = 0;
  MolGraph mol_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<Branch> branches_;
  std::map<int, RingOpening> rings_;
  std::set<MolGraph::BondKey> implicit_aromatic_;
};

}  // namespace

MolGraph parse_smiles(std::string_view text,
                      std::vector<ParseWarning> *warnings) {
  return SmilesParser(text, warnings).parse();
}

}  // namespace scaffkit::chem
