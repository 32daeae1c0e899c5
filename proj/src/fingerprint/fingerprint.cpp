//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/fingerprint/fingerprint.h"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

#include "scaffkit/chem/valence.h"
#include "scaffkit/error.h"
#include "scaffkit/util/hash.h"

namespace scaffkit::fp {

Fingerprint::Fingerprint(std::uint32_t nbits, std::uint32_t radius)
    : nbits_(nbits), radius_(radius), words_((nbits + 63) / 64, 0) { }

std::uint32_t Fingerprint::popcount() const {
  std::uint32_t c = 0;
  for (auto w: words_)
    c += static_cast<std::uint32_t>(std::popcount(w));
  return c;
}

std::vector<std::uint32_t> Fingerprint::on_bits() const {
  std::vector<std::uint32_t> bits;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t word = words_[w];
    while (word != 0) {
      int b = std::countr_zero(word);
      bits.push_back(static_cast<std::uint32_t>(w * 64 + b));
      word &= word - 1;
    }
  }
  return bits;
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(nbits_ / 4, '0');
  for (std::uint32_t k = 0; k < out.size(); ++k) {
    unsigned nibble = 0;
    for (unsigned b = 0; b < 4; ++b)
      nibble |= static_cast<unsigned>(test(4 * k + b)) << b;
    out[k] = kDigits[nibble];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, std::uint32_t radius) {
  Fingerprint fp(static_cast<std::uint32_t>(hex.size() * 4), radius);
  for (std::uint32_t k = 0; k < hex.size(); ++k) {
    char c = hex[k];
    unsigned nibble;
    if (c >= '0' && c <= '9')
      nibble = c - '0';
    else if (c >= 'a' && c <= 'f')
      nibble = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      nibble = c - 'A' + 10;
    else
      throw std::invalid_argument("bad hex digit in fingerprint");
    for (unsigned b = 0; b < 4; ++b) {
      if ((nibble >> b) & 1U)
        fp.set(4 * k + b);
    }
  }
  return fp;
}

namespace {

using BondSet = std::vector<std::uint64_t>;

void set_bit(BondSet &s, std::size_t i) {
  s[i >> 6] |= 1ULL << (i & 63);
}

void merge(BondSet &into, const BondSet &from) {
  for (std::size_t w = 0; w < into.size(); ++w)
    into[w] |= from[w];
}

}  // namespace

std::vector<std::uint64_t> circular_identifiers(const chem::MolGraph &mol,
                                                std::uint32_t radius) {
  using chem::BondOrder;
  const auto n = static_cast<std::uint32_t>(mol.num_atoms());
  std::vector<std::uint64_t> ids;
  if (n == 0)
    return ids;

  const chem::RingInfo rings = chem::find_rings(mol);
  const std::vector<int> hydrogens = chem::hydrogen_counts(mol);

  std::vector<std::uint64_t> current(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const chem::AtomType &a = mol.atom(i);
    std::uint64_t h = static_cast<std::uint64_t>(chem::atomic_number(a.element));
    h = hash_combine(h, mol.degree(i));
    h = hash_combine(h, static_cast<std::uint64_t>(hydrogens[i]));
    h = hash_combine(h, static_cast<std::uint64_t>(a.formal_charge + 8));
    h = hash_combine(h, a.aromatic);
    h = hash_combine(h, rings.ring_atom[i]);
    current[i] = h;
    ids.push_back(h);
  }

  std::map<chem::MolGraph::BondKey, std::size_t> bond_index;
  for (const auto &[key, order]: mol.bonds())
    bond_index.emplace(key, bond_index.size());
  const std::size_t words = (bond_index.size() + 63) / 64;

  std::vector<BondSet> neighborhood(n, BondSet(words, 0));
  std::vector<bool> dead(n, false);
  std::set<BondSet> seen;

  struct Candidate {
    BondSet bonds;
    std::uint64_t id;
    std::uint32_t atom;
    bool operator<(const Candidate &o) const {
      return std::tie(bonds, id, atom) < std::tie(o.bonds, o.id, o.atom);
    }
  };

  for (std::uint32_t layer = 0; layer < radius; ++layer) {
    std::vector<Candidate> round;
    std::vector<BondSet> next_neighborhood = neighborhood;
    // Atoms that stop growing keep a zero invariant from here on.
    std::vector<std::uint64_t> next(n, 0);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> terms;

    for (std::uint32_t i = 0; i < n; ++i) {
      if (dead[i])
        continue;
      if (mol.degree(i) == 0) {
        dead[i] = true;
        continue;
      }
      BondSet env = neighborhood[i];
      terms.clear();
      for (const auto &nb: mol.neighbors(i)) {
        set_bit(env, bond_index.at({ std::min(i, nb.atom), std::max(i, nb.atom) }));
        merge(env, neighborhood[nb.atom]);
        terms.emplace_back(static_cast<std::uint64_t>(nb.order), current[nb.atom]);
      }
      std::sort(terms.begin(), terms.end());
      std::uint64_t h = hash_combine(layer, current[i]);
      for (const auto &[bond, inv]: terms)
        h = hash_combine(hash_combine(h, bond), inv);
      next[i] = h;
      next_neighborhood[i] = env;
      round.push_back({ std::move(env), h, i });
    }

    std::sort(round.begin(), round.end());
    for (auto &c: round) {
      if (seen.insert(c.bonds).second)
        ids.push_back(c.id);
      else
        dead[c.atom] = true;
    }
    neighborhood.swap(next_neighborhood);
    current.swap(next);
  }

  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Fingerprint ecfp(const chem::MolGraph &mol, std::uint32_t radius,
                 std::uint32_t nbits) {
  if (nbits < 8 || !std::has_single_bit(nbits))
    throw std::invalid_argument("fingerprint width must be a power of two >= 8");
  Fingerprint fp(nbits, radius);
  for (auto id: circular_identifiers(mol, radius))
    fp.set(static_cast<std::uint32_t>(id % nbits));
  return fp;
}

Fingerprint ecfp(const std::optional<chem::MolGraph> &mol,
                 std::uint32_t radius, std::uint32_t nbits) {
  if (!mol || mol->empty()) {
    if (nbits < 8 || !std::has_single_bit(nbits))
      throw std::invalid_argument("fingerprint width must be a power of two >= 8");
    return Fingerprint(nbits, radius);
  }
  return ecfp(*mol, radius, nbits);
}

double tanimoto(const Fingerprint &x, const Fingerprint &y) {
  if (x.nbits() != y.nbits()) {
    throw WidthMismatch("tanimoto on fingerprints of width "
                        + std::to_string(x.nbits()) + " and "
                        + std::to_string(y.nbits()));
  }
  std::uint32_t inter = 0, uni = 0;
  const auto &a = x.words();
  const auto &b = y.words();
  for (std::size_t w = 0; w < a.size(); ++w) {
    inter += static_cast<std::uint32_t>(std::popcount(a[w] & b[w]));
    uni += static_cast<std::uint32_t>(std::popcount(a[w] | b[w]));
  }
  if (uni == 0)
    return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void write_fingerprint_cache(
    std::ostream &os,
    const std::vector<std::pair<std::string, Fingerprint>> &entries) {
  for (const auto &[id, fp]: entries)
    os << id << ',' << fp.to_hex() << '\n';
}

std::vector<std::pair<std::string, Fingerprint>>
read_fingerprint_cache(std::istream &is, std::uint32_t radius) {
  std::vector<std::pair<std::string, Fingerprint>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw IoError("fingerprint cache line " + std::to_string(lineno)
                    + ": expected <id>,<hex>");
    out.emplace_back(line.substr(0, comma),
                     Fingerprint::from_hex(std::string_view(line).substr(comma + 1),
                                           radius));
  }
  return out;
}

}  // namespace scaffkit::fp
