//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include "scaffkit/chem/scaffold.h"
#include "scaffkit/chem/smiles.h"
#include "scaffkit/chem/valence.h"
#include "scaffkit/error.h"
#include "test_support.h"

namespace scaffkit::chem {
namespace {

using test::isomorphic;

MolGraph linear(std::initializer_list<Element> elements) {
  MolGraph g;
  for (auto e: elements)
    g.add_atom({ e });
  for (std::uint32_t i = 1; i < g.num_atoms(); ++i)
    g.add_bond(i - 1, i, BondOrder::kSingle);
  return g;
}

std::size_t parse_error_offset(std::string_view text) {
  try {
    parse_smiles(text);
  } catch (const ParseError &e) {
    return e.offset();
  }
  FAIL("no ParseError for " << text);
  return 0;
}

TEST_CASE("MolGraph storage", "[chem]") {
  MolGraph g = linear({ Element::kC, Element::kC, Element::kO });
  CHECK(g.bond(1, 0) == BondOrder::kSingle);
  CHECK_FALSE(g.bond(0, 2));
  CHECK_THROWS_AS(g.add_bond(1, 1, BondOrder::kSingle), std::invalid_argument);
  CHECK_THROWS_AS(g.add_bond(0, 7, BondOrder::kSingle), std::invalid_argument);
  CHECK_THROWS_AS(g.add_bond(1, 0, BondOrder::kDouble), std::invalid_argument);
  CHECK_THROWS_AS(g.add_bond(0, 2, BondOrder::kNone), std::invalid_argument);

  SECTION("ring detection") {
    MolGraph m = parse_smiles("CC1CCC1C");
    RingInfo r = find_rings(m);
    CHECK_FALSE(r.ring_atom[0]);
    CHECK(r.ring_atom[1]);
    CHECK(r.in_ring(1, 4));
    CHECK_FALSE(r.in_ring(0, 1));
  }
}

TEST_CASE("parse_smiles", "[chem][smiles]") {
  SECTION("ethanol") {
    MolGraph m = parse_smiles("CCO");
    REQUIRE(m.num_atoms() == 3);
    CHECK(m.atom(0).element == Element::kC);
    CHECK(m.atom(2).element == Element::kO);
    CHECK(m.bonds().size() == 2);
    CHECK(m.bond(0, 1) == BondOrder::kSingle);
    CHECK(m.bond(1, 2) == BondOrder::kSingle);
  }

  SECTION("benzene") {
    MolGraph m = parse_smiles("c1ccccc1");
    REQUIRE(m.num_atoms() == 6);
    CHECK(m.num_bonds() == 6);
    for (std::uint32_t i = 0; i < 6; ++i) {
      CHECK(m.atom(i).aromatic);
      CHECK(m.degree(i) == 2);
    }
    for (const auto &[key, order]: m.bonds())
      CHECK(order == BondOrder::kAromatic);
  }

  SECTION("bracket atoms") {
    MolGraph m = parse_smiles("[NH4+]");
    CHECK(m.atom(0).formal_charge == 1);
    CHECK(m.atom(0).explicit_h == 4);
    m = parse_smiles("[O-2]");
    CHECK(m.atom(0).formal_charge == -2);
    m = parse_smiles("C[N--]C");
    CHECK(m.atom(1).formal_charge == -2);
  }

  SECTION("two-digit ring closures and branches") {
    MolGraph m = parse_smiles("C%12CCC%12C(=O)O");
    CHECK(m.num_atoms() == 7);
    CHECK(m.bond(0, 3) == BondOrder::kSingle);
    CHECK(m.bond(4, 5) == BondOrder::kDouble);
    CHECK(m.bond(4, 6) == BondOrder::kSingle);
  }

  SECTION("dot-disconnected components") {
    MolGraph m = parse_smiles("CC.O");
    CHECK(m.num_atoms() == 3);
    CHECK(connected_components(m).size() == 2);
  }

  SECTION("stereo and isotopes are discarded with a warning") {
    std::vector<ParseWarning> warnings;
    MolGraph m = parse_smiles("F/C=C/[13CH2][C@@H](N)O", &warnings);
    CHECK(warnings.size() >= 3);
    CHECK(m.bond(1, 2) == BondOrder::kDouble);
    CHECK(m.atom(3).explicit_h == 2);
    CHECK(m.atom(4).explicit_h == 1);
  }

  SECTION("errors carry byte offsets") {
    CHECK(parse_error_offset("C(") == 1);
    CHECK_THROWS_AS(parse_smiles("C1CC"), ParseError);
    CHECK(parse_error_offset("CXC") == 1);
    CHECK(parse_error_offset("C[Xx]") == 2);
    CHECK_THROWS_AS(parse_smiles("C[C+5]"), ParseError);
    CHECK_THROWS_AS(parse_smiles("C)"), ParseError);
    CHECK_THROWS_AS(parse_smiles(""), ParseError);
    CHECK_THROWS_AS(parse_smiles("C="), ParseError);
    CHECK_THROWS_AS(parse_smiles("C11"), ParseError);
  }

  SECTION("unsupported elements are rejected") {
    CHECK_THROWS_AS(parse_smiles("[Na+].[Cl-]"), ParseError);
  }
}

TEST_CASE("to_smiles", "[chem][smiles]") {
  CHECK(to_smiles(linear({ Element::kC })) == "C");

  SECTION("ethanol round trip") {
    MolGraph m = linear({ Element::kC, Element::kC, Element::kO });
    CHECK(parse_smiles(to_smiles(m)) == m);
  }

  SECTION("benzene round trip") {
    MolGraph m = parse_smiles("c1ccccc1");
    MolGraph back = parse_smiles(to_smiles(m));
    CHECK(back.num_atoms() == 6);
    CHECK(isomorphic(back, m));
  }

  SECTION("atom order is reported") {
    MolGraph m = parse_smiles("C(O)CN");
    SmilesOutput out = write_smiles(test::shuffled(m, 3));
    MolGraph back = parse_smiles(out.smiles);
    CHECK(back == test::shuffled(m, 3).permuted(out.atom_order));
  }

  SECTION("invalid graphs need allow_invalid") {
    MolGraph m = parse_smiles("C(C)(C)(C)(C)C");
    CHECK_THROWS_AS(to_smiles(m), SerializationError);
    CHECK(isomorphic(parse_smiles(to_smiles(m, true)), m));
  }

  SECTION("aromatic halogen has no rendering") {
    MolGraph m;
    m.add_atom({ Element::kCl, true });
    CHECK_THROWS_AS(to_smiles(m, true), SerializationError);
  }
}

TEST_CASE("round trip over the fixture corpora", "[chem][smiles]") {
  std::size_t checked = 0;
  for (const auto *name: { "curated50.csv", "nci_sample500.csv" }) {
    for (const auto &row: test::read_fixture(name)) {
      if (row.count("valid") && row.at("valid") != "1")
        continue;
      const std::string &smi = row.at("smiles");
      INFO(smi);
      MolGraph m = parse_smiles(smi);
      SmilesOutput out = write_smiles(m);
      MolGraph back = parse_smiles(out.smiles);
      CHECK(back == m.permuted(out.atom_order));
      CHECK(write_smiles(m).smiles == out.smiles);
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("check_valence", "[chem][valence]") {
  CHECK(check_valence(parse_smiles("CCO")).valid);

  SECTION("pentavalent carbon") {
    MolGraph m = parse_smiles("C(C)(C)(C)(C)C");
    ValidityReport r = check_valence(m);
    REQUIRE_FALSE(r.valid);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].atom == 0);
  }

  SECTION("ammonium") {
    CHECK(check_valence(parse_smiles("C[N+](C)(C)C")).valid);
    CHECK_FALSE(check_valence(parse_smiles("CN(C)(C)C")).valid);
  }

  SECTION("hypervalent P and S") {
    CHECK(check_valence(parse_smiles("OP(=O)(O)O")).valid);
    CHECK(check_valence(parse_smiles("CS(=O)(=O)C")).valid);
    CHECK_FALSE(check_valence(parse_smiles("FCl(F)F")).valid);
  }

  SECTION("aromatic systems must kekulize") {
    CHECK(check_valence(parse_smiles("c1ccc2ccccc2c1")).valid);
    CHECK(check_valence(parse_smiles("c1cc[nH]c1")).valid);
    CHECK_FALSE(check_valence(parse_smiles("c1cccc1")).valid);
    CHECK(check_valence(parse_smiles("c1ccncc1C")).valid);
  }

  SECTION("hydrogen counts") {
    auto h = hydrogen_counts(parse_smiles("c1ccncc1C(=O)[O-]"));
    CHECK(h == std::vector<int> { 1, 1, 1, 0, 1, 0, 0, 0, 0 });
  }

  SECTION("agreement with the reference sanitization verdicts") {
    for (const auto &row: test::read_fixture("curated50.csv")) {
      INFO(row.at("smiles"));
      MolGraph m = parse_smiles(row.at("smiles"));
      CHECK(check_valence(m).valid == (row.at("valid") == "1"));
      CHECK(m.num_atoms() == std::stoul(row.at("atoms")));
      CHECK(m.num_bonds() == std::stoul(row.at("bonds")));
    }
  }
}

TEST_CASE("murcko_scaffold", "[chem][scaffold]") {
  SECTION("benzene is its own scaffold") {
    MolGraph m = parse_smiles("c1ccccc1");
    auto s = murcko_scaffold(m);
    REQUIRE(s);
    CHECK(*s == m);
  }

  SECTION("ethylbenzene") {
    auto s = murcko_scaffold(parse_smiles("CCc1ccccc1"));
    REQUIRE(s);
    CHECK(isomorphic(*s, parse_smiles("c1ccccc1")));
  }

  SECTION("acyclic molecules have no scaffold") {
    CHECK_FALSE(murcko_scaffold(parse_smiles("CCO")));
    CHECK(scaffold_key(murcko_scaffold(parse_smiles("CCO"))).empty());
  }

  SECTION("agreement with the reference scaffolds") {
    for (const auto &row: test::read_fixture("curated50.csv")) {
      if (row.at("valid") != "1")
        continue;
      INFO(row.at("smiles"));
      auto s = murcko_scaffold(parse_smiles(row.at("smiles")));
      const std::string &expected = row.at("murcko");
      if (expected.empty()) {
        CHECK_FALSE(s);
        continue;
      }
      REQUIRE(s);
      CHECK(isomorphic(*s, parse_smiles(expected)));
      CHECK(check_valence(*s).valid);
    }
  }

  SECTION("idempotent, a subgraph, and hashed order-independently") {
    for (const auto &row: test::read_fixture("nci_sample500.csv")) {
      INFO(row.at("smiles"));
      MolGraph m = parse_smiles(row.at("smiles"));
      auto s = murcko_scaffold(m);
      if (!s)
        continue;
      auto again = murcko_scaffold(*s);
      REQUIRE(again);
      CHECK(*again == *s);
      CHECK(s->num_atoms() <= m.num_atoms());
      CHECK(scaffold_key(murcko_scaffold(test::shuffled(m, 11))) == scaffold_key(s));
    }
  }
}

TEST_CASE("scaffold keys separate distinct scaffolds", "[chem][scaffold]") {
  auto key = [](std::string_view smi) {
    return scaffold_key(murcko_scaffold(parse_smiles(smi)));
  };
  CHECK(key("Cc1ccccc1") == key("c1ccccc1CCC"));
  CHECK(key("c1ccccc1") != key("c1ccncc1"));
  CHECK(key("c1ccccc1Cc1ccccc1") != key("c1ccccc1CCc1ccccc1"));
  CHECK(key("C1CCCCC1") != key("c1ccccc1"));
}

}  // namespace
}  // namespace scaffkit::chem
