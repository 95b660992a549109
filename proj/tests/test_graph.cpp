#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "disc/graph.hpp"

using namespace disc;

namespace {

ChemGraph hh() {
  ChemGraph g;
  g.add_vertex("u", "H");
  g.add_vertex("v", "H");
  g.set_bond("u", "v", BondLabel::covalent(1));
  return g;
}

ChemGraph carbonate() {
  ChemGraph g;
  g.add_vertex("u", "C");
  g.add_vertex("v", "O");
  g.add_vertex("w", "O", -1);
  g.add_vertex("z", "O", -1);
  g.set_bond("u", "v", BondLabel::covalent(2));
  g.set_bond("u", "w", BondLabel::covalent(1));
  g.set_bond("u", "z", BondLabel::covalent(1));
  return g;
}

ChemGraph nacl() {
  ChemGraph g;
  g.add_vertex("u", "Na", 1);
  g.add_vertex("v", "Cl", -1);
  g.set_bond("u", "v", BondLabel::ionic());
  return g;
}

ChemGraph synthonA() {
  ChemGraph g;
  g.add_vertex("r", "C");
  g.add_vertex("u", "O");
  g.add_vertex("a", "*");
  g.add_vertex("b", "*");
  g.set_bond("r", "u", BondLabel::covalent(2));
  g.set_bond("r", "a", BondLabel::covalent(1));
  g.set_bond("r", "b", BondLabel::covalent(1));
  return g;
}

const AtomTable table = AtomTable::defaults();

}  // namespace

TEST_CASE("validity of small graphs") {
  CHECK(validate(ChemGraph{}, table).ok());
  CHECK(validate(hh(), table).ok());
  CHECK(validate(carbonate(), table).ok());
  CHECK(validate(nacl(), table).ok());
  CHECK(validate(synthonA(), table).ok());

  SECTION("charge mutation breaks the valence balance") {
    ChemGraph g = carbonate();
    g.set_charge("w", 0);
    auto rep = validate(g, table);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().condition == "valence");
    CHECK(rep.violations.front().vertices.front() == "w");
  }

  SECTION("a neutral isolated * violates the valence condition") {
    ChemGraph g;
    g.add_vertex("a", "*", 0);
    CHECK_FALSE(validate(g, table).ok());
    ChemGraph h;
    h.add_vertex("a", "*", -1);
    CHECK(validate(h, table).ok());
  }

  SECTION("unknown element is its own violation class") {
    ChemGraph g;
    g.add_vertex("a", "Xx", 0);
    auto rep = validate(g, table);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().condition == "element");
  }

  SECTION("a * vertex with two neighbours is rejected") {
    ChemGraph g;
    g.add_vertex("a", "*");
    g.add_vertex("u", "O");
    g.add_vertex("v", "O", -1);
    g.add_vertex("w", "*");
    g.set_bond("a", "u", BondLabel::covalent(1));
    g.set_bond("a", "v", BondLabel::covalent(1));
    auto rep = validate(g, table);
    CHECK_FALSE(rep.ok());
  }

  SECTION("ionic partners must carry opposite nonzero charges") {
    ChemGraph g = nacl();
    g.set_charge("u", 0);
    g.set_charge("v", 0);
    auto rep = validate(g, table);
    bool sawIon = false;
    for (const auto& v : rep.violations) sawIon = sawIon || v.condition == "ion-charge";
    CHECK(sawIon);
  }
}

TEST_CASE("vertex classification") {
  auto c = classify(synthonA());
  CHECK(c.alpha == std::set<std::string>{"a", "b"});
  CHECK(c.chem == std::set<std::string>{"r", "u"});
  CHECK(c.charged.empty());
  CHECK(c.neutral.size() == 4);

  auto n = classify(nacl());
  CHECK(n.negative == std::set<std::string>{"v"});
  CHECK(n.positive == std::set<std::string>{"u"});

  auto e = classify(ChemGraph{});
  CHECK(e.alpha.empty());
  CHECK(e.chem.empty());
  CHECK(e.neutral.empty());
}

TEST_CASE("net charge") {
  CHECK(net_charge(carbonate()) == -2);
  CHECK(net_charge(nacl()) == 0);
  CHECK(net_charge(hh(), {}) == 0);
  CHECK_THROWS_AS(net_charge(hh(), {"nope"}), name_error);
}

TEST_CASE("neighbour sets") {
  auto g = nacl();
  CHECK(g.ion_neighbours("u") == std::set<std::string>{"v"});
  CHECK(g.cov_neighbours("u").empty());
  auto h = hh();
  CHECK(h.cov_neighbours("u") == std::set<std::string>{"v"});
  ChemGraph iso;
  iso.add_vertex("a", "*", -1);
  CHECK(iso.neighbours("a").empty());
  CHECK(iso.cov_neighbours("a").empty());
  CHECK(iso.ion_neighbours("a").empty());
  CHECK_THROWS_AS(iso.neighbours("b"), name_error);
}

TEST_CASE("renaming") {
  auto g = hh();
  auto g2 = rename(g, "u", "w");
  CHECK(g2.has_vertex("w"));
  CHECK_FALSE(g2.has_vertex("u"));
  CHECK(g2.bond("w", "v") == BondLabel::covalent(1));

  CHECK(rename(g, "u", "u") == g);
  CHECK(rename(rename(g, "u", "w"), "w", "u") == g);

  CHECK_THROWS_AS(rename(g, "u", "v"), name_error);
  CHECK_THROWS_AS(rename(g, "x", "y"), name_error);
}

TEST_CASE("isomorphism verification") {
  auto g = hh();
  std::map<std::string, std::string> id{{"u", "u"}, {"v", "v"}};
  CHECK(check_iso(g, g, id));

  ChemGraph h;
  h.add_vertex("w", "H");
  h.add_vertex("z", "H");
  h.set_bond("w", "z", BondLabel::covalent(1));
  CHECK(check_iso(g, h, {{"u", "w"}, {"v", "z"}}));
  CHECK(check_iso(g, h, {{"u", "z"}, {"v", "w"}}));

  ChemGraph ions;
  ions.add_vertex("w", "H", 1);
  ions.add_vertex("z", "H", -1);
  ions.set_bond("w", "z", BondLabel::ionic());
  CHECK_FALSE(check_iso(g, ions, {{"u", "w"}, {"v", "z"}}));
  CHECK_FALSE(check_iso(g, h, {{"u", "w"}, {"v", "w"}}));
}

TEST_CASE("graph text format") {
  auto g = carbonate();
  std::string text = print_graph(g, "B");
  auto parsed = parse_graphs(text);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].name == "B");
  CHECK(parsed[0].graph == g);
  CHECK(print_graph(parsed[0].graph, "B") == text);

  SECTION("comments and blank lines are ignored") {
    auto blocks = parse_graphs("# leading comment\n\ngraph g\nv a * -1  # trailing\n");
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].graph.charge("a") == -1);
  }

  SECTION("parse failures carry positions") {
    CHECK_THROWS_AS(parse_graphs("v a H 0\n"), parse_error);
    CHECK_THROWS_AS(parse_graphs("graph g\nv a H zero\n"), parse_error);
    CHECK_THROWS_AS(parse_graphs("graph g\nv a H 0\ne a a 1\n"), parse_error);
    CHECK_THROWS_AS(parse_graphs("graph g\nv a H 0\nv b H 0\ne a b 9\n"), parse_error);
  }

  SECTION("fixture files parse and validate") {
    for (const char* name : {"hh.graph", "nacl.graph", "carbonate.graph", "synthonA.graph",
                             "benzyl_reagents.graph", "benzyl_products.graph"}) {
      std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
      REQUIRE(in);
      std::stringstream ss;
      ss << in.rdbuf();
      auto blocks = parse_graphs(ss.str());
      REQUIRE_FALSE(blocks.empty());
      for (const auto& b : blocks) CHECK(validate(b.graph, table).ok());
    }
  }
}

TEST_CASE("atom table") {
  CHECK(table.valence("C") == 4);
  CHECK(table.valence("*") == 1);
  CHECK_FALSE(table.valence("Xx"));
  CHECK_THROWS(AtomTable::parse("* 3\nC 4\nO 2\n"));
  auto t = AtomTable::parse("# custom\nN 5\nC 4\nH 1\n");
  CHECK(t.valence("N") == 5);
}
