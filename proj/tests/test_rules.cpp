#include <catch2/catch_amalgamated.hpp>

#include "disc/enumerate.hpp"
#include "disc/rules.hpp"

using namespace disc;

namespace {

ChemGraph hh() {
  ChemGraph g;
  g.add_vertex("u", "H");
  g.add_vertex("v", "H");
  g.set_bond("u", "v", BondLabel::covalent(1));
  return g;
}

ChemGraph nacl() {
  ChemGraph g;
  g.add_vertex("u", "Na", 1);
  g.add_vertex("v", "Cl", -1);
  g.set_bond("u", "v", BondLabel::ionic());
  return g;
}

const AtomTable table = AtomTable::defaults();

}  // namespace

TEST_CASE("rule parameters must be pairwise distinct") {
  CHECK_THROWS_AS(RuleApp::cov("u", "u", "a", "b"), name_error);
  CHECK_THROWS_AS(RuleApp::cov("u", "v", "a", "a"), name_error);
  CHECK_THROWS_AS(RuleApp::eneg("u", "u", "b"), name_error);
  CHECK_NOTHROW(RuleApp::cov("u", "v", "a", "b"));
}

TEST_CASE("domain checks") {
  CHECK(domain_check(RuleApp::ion("u", "v"), nacl()).in_domain);

  auto rep = domain_check(RuleApp::ion("u", "v"), hh());
  CHECK_FALSE(rep.in_domain);
  CHECK(rep.reason.find("not ionic") != std::string::npos);

  CHECK(domain_check(RuleApp::cov("u", "v", "a", "b"), hh()).in_domain);
  // a repeated name is malformed at construction, before any domain check
  CHECK_THROWS_AS(RuleApp::cov("u", "v", "u2", "u2"), name_error);
  // stub names that already exist in the graph are a domain failure
  CHECK_FALSE(domain_check(RuleApp::cov("u", "v", "a", "u2"), [] {
                ChemGraph g;
                g.add_vertex("u", "H");
                g.add_vertex("v", "H");
                g.add_vertex("u2", "H");
                g.add_vertex("v2", "H");
                g.set_bond("u", "v", BondLabel::covalent(1));
                g.set_bond("u2", "v2", BondLabel::covalent(1));
                return g;
              }())
                  .in_domain);

  SECTION("reversed ion orientation is out of domain") {
    CHECK_FALSE(domain_check(RuleApp::ion("v", "u"), nacl()).in_domain);
  }
}

TEST_CASE("covalent break on H-H") {
  ChemGraph out = apply_rule(RuleApp::cov("u", "v", "a", "b"), hh());
  CHECK(out.bond("u", "v").none());
  CHECK(out.bond("u", "a") == BondLabel::covalent(1));
  CHECK(out.bond("v", "b") == BondLabel::covalent(1));
  CHECK(out.label("a") == VertexLabel{"*", 0});
  CHECK(out.label("b") == VertexLabel{"*", 0});
  CHECK(validate(out, table).ok());
}

TEST_CASE("electron detachment from a bonded stub") {
  ChemGraph g;  // H bonded to a stub
  g.add_vertex("u", "H");
  g.add_vertex("v", "*");
  g.set_bond("u", "v", BondLabel::covalent(1));
  ChemGraph out = apply_rule(RuleApp::enonneg("u", "v"), g);
  CHECK(out.charge("u") == 1);
  CHECK(out.label("v") == VertexLabel{"*", -1});
  CHECK(out.bond("u", "v").none());
  CHECK(validate(out, table).ok());
}

TEST_CASE("electron detachment from an anion") {
  ChemGraph g;
  g.add_vertex("u", "Cl", -1);
  ChemGraph out = apply_rule(RuleApp::eneg("u", "a", "b"), g);
  CHECK(out.charge("u") == 0);
  CHECK(out.bond("u", "a") == BondLabel::covalent(1));
  CHECK(out.label("a") == VertexLabel{"*", 0});
  CHECK(out.label("b") == VertexLabel{"*", -1});
  CHECK(out.neighbours("b").empty());
  CHECK(validate(out, table).ok());
}

TEST_CASE("ionic break on NaCl") {
  ChemGraph out = apply_rule(RuleApp::ion("u", "v"), nacl());
  CHECK(out.charge("u") == 1);
  CHECK(out.charge("v") == -1);
  CHECK(out.bond("u", "v").none());
  CHECK(validate(out, table).ok());
}

TEST_CASE("inversion") {
  auto r = RuleApp::cov("u", "v", "a", "b");
  CHECK(r.invert().invert() == r);
  CHECK(r.invert().direction() == Direction::Connect);

  SECTION("forward then inverse is the identity on the domain") {
    auto g = hh();
    auto fwd = apply_rule(r, g);
    CHECK(apply_rule(r.invert(), fwd) == g);
  }
  SECTION("inverse then forward is the identity on the image") {
    auto g = apply_rule(r, hh());
    CHECK(apply_rule(r, apply_rule(r.invert(), g)) == g);
  }
  SECTION("out-of-domain application reports the reason") {
    CHECK_THROWS_AS(apply_rule(RuleApp::ion("u", "v"), hh()), domain_error);
  }
}

TEST_CASE("connect domains are the exact images of the forward rules") {
  // brute force over a small enumeration: for every in-domain application,
  // the output lies in the connect domain of the inverse, and vice versa
  oracle::EnumOptions opt;
  opt.max_heavy = 2;
  opt.max_alpha = 2;
  long checked = 0;
  oracle::enumerate_graphs(opt, [&](const ChemGraph& g) {
    for (const auto& r : oracle::enumerate_ruleapps(g)) {
      ChemGraph out = apply_rule(r, g);
      CHECK(validate(out, table).ok());
      REQUIRE(domain_check(r.invert(), out).in_domain);
      CHECK(apply_rule(r.invert(), out) == g);
      ++checked;
    }
  });
  CHECK(checked > 100);
}

TEST_CASE("vertex-set law") {
  // disconnections add exactly their subscripts; the two-superscript rules
  // leave the vertex set unchanged
  oracle::EnumOptions opt;
  opt.max_heavy = 2;
  opt.max_alpha = 1;
  oracle::enumerate_graphs(opt, [&](const ChemGraph& g) {
    for (const auto& r : oracle::enumerate_ruleapps(g)) {
      if (r.is_connect()) continue;
      auto out = apply_rule(r, g);
      auto want = g.vertex_names();
      for (const auto& s : r.subscripts()) want.insert(s);
      CHECK(out.vertex_names() == want);
    }
  });
}
