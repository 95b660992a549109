#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "disc/enumerate.hpp"
#include "disc/normalize.hpp"
#include "disc/semantics.hpp"

using namespace disc;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ChemGraph hh() {
  ChemGraph g;
  g.add_vertex("u", "H");
  g.add_vertex("v", "H");
  g.set_bond("u", "v", BondLabel::covalent(1));
  return g;
}

}  // namespace

TEST_CASE("per-atom interpretation") {
  auto tt = elaborate(parse_term("C[u,v;a,b]"), hh());
  Reaction r = functor_image(tt);
  CHECK(r.uA() == std::set<std::string>{"u", "v"});
  CHECK(r.uB() == std::set<std::string>{"u", "v", "a", "b"});
  CHECK(validate_reaction(r).ok);

  auto e = functor_image(elaborate(UntypedTerm{}, hh()));
  CHECK(eq_reaction(e, identity(hh())));

  auto ren = functor_image_sets(elaborate(parse_term("R[v>w]"), [] {
                                  ChemGraph g;
                                  g.add_vertex("u", "H");
                                  g.add_vertex("v", "*");
                                  g.set_bond("u", "v", BondLabel::covalent(1));
                                  return g;
                                }()));
  CHECK(ren.r1 == std::set<std::string>{"v"});
  CHECK(ren.r2 == std::set<std::string>{"w"});
}

TEST_CASE("functoriality against reaction composition") {
  oracle::EnumOptions opt;
  opt.max_heavy = 2;
  opt.max_alpha = 2;
  auto graphs = oracle::enumerate_graphs(opt);
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  for (int i = 0; i < 150; ++i) {
    auto t = oracle::random_typable_term(graphs[pick(rng)], rng);
    auto s = oracle::random_typable_term(t.target(), rng);
    TypedTerm joined;
    joined.atoms = t.atoms;
    joined.graphs = t.graphs;
    for (std::size_t k = 0; k < s.atoms.size(); ++k) {
      joined.atoms.push_back(s.atoms[k]);
      joined.graphs.push_back(s.graphs[k + 1]);
    }
    CHECK(eq_reaction(functor_image(joined), compose(functor_image(t), functor_image(s))));
    CHECK(dagger_compat_check(t));
  }
}

TEST_CASE("the worked example's interpretation matches its reaction") {
  auto A = parse_graphs(slurp("benzyl_reagents.graph"))[0].graph;
  auto r = parse_reaction(slurp("benzyl.reaction"));
  auto tf = parse_term_file(slurp("example29.term"));
  auto tt = elaborate(tf.terms.at(0), A);

  CHECK(dagger_compat_check(tt));

  Reaction img = functor_image(tt);
  CHECK(img.uA() == r.uA());
  CHECK(img.uB() == r.uB());
  CHECK(img.source() == r.source());
  CHECK(img.target() == r.target());
  // the interpretation is the example reaction itself: identity maps over the
  // same changed region
  CHECK(eq_reaction(img, r));
}

TEST_CASE("decompose golden cases") {
  SECTION("identity reactions decompose to the empty term") {
    auto d = decompose(identity(hh()));
    CHECK(d.term.atoms.empty());
    CHECK(d.iota.size() == 2);
    CHECK(roundtrip_check(identity(hh())));
  }

  SECTION("ionic bond formation") {
    ChemGraph A, C;
    A.add_vertex("u", "Na", 1);
    A.add_vertex("v", "Cl", -1);
    C = A;
    C.set_bond("u", "v", BondLabel::ionic());
    Reaction r = Reaction::checked(A, C, {"u", "v"}, {"u", "v"},
                                   {{"u", "u"}, {"v", "v"}}, {});
    auto d = decompose(r);
    // the product formula pays an electron round-trip for the Cl anion, then
    // reconnects; its normal form is the bare ionic connection
    CHECK(print_term(d.term.atoms) ==
          "E[v;_g0,_g1] ; E[v,_g0] ; ~E[v,_g0] ; ~E[v;_g0,_g1] ; ~I[u,v] ; S[u] ; S[v]");
    CHECK(roundtrip_check(r));
    auto nf = to_normal_form(d.term);
    CHECK(print_term(nf.term.atoms) == "~I[u,v]");
  }

  SECTION("the benzyl benzoate reaction round-trips") {
    auto r = parse_reaction(slurp("benzyl.reaction"));
    auto d = decompose(r);
    CHECK(is_ice_form(d.term));
    CHECK(roundtrip_check(r));
    Reaction img = functor_image(d.term);
    Reaction recomposed = compose(img, iso_as_reaction(d.term.target(), r.target(), d.iota));
    CHECK(eq_reaction(recomposed, r));
  }

  SECTION("decomposition output is in ICE order on random reactions") {
    oracle::EnumOptions opt;
    opt.max_heavy = 2;
    opt.max_alpha = 2;
    auto graphs = oracle::enumerate_graphs(opt);
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
    for (int i = 0; i < 80; ++i) {
      auto t = oracle::random_typable_term(graphs[pick(rng)], rng);
      Reaction r = functor_image(t);
      auto d = decompose(r);
      CHECK(is_ice_form(d.term));
      CHECK(roundtrip_check(r));
    }
  }
}

TEST_CASE("invalid reactions are rejected by decompose") {
  ChemGraph A, C;
  A.add_vertex("u", "Na", 1);
  C.add_vertex("u", "Na", 1);
  auto bad =
      Reaction::unchecked(A, C, {"u"}, {}, {{"u", "u"}}, {});  // unbalanced tuple
  CHECK_THROWS(decompose(bad));
}
