#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "disc/enumerate.hpp"
#include "disc/reaction.hpp"
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

Reaction benzyl() { return parse_reaction(slurp("benzyl.reaction")); }

ChemGraph hh() {
  ChemGraph g;
  g.add_vertex("u", "H");
  g.add_vertex("v", "H");
  g.set_bond("u", "v", BondLabel::covalent(1));
  return g;
}

}  // namespace

TEST_CASE("identity reactions validate") {
  auto r = identity(hh());
  CHECK(validate_reaction(r).ok);
  CHECK(r.uA().empty());
  CHECK(r.uB().empty());
  CHECK(r.i().size() == 2);
  CHECK(dagger(r) == r);
}

TEST_CASE("the benzyl benzoate reaction validates") {
  auto r = benzyl();
  CHECK(validate_reaction(r).ok);

  SECTION("perturbing one changed-region charge breaks net charge") {
    ChemGraph s = r.source();
    s.set_charge("z", -1);
    auto broken = Reaction::unchecked(s, r.target(), r.uA(), r.uB(), r.b(), r.i());
    auto rep = validate_reaction(broken);
    REQUIRE_FALSE(rep.ok);
    // the mutation also breaks graph validity upstream, but as a reaction
    // tuple the first failing clause is the charge balance
    CHECK(rep.clause == "net-charge");
  }

  SECTION("a label clash in b is reported") {
    auto b = r.b();
    b["z"] = "u";
    b["u"] = "z";
    auto broken = Reaction::unchecked(r.source(), r.target(), r.uA(), r.uB(), b, r.i());
    auto rep = validate_reaction(broken);
    REQUIRE_FALSE(rep.ok);
    CHECK(rep.clause == "labels");
  }

  SECTION("a complement mismatch is reported") {
    auto i = r.i();
    std::swap(i["h2"], i["m1"]);
    auto broken = Reaction::unchecked(r.source(), r.target(), r.uA(), r.uB(), r.b(), i);
    auto rep = validate_reaction(broken);
    REQUIRE_FALSE(rep.ok);
    CHECK(rep.clause == "complement-iso");
  }
}

TEST_CASE("composition laws") {
  auto r = benzyl();

  SECTION("units") {
    CHECK(eq_reaction(compose(identity(r.source()), r), r));
    CHECK(eq_reaction(compose(r, identity(r.target())), r));
  }

  SECTION("composing with the dagger touches exactly the changed region") {
    auto rt = compose(r, dagger(r));
    // hand-composed tuple from the composition formulas: Z_A = U_A since the
    // middle complement contributes nothing, all maps collapse to identities
    std::map<std::string, std::string> b, i;
    for (const auto& n : r.uA()) b[n] = n;
    for (const auto& [n, lbl] : r.source().vertices())
      if (!r.uA().count(n)) i[n] = n;
    Reaction expect = Reaction::unchecked(r.source(), r.source(), r.uA(), r.uA(), b, i);
    CHECK(eq_reaction(rt, expect));
    CHECK(validate_reaction(rt).ok);
  }

  SECTION("middle-graph mismatch is rejected") {
    CHECK_THROWS_AS(compose(r, r), compose_error);
  }

  SECTION("dagger is a contravariant involution") {
    CHECK(eq_reaction(dagger(dagger(r)), r));
    auto rt = compose(r, dagger(r));
    CHECK(eq_reaction(dagger(rt), compose(r, dagger(r))));
  }
}

TEST_CASE("associativity on enumerated triples") {
  oracle::EnumOptions opt;
  opt.max_heavy = 2;
  opt.max_alpha = 2;
  auto graphs = oracle::enumerate_graphs(opt);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  oracle::TermGenOptions tg;
  tg.max_len = 4;
  int done = 0;
  for (int i = 0; i < 120; ++i) {
    const ChemGraph& a = graphs[pick(rng)];
    auto t1 = oracle::random_typable_term(a, rng, tg);
    auto t2 = oracle::random_typable_term(t1.target(), rng, tg);
    auto t3 = oracle::random_typable_term(t2.target(), rng, tg);
    Reaction r = functor_image(t1), s = functor_image(t2), t = functor_image(t3);
    CHECK(eq_reaction(compose(compose(r, s), t), compose(r, compose(s, t))));
    CHECK(eq_reaction(dagger(compose(r, s)), compose(dagger(s), dagger(r))));
    CHECK(validate_reaction(compose(r, s)).ok);
    ++done;
  }
  CHECK(done == 120);
}

TEST_CASE("net charge is preserved by composition") {
  oracle::EnumOptions opt;
  opt.max_heavy = 2;
  opt.max_alpha = 1;
  auto graphs = oracle::enumerate_graphs(opt);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  oracle::TermGenOptions tg;
  tg.max_len = 4;
  for (int i = 0; i < 60; ++i) {
    const ChemGraph& a = graphs[pick(rng)];
    auto t1 = oracle::random_typable_term(a, rng, tg);
    auto t2 = oracle::random_typable_term(t1.target(), rng, tg);
    auto c = compose(functor_image(t1), functor_image(t2));
    CHECK(net_charge(c.source(), c.uA()) == net_charge(c.target(), c.uB()));
  }
}

TEST_CASE("reaction text format round-trips") {
  auto r = benzyl();
  auto text = print_reaction(r);
  auto back = parse_reaction(text);
  CHECK(back == r);
  CHECK(print_reaction(back) == text);

  CHECK_THROWS_AS(parse_reaction("graph A\nv u H 0\n"), parse_error);
}

TEST_CASE("two identities on name-disjoint isomorphic graphs differ") {
  ChemGraph g = hh();
  ChemGraph h;
  h.add_vertex("w", "H");
  h.add_vertex("z", "H");
  h.set_bond("w", "z", BondLabel::covalent(1));
  CHECK_FALSE(eq_reaction(identity(g), identity(h)));
  CHECK(eq_reaction(identity(g), identity(g)));
}
