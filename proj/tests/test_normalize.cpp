#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "disc/enumerate.hpp"
#include "disc/normalize.hpp"

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

// four interchangeable stubs on one carbon
ChemGraph methane_stubs() {
  ChemGraph g;
  g.add_vertex("c", "C");
  for (const char* n : {"u", "p", "q", "s"}) {
    g.add_vertex(n, "*");
    g.set_bond("c", n, BondLabel::covalent(1));
  }
  return g;
}

ChemGraph benzylA() { return parse_graphs(slurp("benzyl_reagents.graph"))[0].graph; }

UntypedTerm example29() { return parse_term_file(slurp("example29.term")).terms.at(0); }

UntypedTerm nf5() { return parse_term_file(slurp("nf5.term")).terms.at(0); }

}  // namespace

TEST_CASE("ICE form") {
  SECTION("the worked example is already in block order") {
    auto tt = elaborate(example29(), benzylA());
    REQUIRE(is_ice_form(tt));
    auto ice = to_ice_form(tt);
    CHECK(ice.atoms == tt.atoms);
  }

  SECTION("the empty term is an ICE form") {
    auto tt = elaborate(UntypedTerm{}, hh());
    CHECK(is_ice_form(tt));
    CHECK(to_ice_form(tt).atoms.empty());
  }

  SECTION("a connection commutes right past an ionic break") {
    ChemGraph g;  // fragments that can connect covalently, plus an ion pair
    g.add_vertex("u", "H");
    g.add_vertex("v", "H");
    g.add_vertex("a", "*");
    g.add_vertex("b", "*");
    g.set_bond("u", "a", BondLabel::covalent(1));
    g.set_bond("v", "b", BondLabel::covalent(1));
    g.add_vertex("w", "Na", 1);
    g.add_vertex("z", "Cl", -1);
    g.set_bond("w", "z", BondLabel::ionic());
    auto tt = elaborate(parse_term("~C[u,v;a,b] ; I[w,z]"), g);
    REQUIRE_FALSE(is_ice_form(tt));
    Trace tr;
    auto ice = to_ice_form(tt, &tr);
    CHECK(print_term(ice.atoms) == "I[w,z] ; ~C[u,v;a,b]");
    REQUIRE_FALSE(tr.empty());
    CHECK(tr.front().rule == "comm8");
    CHECK(ice.source() == tt.source());
    CHECK(ice.target() == tt.target());
  }

  SECTION("ids drop, endpoints stay") {
    auto tt = elaborate(parse_term("id ; S[u] ; id"), hh());
    auto ice = to_ice_form(tt);
    CHECK(print_term(ice.atoms) == "S[u]");
  }

  SECTION("random terms reach block order with meaning intact") {
    oracle::EnumOptions opt;
    opt.max_heavy = 2;
    opt.max_alpha = 2;
    auto graphs = oracle::enumerate_graphs(opt);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
    for (int i = 0; i < 150; ++i) {
      auto t = oracle::random_typable_term(graphs[pick(rng)], rng);
      auto ice = to_ice_form(t);
      CHECK(is_ice_form(ice));
      CHECK(ice.source() == t.source());
      CHECK(ice.target() == t.target());
      CHECK(functor_image_sets(ice) == functor_image_sets(t));
    }
  }
}

TEST_CASE("renaming form") {
  auto g = methane_stubs();

  SECTION("a single rename is its own form") {
    auto tt = elaborate(parse_term("R[u>b]"), g);
    auto rf = to_renaming_form(tt);
    CHECK(print_term(rf.atoms) == "R[u>b]");
    auto sets = renaming_sets(rf.atoms);
    CHECK(sets.A == std::set<std::string>{"u"});
    CHECK(sets.B == std::set<std::string>{"b"});
    CHECK(sets.C.empty());
    CHECK(sets.D.empty());
  }

  SECTION("identity renames become touches") {
    auto tt = elaborate(parse_term("R[u>u]"), g);
    auto rf = to_renaming_form(tt);
    CHECK(print_term(rf.atoms) == "S[u]");
  }

  SECTION("a swap through a dummy needs a nonempty second phase") {
    ChemGraph h;  // two stubs with distinct neighbours
    h.add_vertex("cc", "C");
    h.add_vertex("oo", "O");
    h.add_vertex("a", "*");
    h.add_vertex("b", "*");
    h.add_vertex("e", "*");
    h.add_vertex("f", "*");
    h.add_vertex("hh", "H");
    h.set_bond("cc", "a", BondLabel::covalent(1));
    h.set_bond("oo", "b", BondLabel::covalent(1));
    h.set_bond("cc", "e", BondLabel::covalent(1));
    h.set_bond("cc", "f", BondLabel::covalent(1));
    h.set_bond("cc", "hh", BondLabel::covalent(1));
    h.set_bond("oo", "b", BondLabel::covalent(1));
    h.add_vertex("h2", "H");
    h.set_bond("oo", "h2", BondLabel::covalent(1));
    REQUIRE(validate(h, AtomTable::defaults()).ok());
    auto tt = elaborate(parse_term("R[a>c] ; R[b>a] ; R[c>b]"), h);
    auto rf = to_renaming_form(tt);
    auto sets = renaming_sets(rf.atoms);
    CHECK(sets.C.size() == 2);  // both targets recycle names, two dummies
    CHECK(sets.D == std::set<std::string>{"a", "b"});
    CHECK(rf.target() == tt.target());
    CHECK(functor_image_sets(rf) == functor_image_sets(tt));
  }

  SECTION("a swap of interchangeable stubs collapses to touches") {
    auto tt = elaborate(parse_term("R[u>t0] ; R[p>u] ; R[t0>p]"), g);
    auto rf = to_renaming_form(tt);
    CHECK(print_term(rf.atoms) == "S[p] ; S[u]");
  }

  SECTION("random rename sequences") {
    std::mt19937_64 rng(29);
    auto names = [](const ChemGraph& gg) {
      std::vector<std::string> out;
      for (const auto& [n, l] : gg.vertices())
        if (l.element == kAlpha) out.push_back(n);
      return out;
    };
    for (int trial = 0; trial < 200; ++trial) {
      ChemGraph cur = g;
      std::vector<TermAtom> atoms;
      int len = static_cast<int>(rng() % 6);
      for (int k = 0; k < len; ++k) {
        auto as = names(cur);
        std::string from = as[rng() % as.size()];
        std::string to;
        switch (rng() % 3) {
          case 0: to = "t" + std::to_string(rng() % 4); break;
          case 1: to = from; break;
          default: {
            to = as[rng() % as.size()];
            break;
          }
        }
        if (to != from && cur.has_vertex(to)) continue;
        atoms.push_back(RenAtom{from, to});
        cur = rename(cur, from, to);
      }
      TypedTerm tt = elaborate(UntypedTerm{atoms}, g);
      auto rf = to_renaming_form(tt);
      CHECK(rf.target() == tt.target());
      CHECK(functor_image_sets(rf) == functor_image_sets(tt));
      // structure: renames then touches, first phase before second
      auto sets = renaming_sets(rf.atoms);
      for (const auto& n : sets.C) CHECK(sets.B.count(n));
      for (const auto& n : sets.D) CHECK(sets.A.count(n));
    }
  }

  SECTION("non-rename atoms are rejected") {
    CHECK_THROWS(to_renaming_form(elaborate(parse_term("S[u]"), g)));
  }
}

TEST_CASE("normal form golden cases") {
  SECTION("the worked example collapses to the published normal form") {
    auto tt = elaborate(example29(), benzylA());
    Trace tr;
    auto nf = to_normal_form(tt, &tr);
    CHECK(print_term(nf.term.atoms) ==
          "C[z,u;a,b] ; C[v,w;c,d] ; ~C[w,z;d,a] ; ~C[u,v;b,c] ; S[r]");
    CHECK(normal_form_failures(nf.term).empty());
    REQUIRE_FALSE(tr.empty());

    auto ref = to_normal_form(elaborate(nf5(), benzylA()));
    CHECK(nf_equivalent(nf, ref));
    CHECK(print_term(canonicalize_nf(nf).term.atoms) ==
          print_term(canonicalize_nf(ref).term.atoms));
  }

  SECTION("undone work cancels to touches") {
    auto nf = to_normal_form(elaborate(parse_term("C[u,v;a,b] ; ~C[u,v;a,b]"), hh()));
    CHECK(print_term(nf.term.atoms) == "S[u] ; S[v]");
  }

  SECTION("the empty term is its own normal form") {
    auto nf = to_normal_form(elaborate(UntypedTerm{}, hh()));
    CHECK(nf.term.atoms.empty());
  }

  SECTION("touches of rule vertices are absorbed; surviving stubs get renamed") {
    auto nf = to_normal_form(elaborate(parse_term("S[u] ; C[u,v;a,b] ; S[v] ; S[a]"), hh()));
    // the touches are absorbed, and the stubs that survive into the target
    // become dummies vacated onto their public names by explicit renames
    CHECK(print_term(nf.term.atoms) == "C[u,v;_g0,_g1] ; R[_g0>a] ; R[_g1>b]");
    CHECK(normal_form_failures(nf.term).empty());
    CHECK(nf.term.target() == elaborate(parse_term("C[u,v;a,b]"), hh()).target());
  }
}

TEST_CASE("normalization preserves meaning on random terms") {
  oracle::EnumOptions opt;
  opt.max_heavy = 2;
  opt.max_alpha = 2;
  auto graphs = oracle::enumerate_graphs(opt);
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  for (int i = 0; i < 150; ++i) {
    auto t = oracle::random_typable_term(graphs[pick(rng)], rng);
    auto nf = to_normal_form(t);
    CHECK(nf.term.source() == t.source());
    CHECK(nf.term.target() == t.target());
    CHECK(functor_image_sets(nf.term) == functor_image_sets(t));
    CHECK(normal_form_failures(nf.term).empty());
  }
}

TEST_CASE("canonicalization") {
  auto tt = elaborate(example29(), benzylA());
  auto nf = to_normal_form(tt);
  auto canon = canonicalize_nf(nf);

  SECTION("idempotent") {
    CHECK(print_term(canonicalize_nf(canon).term.atoms) == print_term(canon.term.atoms));
  }

  SECTION("invariant under block shuffles of the normal form") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
      // manipulation 1: shuffle within blocks
      auto atoms = nf.term.atoms;
      std::stable_sort(atoms.begin(), atoms.end(), [&](const TermAtom& a, const TermAtom& b) {
        if (block_rank(a) != block_rank(b)) return block_rank(a) < block_rank(b);
        return false;
      });
      for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        if (block_rank(atoms[i]) == block_rank(atoms[i + 1]) && rng() % 2)
          std::swap(atoms[i], atoms[i + 1]);
      }
      TypedTerm shuffled;
      if (!elaborates(UntypedTerm{atoms}, benzylA(), &shuffled)) continue;
      if (!(shuffled.target() == nf.term.target())) continue;
      auto nf2 = make_normal_form_record(shuffled);
      if (!normal_form_failures(nf2.term).empty()) continue;
      CHECK(nf_equivalent(nf, nf2));
      CHECK(print_term(canonicalize_nf(nf2).term.atoms) == print_term(canon.term.atoms));
    }
  }

  SECTION("invariant under dummy renaming") {
    // manipulation 4: rename a,b,c,d to fresh names throughout
    auto renamedText = slurp("nf5.term");
    for (auto [from, to] : std::vector<std::pair<char, char>>{
             {'a', 'e'}, {'b', 'f'}, {'c', 'g'}, {'d', 'h'}}) {
      std::string needle(1, from), repl(1, to);
      std::size_t pos = 0;
      while ((pos = renamedText.find(needle + "]", pos)) != std::string::npos)
        renamedText.replace(pos, 1, repl);
      pos = 0;
      while ((pos = renamedText.find(needle + ",", pos)) != std::string::npos)
        renamedText.replace(pos, 1, repl);
      pos = 0;
      while ((pos = renamedText.find(";" + needle, pos)) != std::string::npos)
        renamedText.replace(pos + 1, 1, repl);
    }
    auto variant = parse_term_file(renamedText).terms.at(0);
    auto nfv = to_normal_form(elaborate(variant, benzylA()));
    auto ref = to_normal_form(elaborate(nf5(), benzylA()));
    CHECK(nf_equivalent(ref, nfv));
    CHECK(print_term(canonicalize_nf(nfv).term.atoms) ==
          print_term(canonicalize_nf(ref).term.atoms));
  }

  SECTION("endpoint mismatch is an error") {
    auto a = to_normal_form(elaborate(parse_term("S[u]"), hh()));
    auto b = to_normal_form(elaborate(UntypedTerm{}, methane_stubs()));
    CHECK_THROWS(nf_equivalent(a, b));
  }
}

TEST_CASE("term equality deciders") {
  auto g = methane_stubs();

  SECTION("rename chains equal the composite rename") {
    auto d = eq_terms_detail(parse_term("R[u>z] ; R[z>w]"), parse_term("R[u>w]"), g);
    CHECK(d.semantic);
    CHECK(d.syntactic);
    CHECK(d.agree());
  }

  SECTION("a term equals itself") {
    auto t = parse_term("C[u,v;a,b] ; E[u,a]");
    auto d = eq_terms_detail(t, t, hh());
    CHECK(d.semantic);
    CHECK(d.syntactic);
  }

  SECTION("targets differ: unequal") {
    CHECK_FALSE(eq_terms(parse_term("C[u,v;a,b]"), parse_term("S[u]"), hh()));
  }

  SECTION("same endpoints, different touched sets: unequal, deciders agree") {
    auto d = eq_terms_detail(parse_term("S[u]"), parse_term("S[p]"), g);
    CHECK_FALSE(d.semantic);
    CHECK_FALSE(d.syntactic);
    CHECK(d.agree());
  }

  SECTION("equality is stable under bar") {
    auto t = parse_term("C[u,v;a,b] ; ~C[u,v;a,b]");
    auto s = parse_term("S[u] ; S[v]");
    auto d = eq_terms_detail(t, s, hh());
    CHECK(d.semantic);
    CHECK(d.syntactic);
    auto tb = bar(t);
    auto sb = bar(s);
    auto db = eq_terms_detail(tb, sb, hh());  // the shared target equals the source here
    CHECK(db.semantic == d.semantic);
    CHECK(db.syntactic == d.syntactic);
  }
}

TEST_CASE("trace reporting") {
  Trace tr;
  auto tt = elaborate(parse_term("C[u,v;a,b] ; ~C[u,v;a,b]"), hh());
  to_normal_form(tt, &tr);
  REQUIRE_FALSE(tr.empty());
  bool sawCancel = false;
  for (const auto& e : tr) sawCancel = sawCancel || e.rule == "ddbar4";
  CHECK(sawCancel);
  CHECK_FALSE(trace_to_string(tr).empty());
}
