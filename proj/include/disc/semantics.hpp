#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "disc/reaction.hpp"
#include "disc/term.hpp"

namespace disc {

/// The image of a term under the interpretation into reactions. Terms always
/// map to reactions whose bijection and isomorphism parts are identities, so
/// two vertex-name sets determine the morphism.
struct FunctorImage {
  std::set<std::string> r1, r2;
  friend bool operator==(const FunctorImage&, const FunctorImage&) = default;
};

inline FunctorImage atom_image(const TermAtom& a) {
  if (is_id(a)) return {};
  if (auto* t = std::get_if<TouchAtom>(&a)) return {{t->u}, {t->u}};
  if (auto* r = std::get_if<RenAtom>(&a)) return {{r->from}, {r->to}};
  const auto& rule = std::get<RuleApp>(a);
  std::set<std::string> sup, all;
  for (const auto& n : rule.superscripts()) sup.insert(n);
  all = sup;
  for (const auto& n : rule.subscripts()) all.insert(n);
  if (rule.is_connect()) return {all, sup};
  return {sup, all};
}

/// Sequential composition of images; mirrors composition of the corresponding
/// identity-part reactions, where both i maps are identities on names.
inline FunctorImage compose_images(const FunctorImage& t, const FunctorImage& s) {
  FunctorImage out;
  out.r1 = t.r1;
  for (const auto& n : s.r1)
    if (!t.r2.count(n)) out.r1.insert(n);
  out.r2 = s.r2;
  for (const auto& n : t.r2)
    if (!s.r1.count(n)) out.r2.insert(n);
  return out;
}

inline FunctorImage functor_image_sets(const std::vector<TermAtom>& atoms) {
  FunctorImage acc;
  for (const auto& a : atoms) acc = compose_images(acc, atom_image(a));
  return acc;
}

inline FunctorImage functor_image_sets(const TypedTerm& t) { return functor_image_sets(t.atoms); }

/// The interpretation of a typed term as a reaction between its endpoints.
inline Reaction functor_image(const TypedTerm& t) {
  FunctorImage img = functor_image_sets(t);
  std::map<std::string, std::string> b, i;
  for (const auto& n : img.r1)
    if (t.source().is_chem(n)) b[n] = n;
  for (const auto& [n, lbl] : t.source().vertices())
    if (!img.r1.count(n)) i[n] = n;
  Reaction r = Reaction::unchecked(t.source(), t.target(), img.r1, img.r2, std::move(b),
                                   std::move(i));
  auto rep = validate_reaction(r);
  if (!rep.ok)
    throw std::logic_error("functor image is not a valid reaction: " + rep.clause + ": " +
                           rep.message);
  return r;
}

/// Interpretation commutes with the involutions: image of the reversed term
/// equals the dagger of the image.
inline bool dagger_compat_check(const TypedTerm& t) {
  return eq_reaction(functor_image(bar(t)), dagger(functor_image(t)));
}

// -- decomposition of a reaction into a term (universality) -------------------

struct Decomposition {
  TypedTerm term;                         // from source(r) to a graph B
  std::map<std::string, std::string> iota;  // isomorphism B -> target(r)
};

namespace detail {

class FreshNames {
 public:
  explicit FreshNames(std::set<std::string> taken) : taken_(std::move(taken)) {}
  std::string next() {
    for (;;) {
      std::string cand = "_g" + std::to_string(counter_++);
      if (taken_.insert(cand).second) return cand;
    }
  }

 private:
  std::set<std::string> taken_;
  unsigned long counter_ = 0;
};

inline std::set<std::string> alpha_neighbours_in(const ChemGraph& g, const std::string& u,
                                                 const std::set<std::string>& pool) {
  std::set<std::string> out;
  for (const auto& n : g.cov_neighbours(u))
    if (g.is_alpha(n) && pool.count(n)) out.insert(n);
  return out;
}

}  // namespace detail

/// Decomposes a valid reaction r: A -> C into a term t: A -> B plus an
/// isomorphism iota: B -> C with image(t);iota = r. The term first breaks
/// every bond and detaches every electron inside U_A, then rebuilds the U_B
/// configuration, then renames the surviving "*"-vertices and touches U_B.
/// Every choice is lexicographic, so output is deterministic.
inline Decomposition decompose(const Reaction& r) {
  auto rep = validate_reaction(r);
  if (!rep.ok)
    throw std::invalid_argument("decompose: invalid reaction: " + rep.clause + ": " + rep.message);

  const ChemGraph& A = r.source();
  const ChemGraph& C = r.target();

  std::set<std::string> taken;
  for (const auto& [n, lbl] : A.vertices()) taken.insert(n);
  for (const auto& [n, lbl] : C.vertices()) taken.insert(n);
  detail::FreshNames fresh(taken);

  std::vector<TermAtom> atoms;
  ChemGraph g = A;  // running graph
  auto emit = [&](TermAtom a) {
    g = step_atom(a, g);
    atoms.push_back(std::move(a));
  };

  // Names allowed to take part: U_A plus machine-introduced stubs.
  std::set<std::string> pool = r.uA();

  std::set<std::string> chemA;
  for (const auto& n : r.uA())
    if (A.is_chem(n)) chemA.insert(n);

  // Ionic bonds between oppositely charged pairs inside U_A.
  for (const auto& u : chemA)
    for (const auto& v : chemA)
      if (A.charge(u) > 0 && A.charge(v) < 0 && A.bond(u, v).is_ionic())
        emit(RuleApp::ion(u, v));

  // Covalent bonds between chemical pairs inside U_A, once per multiplicity.
  for (const auto& u : chemA)
    for (const auto& v : chemA) {
      if (u >= v) continue;
      int k = A.bond(u, v).cov();
      for (int n = 0; n < k; ++n) {
        std::string a = fresh.next(), b = fresh.next();
        pool.insert(a);
        pool.insert(b);
        emit(RuleApp::cov(u, v, a, b));
      }
    }

  // A vertex with an ionic bond into the untouched complement keeps that bond
  // and hence its charge through the whole reaction; no electron step may (or
  // need) touch it.
  auto pinned = [&](const std::string& u) { return !g.ion_neighbours(u).empty(); };

  // Electron detachments from negative vertices.
  for (const auto& u : chemA) {
    if (pinned(u)) continue;
    for (int n = 0; n < -A.charge(u); ++n) {
      std::string a = fresh.next(), b = fresh.next();
      pool.insert(a);
      pool.insert(b);
      emit(RuleApp::eneg(u, a, b));
    }
  }

  // Detach every remaining "*"-neighbour inside the pool.
  for (const auto& u : chemA) {
    if (pinned(u)) continue;
    for (;;) {
      auto stubs = detail::alpha_neighbours_in(g, u, pool);
      if (stubs.empty()) break;
      emit(RuleApp::enonneg(u, *stubs.begin()));
    }
  }

  // Target-side data pulled back along b onto source names.
  auto target_of = [&](const std::string& x) { return r.b().at(x); };

  auto isolated_stubs = [&]() {
    std::set<std::string> out;
    for (const auto& n : pool)
      if (g.has_vertex(n) && g.is_alpha(n) && g.neighbours(n).empty()) out.insert(n);
    return out;
  };

  // Reattach: everything the later phases consume plus the "*"-bonds b(u)
  // keeps inside U_B. A pinned vertex skipped the electron dance, so only its
  // target stub count matters there.
  for (const auto& u : chemA) {
    const std::string bu = target_of(u);
    // the valence is recoverable from the (valid) source graph
    const int val = std::abs(A.charge(u)) + A.cov_degree(u);
    int have = static_cast<int>(detail::alpha_neighbours_in(g, u, pool).size());
    int ext = g.cov_degree(u) - have;
    int want = pinned(u) ? val - std::abs(C.charge(bu)) - ext
                         : val - std::max(C.charge(bu), 0) - ext;
    for (int n = have; n < want; ++n) {
      auto iso = isolated_stubs();
      if (iso.empty()) throw std::logic_error("decompose: ran out of detached stubs");
      emit(RuleApp::enonneg(u, *iso.begin(), Direction::Connect));
    }
  }

  // Electron attachments onto target-negative vertices.
  for (const auto& u : chemA) {
    if (pinned(u)) continue;
    const std::string bu = target_of(u);
    for (int n = 0; n < -C.charge(bu); ++n) {
      auto stubs = detail::alpha_neighbours_in(g, u, pool);
      auto iso = isolated_stubs();
      emit(RuleApp::eneg(u, *stubs.begin(), *iso.begin(), Direction::Connect));
    }
  }

  // Rebuild covalent bonds of U_B.
  for (const auto& u : chemA)
    for (const auto& v : chemA) {
      if (u >= v) continue;
      int k = C.bond(target_of(u), target_of(v)).cov();
      for (int n = 0; n < k; ++n) {
        auto su = detail::alpha_neighbours_in(g, u, pool);
        auto sv = detail::alpha_neighbours_in(g, v, pool);
        emit(RuleApp::cov(u, v, *su.begin(), *sv.begin(), Direction::Connect));
      }
    }

  // Rebuild ionic bonds of U_B.
  for (const auto& u : chemA)
    for (const auto& v : chemA) {
      const std::string bu = target_of(u), bv = target_of(v);
      if (C.charge(bu) > 0 && C.charge(bv) < 0 && C.bond(bu, bv).is_ionic())
        emit(RuleApp::ion(u, v, Direction::Connect));
    }

  // Match the surviving "*"-vertices with the "*"-vertices of U_B: bonded ones
  // per chemical vertex, isolated ones as one batch, both in name order.
  std::map<std::string, std::string> alphaTo;  // current name -> U_B name in C
  {
    std::set<std::string> survivors;
    for (const auto& n : pool)
      if (g.has_vertex(n) && g.is_alpha(n)) survivors.insert(n);

    for (const auto& u : chemA) {
      auto have = detail::alpha_neighbours_in(g, u, pool);
      auto want = detail::alpha_neighbours_in(C, target_of(u), r.uB());
      auto hit = have.begin();
      for (auto wit = want.begin(); wit != want.end(); ++wit, ++hit) alphaTo[*hit] = *wit;
    }
    // "*"-vertices of U_A bonded across the boundary stay attached throughout;
    // pair them per complement vertex.
    for (const auto& [w, iw] : r.i()) {
      auto have = detail::alpha_neighbours_in(g, w, pool);
      auto want = detail::alpha_neighbours_in(C, iw, r.uB());
      auto hit = have.begin();
      for (auto wit = want.begin(); wit != want.end(); ++wit, ++hit) alphaTo[*hit] = *wit;
    }
    std::set<std::string> haveIso, wantIso;
    for (const auto& n : survivors)
      if (g.neighbours(n).empty()) haveIso.insert(n);
    for (const auto& n : r.uB())
      if (C.is_alpha(n) && C.neighbours(n).empty()) wantIso.insert(n);
    auto hit = haveIso.begin();
    for (auto wit = wantIso.begin(); wit != wantIso.end(); ++wit, ++hit) alphaTo[*hit] = *wit;
  }

  // Vacate the names of the original U_A "*"-vertices, then rename each
  // survivor to its U_B name when that name is free; otherwise keep the
  // machine name and let iota record the correspondence.
  std::map<std::string, std::string> current;  // original alphaTo key -> current name
  for (const auto& [from, to] : alphaTo) current[from] = from;
  for (const auto& [from, to] : alphaTo) {
    if (A.has_vertex(from)) {
      std::string tmp = fresh.next();
      emit(RenAtom{from, tmp});
      current[from] = tmp;
    }
  }
  std::map<std::string, std::string> iotaAlpha;  // final name -> U_B name
  for (const auto& [from, to] : alphaTo) {
    const std::string& cur = current.at(from);
    if (cur != to && !g.has_vertex(to)) {
      emit(RenAtom{cur, to});
      iotaAlpha[to] = to;
    } else {
      iotaAlpha[cur] = to;
    }
  }

  // Touch everything that corresponds to U_B.
  {
    std::set<std::string> touch;
    for (const auto& u : chemA) touch.insert(u);
    for (const auto& [fin, to] : iotaAlpha) touch.insert(fin);
    for (const auto& n : touch) emit(TouchAtom{n});
  }

  // iota: chemical changed part via b, complement via i, "*"-part as recorded.
  std::map<std::string, std::string> iota = iotaAlpha;
  for (const auto& u : chemA) iota[u] = r.b().at(u);
  for (const auto& [x, y] : r.i()) iota[x] = y;

  Decomposition out;
  out.term = elaborate(UntypedTerm{std::move(atoms)}, A);
  out.iota = std::move(iota);

  if (!check_iso(out.term.target(), C, out.iota))
    throw std::logic_error("decompose: iota is not an isomorphism onto the target");
  return out;
}

/// Lifts an isomorphism f: B -> C to the reaction (empty, empty, !, f).
inline Reaction iso_as_reaction(const ChemGraph& B, const ChemGraph& C,
                                const std::map<std::string, std::string>& f) {
  return Reaction::unchecked(B, C, {}, {}, {}, f);
}

/// decompose then recompose gives back exactly the input reaction.
inline bool roundtrip_check(const Reaction& r) {
  Decomposition d = decompose(r);
  Reaction img = functor_image(d.term);
  Reaction recomposed = compose(img, iso_as_reaction(d.term.target(), r.target(), d.iota));
  return eq_reaction(recomposed, r);
}

}  // namespace disc
