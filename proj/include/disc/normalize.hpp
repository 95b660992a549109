#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "disc/rewrite.hpp"

namespace disc {

// -- renaming form -------------------------------------------------------------

struct RenamingSets {
  std::set<std::string> A, B, C, D;
};

/// Splits a rename sequence into first-phase entries (sources native to the
/// running graph) and second-phase entries (sources created by earlier
/// renames), and collects the four name sets of the renaming form.
inline RenamingSets renaming_sets(const std::vector<TermAtom>& atoms) {
  RenamingSets s;
  std::set<std::string> created;
  for (const auto& a : atoms) {
    auto* r = std::get_if<RenAtom>(&a);
    if (!r) continue;
    if (created.count(r->from)) {
      s.C.insert(r->from);
      s.D.insert(r->to);
    } else {
      s.A.insert(r->from);
      s.B.insert(r->to);
    }
    created.insert(r->to);
  }
  return s;
}

namespace engine {

/// Canonical renaming form for a given endpoint pair and interpretation: the
/// moved names X pair with the target names Y within each neighbour class
/// (names sharing a class are interchangeable), common names become touches,
/// and recycled target names route through a dummy. The result satisfies the
/// renaming-form conditions by construction.
inline std::vector<TermAtom> build_renaming_form(const ChemGraph& H, const ChemGraph& G,
                                                 const FunctorImage& img,
                                                 disc::detail::FreshNames& fresh) {
  const std::set<std::string>& X = img.r1;
  const std::set<std::string>& Y = img.r2;
  std::map<std::set<std::string>, std::pair<std::vector<std::string>, std::vector<std::string>>>
      groups;
  for (const auto& x : X) groups[H.neighbours(x)].first.push_back(x);
  for (const auto& y : Y) groups[G.neighbours(y)].second.push_back(y);

  std::map<std::string, std::string> sigma;
  std::set<std::string> touches;
  for (auto& [nbr, xy] : groups) {
    std::set<std::string> xset(xy.first.begin(), xy.first.end());
    std::set<std::string> yset(xy.second.begin(), xy.second.end());
    std::vector<std::string> xs, ys;
    for (const auto& x : xy.first) {
      if (yset.count(x))
        touches.insert(x);
      else
        xs.push_back(x);
    }
    for (const auto& y : xy.second)
      if (!xset.count(y)) ys.push_back(y);
    if (xs.size() != ys.size())
      throw engine_error("renaming form: unbalanced neighbour class", "");
    for (std::size_t k = 0; k < xs.size(); ++k) sigma[xs[k]] = ys[k];
  }

  std::vector<TermAtom> first, second;
  for (const auto& [x, y] : sigma) {
    if (X.count(y)) {
      std::string c = fresh.next();
      first.push_back(RenAtom{x, c});
      second.push_back(RenAtom{c, y});
    } else {
      first.push_back(RenAtom{x, y});
    }
  }
  std::vector<TermAtom> out = std::move(first);
  out.insert(out.end(), second.begin(), second.end());
  for (const auto& t : touches) out.push_back(TouchAtom{t});
  return out;
}

}  // namespace engine

/// Rewrites a sequence of renames into renaming form followed by touches.
inline TypedTerm to_renaming_form(const TypedTerm& t, Trace* trace = nullptr) {
  for (const auto& a : t.atoms)
    if (!is_ren(a)) throw std::invalid_argument("to_renaming_form: expects rename atoms only");
  auto fresh = engine::fresh_for(t.atoms, t.graphs);
  auto atoms = engine::build_renaming_form(t.source(), t.target(), functor_image_sets(t), fresh);
  TypedTerm out = elaborate(UntypedTerm{atoms}, t.source());
  if (!(out.target() == t.target()) || !(functor_image_sets(out) == functor_image_sets(t)))
    throw engine_error("renaming form changed the term's meaning", "");
  if (trace) trace->push_back({"renaming-form", 0});
  return out;
}

// -- normal form ----------------------------------------------------------------

struct NormalForm {
  TypedTerm term;
  std::set<std::string> set_a, set_b, set_c, set_d;  // renaming-form name sets
  std::set<std::string> d_add, d_remove, u_set, s_set;
};

namespace detail {

inline void scan_sets(const std::vector<TermAtom>& atoms, NormalForm& nf) {
  std::vector<TermAtom> rens;
  for (const auto& a : atoms) {
    if (auto* t = std::get_if<TouchAtom>(&a)) nf.s_set.insert(t->u);
    if (is_ren(a)) rens.push_back(a);
    if (auto* d = std::get_if<RuleApp>(&a)) {
      for (const auto& n : d->superscripts()) nf.u_set.insert(n);
      for (const auto& n : d->subscripts())
        (d->is_connect() ? nf.d_remove : nf.d_add).insert(n);
    }
  }
  auto rs = renaming_sets(rens);
  nf.set_a = std::move(rs.A);
  nf.set_b = std::move(rs.B);
  nf.set_c = std::move(rs.C);
  nf.set_d = std::move(rs.D);
}

}  // namespace detail

inline NormalForm make_normal_form_record(TypedTerm t) {
  NormalForm nf;
  detail::scan_sets(t.atoms, nf);
  nf.term = std::move(t);
  return nf;
}

/// Literal checks of the normal-form conditions; returns a description of
/// every failure (empty means the term is in normal form).
inline std::vector<std::string> normal_form_failures(const TypedTerm& t) {
  std::vector<std::string> fails;
  if (!is_ice_form(t)) fails.push_back("not in ICE block order");

  NormalForm nf = make_normal_form_record(t);
  const auto& atoms = t.atoms;

  // Renaming-form structure of the rename region.
  {
    std::vector<std::size_t> renPos;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (is_ren(atoms[i])) renPos.push_back(i);
    std::set<std::string> sources, targets;
    bool inSecond = false;
    std::set<std::string> created;
    for (auto i : renPos) {
      const auto& r = std::get<RenAtom>(atoms[i]);
      if (!sources.insert(r.from).second) fails.push_back("rename source repeated: " + r.from);
      if (!targets.insert(r.to).second) fails.push_back("rename target repeated: " + r.to);
      bool secondPhase = created.count(r.from) != 0;
      if (inSecond && !secondPhase) fails.push_back("first-phase rename after second phase");
      inSecond = secondPhase;
      created.insert(r.to);
    }
    for (const auto& n : nf.set_a)
      if (nf.set_b.count(n)) fails.push_back("rename sets A and B overlap at " + n);
    for (const auto& n : nf.set_c)
      if (!nf.set_b.count(n)) fails.push_back("dummy " + n + " not introduced by the first phase");
    for (const auto& n : nf.set_d)
      if (!nf.set_a.count(n)) fails.push_back("recycled name " + n + " was never vacated");
    // Same-neighbour chains would collapse; require distinct neighbourhoods.
    if (!renPos.empty()) {
      const ChemGraph& H = t.graphs[renPos.front()];
      std::map<std::string, std::string> creator;  // dummy -> first-phase source
      std::set<std::string> created2;
      for (auto i : renPos) {
        const auto& r = std::get<RenAtom>(atoms[i]);
        if (!created2.count(r.from))
          creator[r.to] = r.from;
        else if (creator.count(r.from) && H.has_vertex(r.to) && H.has_vertex(creator[r.from])) {
          if (H.neighbours(creator[r.from]) == H.neighbours(r.to))
            fails.push_back("dummy chain over equal neighbourhoods at " + r.from);
        }
        created2.insert(r.to);
      }
    }
  }

  // (1) every touch occurs once
  {
    std::map<std::string, int> count;
    for (const auto& a : atoms)
      if (auto* s = std::get_if<TouchAtom>(&a)) ++count[s->u];
    for (const auto& [n, c] : count)
      if (c > 1) fails.push_back("touch " + n + " occurs " + std::to_string(c) + " times");
  }
  // (2) touches are disjoint from rule and rename names
  for (const auto& n : nf.s_set)
    if (nf.u_set.count(n) || nf.set_a.count(n) || nf.set_b.count(n))
      fails.push_back("touched name " + n + " also occurs in rules or renames");
  // (3) surviving introduced stubs must be vacated by a first-phase rename
  for (const auto& n : nf.d_add)
    if (!nf.d_remove.count(n) && !(nf.set_a.count(n) && !nf.set_d.count(n)))
      fails.push_back("introduced stub " + n + " neither removed nor renamed away");
  // (4) introduced stubs never collide with rename targets
  for (const auto& n : nf.d_add)
    if (nf.set_b.count(n)) fails.push_back("introduced stub " + n + " is also a rename target");
  // (5) a connection may not defer its removal to a renamed twin
  for (std::size_t p = 0; p < atoms.size(); ++p) {
    auto* c = std::get_if<RuleApp>(&atoms[p]);
    if (!c || !c->is_connect() || c->subscripts().empty()) continue;
    for (const auto& a : atoms) {
      auto* r = std::get_if<RenAtom>(&a);
      if (!r) continue;
      for (int slot = 0; slot < 2; ++slot) {
        const std::string& sub = slot == 0 ? c->a() : c->b();
        if (r->to != sub || r->from == sub) continue;
        RuleApp cand = c->with_subscripts(slot == 0 ? r->from : c->a(),
                                          slot == 1 ? r->from : c->b());
        if (domain_check(cand, t.graphs[p]).in_domain)
          fails.push_back("connection " + to_string(*c) + " could consume " + r->from +
                          " renamed to " + sub);
      }
    }
  }
  // (6) no disconnection is undone by a connection of the same shape
  // (7) no electron detachment is undone at the same vertex
  // (8) an ion pair both broken and reformed needs an electron step at v
  for (std::size_t p = 0; p < atoms.size(); ++p) {
    auto* d = std::get_if<RuleApp>(&atoms[p]);
    if (!d || d->is_connect()) continue;
    for (std::size_t q = 0; q < atoms.size(); ++q) {
      auto* c = std::get_if<RuleApp>(&atoms[q]);
      if (!c || !c->is_connect() || c->kind() != d->kind()) continue;
      switch (d->kind()) {
        case RuleKind::ENeg:
          if (c->u() == d->u()) fails.push_back("detachment at " + d->u() + " undone");
          break;
        case RuleKind::Cov:
          if ((c->u() == d->u() && c->v() == d->v()) || (c->u() == d->v() && c->v() == d->u()))
            fails.push_back("covalent break " + d->u() + "-" + d->v() + " undone");
          break;
        case RuleKind::ENonneg:
          if (c->u() == d->u()) fails.push_back("electron detachment at " + d->u() + " undone");
          break;
        case RuleKind::Ion:
          if (c->u() == d->u() && c->v() == d->v()) {
            bool hasE = false;
            for (const auto& a : atoms)
              if (auto* e = std::get_if<RuleApp>(&a))
                if ((e->kind() == RuleKind::ENeg || e->kind() == RuleKind::ENonneg) &&
                    e->u() == d->v())
                  hasE = true;
            if (!hasE)
              fails.push_back("ion pair " + d->u() + "-" + d->v() +
                              " broken and reformed with no electron step");
          }
          break;
      }
    }
  }
  return fails;
}

inline bool is_normal_form(const TypedTerm& t) { return normal_form_failures(t).empty(); }

// -- normalization master loop -------------------------------------------------

namespace engine {

// Prints a rename-plus-touch list with chain dummies numbered positionally,
// so rebuilt regions compare equal regardless of which fresh names were drawn.
inline std::string region_shape(const std::vector<TermAtom>& atoms) {
  auto rs = renaming_sets(atoms);
  std::map<std::string, std::string> num;
  auto name = [&](const std::string& n) -> std::string {
    if (!rs.C.count(n)) return n;
    auto it = num.find(n);
    if (it == num.end()) it = num.emplace(n, "$" + std::to_string(num.size())).first;
    return it->second;
  };
  std::ostringstream out;
  for (const auto& a : atoms) {
    if (auto* r = std::get_if<RenAtom>(&a))
      out << "R[" << name(r->from) << ">" << name(r->to) << "];";
    else if (auto* t = std::get_if<TouchAtom>(&a))
      out << "S[" << t->u << "];";
  }
  return out.str();
}

// Replace the rename region with its canonical renaming form.
inline bool rebuild_rename_region(Work& w) {
  std::size_t lo = w.size(), hi = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (is_ren(w.atom(i))) {
      lo = std::min(lo, i);
      hi = std::max(hi, i + 1);
    }
  if (lo >= hi) return false;
  std::vector<TermAtom> region(w.atoms().begin() + lo, w.atoms().begin() + hi);
  for (const auto& a : region)
    if (!is_ren(a)) throw engine_error("rename region not contiguous", w.trace_dump());
  FunctorImage img;
  for (const auto& a : region) img = compose_images(img, atom_image(a));
  auto fresh = fresh_for(w);
  auto repl = build_renaming_form(w.graph(lo), w.graph(hi), img, fresh);
  if (region_shape(repl) == region_shape(region)) return false;
  w.splice(lo, hi - lo, repl, "renaming-form");
  return true;
}

// Conditions (1) and (2): drop duplicated touches and touches of names that
// already take part in a rule or rename; each drop cites its absorbing atom.
inline bool absorb_touches(Work& w) {
  for (std::size_t p = 0; p < w.size(); ++p) {
    auto* s = std::get_if<TouchAtom>(&w.atom(p));
    if (!s) continue;
    const std::string u = s->u;
    for (std::size_t qq = p; qq-- > 0;) {
      const TermAtom& a = w.atom(qq);
      if (auto* s2 = std::get_if<TouchAtom>(&a); s2 && s2->u == u) {
        w.splice(p, 1, {}, "sidem");
        return true;
      }
      if (auto* r = std::get_if<RenAtom>(&a); r && r->to == u) {
        w.splice(p, 1, {}, "sr2");
        return true;
      }
      if (auto* d = std::get_if<RuleApp>(&a)) {
        auto sup = d->superscripts();
        if (std::find(sup.begin(), sup.end(), u) != sup.end()) {
          w.splice(p, 1, {}, d->is_connect() ? "sd2-bar" : "sd2");
          return true;
        }
        auto sub = d->subscripts();
        if (!d->is_connect() && std::find(sub.begin(), sub.end(), u) != sub.end()) {
          w.splice(p, 1, {}, "sabsorb");
          return true;
        }
      }
    }
  }
  return false;
}

struct StubLife {
  std::string name;
  std::size_t producer;  // disconnection position
  int slot;              // 0 = first subscript, 1 = second
  std::optional<std::size_t> consumer;  // connection or rename position
  bool consumed_by_rename = false;
  int consumer_slot = 0;
};

inline std::vector<StubLife> stub_lifecycles(const Work& w) {
  std::vector<StubLife> out;
  for (std::size_t p = 0; p < w.size(); ++p) {
    auto* d = std::get_if<RuleApp>(&w.atom(p));
    if (!d || d->is_connect() || d->subscripts().empty()) continue;
    for (int slot = 0; slot < 2; ++slot) {
      StubLife life;
      life.name = slot == 0 ? d->a() : d->b();
      life.producer = p;
      life.slot = slot;
      for (std::size_t q = p + 1; q < w.size() && !life.consumer; ++q) {
        const TermAtom& a = w.atom(q);
        if (auto* r = std::get_if<RenAtom>(&a); r && r->from == life.name) {
          life.consumer = q;
          life.consumed_by_rename = true;
        }
        if (auto* c = std::get_if<RuleApp>(&a); c && c->is_connect()) {
          if (c->a() == life.name) {
            life.consumer = q;
            life.consumer_slot = 0;
          } else if (c->b() == life.name) {
            life.consumer = q;
            life.consumer_slot = 1;
          }
        }
      }
      out.push_back(std::move(life));
    }
  }
  return out;
}

// Conditions (3) and (4): every introduced stub is a dummy. Stubs reusing a
// name, or clashing with a rename target, move to a fresh name along their
// whole lifecycle; stubs surviving into the target gain an explicit rename.
inline bool fix_dummies(Work& w, disc::detail::FreshNames& fresh) {
  auto lives = stub_lifecycles(w);
  std::map<std::string, int> uses;
  std::set<std::string> renTargets;
  for (const auto& a : w.atoms())
    if (auto* r = std::get_if<RenAtom>(&a)) renTargets.insert(r->to);
  for (const auto& l : lives) ++uses[l.name];

  for (const auto& l : lives) {
    const bool survivor = !l.consumer.has_value();
    const bool reused = uses[l.name] > 1;
    const bool clashes = renTargets.count(l.name) != 0;
    if (survivor) {
      // keep the target name via an explicit rename off a fresh stub name
      std::string z = fresh.next();
      auto* d = std::get_if<RuleApp>(&w.atom(l.producer));
      RuleApp d2 = d->with_subscripts(l.slot == 0 ? z : d->a(), l.slot == 1 ? z : d->b());
      w.splice(l.producer, 1, {d2, RenAtom{z, l.name}}, "rd3");
      return true;
    }
    if (reused || clashes) {
      std::string z = fresh.next();
      std::vector<TermAtom> atoms = w.atoms();
      {
        auto* d = std::get_if<RuleApp>(&atoms[l.producer]);
        *d = d->with_subscripts(l.slot == 0 ? z : d->a(), l.slot == 1 ? z : d->b());
      }
      if (l.consumed_by_rename) {
        auto* r = std::get_if<RenAtom>(&atoms[*l.consumer]);
        r->from = z;
      } else {
        auto* c = std::get_if<RuleApp>(&atoms[*l.consumer]);
        *c = c->with_subscripts(l.consumer_slot == 0 ? z : c->a(),
                                l.consumer_slot == 1 ? z : c->b());
      }
      w.splice(0, w.size(), atoms, "stub-fresh");
      return true;
    }
  }
  return false;
}

// Condition (5): retarget the connection onto the renamed twin, degrading the
// rename to a touch.
inline bool fix_conn_renames(Work& w, disc::detail::FreshNames& fresh, Budget& bud) {
  for (std::size_t p = 0; p < w.size(); ++p) {
    auto* c0 = std::get_if<RuleApp>(&w.atom(p));
    if (!c0 || !c0->is_connect() || c0->subscripts().empty()) continue;
    const RuleApp c = *c0;
    for (std::size_t q = 0; q < w.size(); ++q) {
      auto* r0 = std::get_if<RenAtom>(&w.atom(q));
      if (!r0) continue;
      const RenAtom r = *r0;
      for (int slot = 0; slot < 2; ++slot) {
        const std::string& sub = slot == 0 ? c.a() : c.b();
        if (r.to != sub || r.from == sub) continue;
        RuleApp cand =
            c.with_subscripts(slot == 0 ? r.from : c.a(), slot == 1 ? r.from : c.b());
        if (!domain_check(cand, w.graph(p)).in_domain) continue;
        // direct rewrite: substitute, drop the rename, touch the kept name
        std::vector<TermAtom> atoms = w.atoms();
        atoms[p] = cand;
        atoms.erase(atoms.begin() + q);
        atoms.push_back(TouchAtom{sub});
        if (w.try_splice(0, w.size(), atoms, "ids23")) return true;
        // fall back to dragging the rename next to the connection
        if (q < p) continue;
        TypedTerm snap = w.snapshot();
        Trace* tr = w.trace();
        std::size_t tlen = tr ? tr->size() : 0;
        std::size_t pp = p, qq = q;
        bool ok = true;
        while (ok && qq > pp + 1) {
          bud.spend("cond5-drag");
          auto res = try_exchange(w, qq - 1, fresh);
          if (!res.ok || res.second_pos == engine::npos) {
            ok = false;
            break;
          }
          qq = res.second_pos;
        }
        if (ok && qq == pp + 1) {
          auto res = try_exchange(w, pp, fresh);
          if (res.ok) return true;
        }
        w = Work(std::move(snap), tr);
        if (tr) tr->resize(tlen);
      }
    }
  }
  return false;
}

// The electron rules leave one genuine choice open: detaching (or attaching)
// a freshly introduced stub and renaming a structurally equal persistent "*"
// into its role describes the same reaction as acting on the persistent one
// directly. The two shapes are provably equal but no subscript exchange
// relates them, so normalization prefers the persistent slot: follow the
// stub's rename chain; when it ends on a name that, at the electron atom,
// denotes an equally placed "*", swap the slot and rebuild the rename tail.
inline bool ez_slot_exchange(Work& w) {
  // collect introduced stub names and the rename region boundary
  std::set<std::string> introduced;
  std::size_t renStart = w.size();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (auto* d = std::get_if<RuleApp>(&w.atom(i)); d && !d->is_connect())
      for (const auto& n : d->subscripts()) introduced.insert(n);
    if (is_ren(w.atom(i)) && renStart == w.size()) renStart = i;
  }
  if (renStart == w.size()) return false;  // no renames, nothing to exchange

  auto chain_end = [&](std::string n) {
    for (std::size_t i = renStart; i < w.size(); ++i)
      if (auto* r = std::get_if<RenAtom>(&w.atom(i)); r && r->from == n) n = r->to;
    return n;
  };

  for (std::size_t p = 0; p < renStart; ++p) {
    auto* e = std::get_if<RuleApp>(&w.atom(p));
    if (!e || e->kind() != RuleKind::ENonneg) continue;
    const std::string d = e->v();
    if (!introduced.count(d)) continue;
    // the stub may not be consumed by a later connection
    bool consumed = false;
    for (std::size_t q = p + 1; q < renStart; ++q)
      if (auto* c = std::get_if<RuleApp>(&w.atom(q)); c && c->is_connect())
        for (const auto& s : c->subscripts()) consumed = consumed || s == d;
    if (consumed) continue;
    const std::string delta = chain_end(d);
    if (delta == d) continue;
    const ChemGraph& at = w.graph(p);
    if (!at.has_vertex(delta) || !at.is_alpha(delta)) continue;
    if (!e->is_connect()) {
      // detachment: the replacement must be bonded to u exactly as the stub is
      if (at.bond(e->u(), delta) != BondLabel::covalent(1)) continue;
    } else {
      // attachment: the replacement must be an isolated stub like d
      if (at.charge(delta) != -1 || !at.neighbours(delta).empty()) continue;
    }

    // swap the slot and rebuild the rename tail from the image equation
    const FunctorImage total = functor_image_sets(w.atoms());
    std::vector<TermAtom> rules(w.atoms().begin(), w.atoms().begin() + renStart);
    rules[p] = e->with_superscripts(e->u(), delta);
    TypedTerm prefix;
    if (!elaborates(UntypedTerm{rules}, w.source(), &prefix)) continue;
    const ChemGraph& H = prefix.target();
    const ChemGraph& G = w.target();
    FunctorImage ri = functor_image_sets(rules);
    FunctorImage region;
    for (const auto& [n, l] : H.vertices())
      if (!G.has_vertex(n)) region.r1.insert(n);
    for (const auto& [n, l] : G.vertices())
      if (!H.has_vertex(n)) region.r2.insert(n);
    for (const auto& n : total.r1)
      if (!ri.r1.count(n)) region.r1.insert(n);
    for (const auto& n : total.r2)
      if (!ri.r2.count(n)) region.r2.insert(n);
    if (!(compose_images(ri, region) == total)) continue;

    auto fresh = fresh_for(w);
    std::vector<TermAtom> repl;
    try {
      repl = build_renaming_form(H, G, region, fresh);
    } catch (const std::exception&) {
      continue;
    }
    std::vector<TermAtom> full = std::move(rules);
    full.insert(full.end(), repl.begin(), repl.end());
    TypedTerm check;
    if (!elaborates(UntypedTerm{full}, w.source(), &check)) continue;
    if (!(check.target() == G) || !(functor_image_sets(check) == total)) continue;
    w.splice(0, w.size(), full, "ez-exchange");
    return true;
  }
  return false;
}

struct BadPair {
  std::size_t disc, conn;
};

inline std::optional<BadPair> find_bad_pair(const Work& w) {
  // Electron pairs go first: eliminating them clears the way for the
  // detachment and covalent cases, whose evictions assume no electron pair
  // at the same vertex remains.
  const RuleKind order[] = {RuleKind::ENonneg, RuleKind::ENeg, RuleKind::Cov, RuleKind::Ion};
  for (RuleKind kind : order)
  for (std::size_t p = 0; p < w.size(); ++p) {
    auto* d = std::get_if<RuleApp>(&w.atom(p));
    if (!d || d->is_connect() || d->kind() != kind) continue;
    for (std::size_t q = p + 1; q < w.size(); ++q) {
      auto* c = std::get_if<RuleApp>(&w.atom(q));
      if (!c || !c->is_connect() || c->kind() != d->kind()) continue;
      bool match = false;
      switch (d->kind()) {
        case RuleKind::ENeg:
        case RuleKind::ENonneg:
          match = c->u() == d->u();
          break;
        case RuleKind::Cov:
          match = (c->u() == d->u() && c->v() == d->v()) ||
                  (c->u() == d->v() && c->v() == d->u());
          break;
        case RuleKind::Ion: {
          if (c->u() == d->u() && c->v() == d->v()) {
            bool hasE = false;
            for (const auto& a : w.atoms())
              if (auto* e = std::get_if<RuleApp>(&a))
                if ((e->kind() == RuleKind::ENeg || e->kind() == RuleKind::ENonneg) &&
                    e->u() == d->v())
                  hasE = true;
            match = !hasE;
          }
          break;
        }
      }
      if (match) return BadPair{p, q};
    }
  }
  return std::nullopt;
}

inline bool make_adjacent(Work& w, std::size_t& p, std::size_t& q,
                          disc::detail::FreshNames& fresh, Budget& bud) {
  Trace* tr = w.trace();
  while (q > p + 1) {
    bud.spend("evict");
    {
      auto r = try_exchange(w, p, fresh);
      if (r.ok && r.first_pos != npos) {
        p = r.first_pos;
        q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(q) + r.delta);
        continue;
      }
      if (r.ok) return false;  // the pair dissolved; caller rescans
    }
    {
      auto r = try_exchange(w, q - 1, fresh);
      if (r.ok && r.second_pos != npos) {
        q = r.second_pos;
        continue;
      }
      if (r.ok) return false;
    }
    // push the atom after the disconnection rightwards across the connection
    {
      TypedTerm snap = w.snapshot();
      std::size_t tlen = tr ? tr->size() : 0;
      std::size_t pos = p + 1, qq = q;
      bool ok = true;
      while (pos < qq) {
        bud.spend("evict-chain");
        auto r = try_exchange(w, pos, fresh);
        if (!r.ok) {
          ok = false;
          break;
        }
        if (pos + 1 == qq) {
          if (r.second_pos == npos) return false;  // connection consumed en route
          qq = r.second_pos;
          break;
        }
        qq = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(qq) + r.delta);
        if (r.first_pos == npos) break;
        pos = r.first_pos;
      }
      if (ok) {
        q = qq;
        continue;
      }
      w = Work(std::move(snap), tr);
      if (tr) tr->resize(tlen);
    }
    // push the atom before the connection leftwards across the disconnection
    {
      TypedTerm snap = w.snapshot();
      std::size_t tlen = tr ? tr->size() : 0;
      std::size_t pos = q - 1, pp = p, qq = q;
      bool ok = true;
      while (pos > pp) {
        bud.spend("evict-chain");
        auto r = try_exchange(w, pos - 1, fresh);
        if (!r.ok) {
          ok = false;
          break;
        }
        qq = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(qq) + r.delta);
        if (r.second_pos == npos) break;
        if (pos - 1 == pp) {
          if (r.first_pos == npos) return false;
          pp = r.first_pos;
          break;
        }
        pos = r.second_pos;
      }
      if (ok) {
        p = pp;
        q = qq;
        continue;
      }
      w = Work(std::move(snap), tr);
      if (tr) tr->resize(tlen);
    }
    return false;
  }
  return true;
}

// Conditions (6), (7), (8): cancel an undone disconnection/connection pair.
inline bool cancel_bad_pair(Work& w, disc::detail::FreshNames& fresh, Budget& bud) {
  auto pair = find_bad_pair(w);
  if (!pair) return false;
  std::size_t p = pair->disc, q = pair->conn;
  TypedTerm entry = w.snapshot();
  if (!make_adjacent(w, p, q, fresh, bud)) {
    if (w.snapshot() == entry)
      throw engine_error("cannot bring an undone pair together", w.trace_dump());
    return true;  // restructured; rescan on the next iteration
  }
  {
    auto* dd = std::get_if<RuleApp>(&w.atom(p));
    auto* cc = std::get_if<RuleApp>(&w.atom(q));
    if (!dd || !cc || dd->is_connect() || !cc->is_connect() || cc->kind() != dd->kind())
      return true;  // eviction restructured the pair; rescan
  }

  const RuleApp d = std::get<RuleApp>(w.atom(p));
  RuleApp c = std::get<RuleApp>(w.atom(q));
  if (d.kind() == RuleKind::Cov && c.u() == d.v() && c.v() == d.u())
    c = RuleApp::cov(c.v(), c.u(), c.b(), c.a(), c.direction());

  std::vector<TermAtom> repl;
  const char* name = "ddbar1";
  for (const auto& s : d.superscripts()) repl.push_back(TouchAtom{s});
  auto dsub = d.subscripts();
  auto csub = c.subscripts();
  if (dsub.empty()) {
    if (d.kind() == RuleKind::ENonneg && c.v() != d.v()) {
      // detach then attach a different stub: the two stubs swap names
      std::string z = fresh.next();
      repl.push_back(RenAtom{d.v(), z});
      repl.push_back(RenAtom{c.v(), d.v()});
      repl.push_back(RenAtom{z, c.v()});
      name = "eebar";
    } else {
      repl.push_back(TouchAtom{d.v()});
      name = "ddbar4";
    }
  } else if (dsub == csub) {
    name = "ddbar4";
  } else if (dsub[1] == csub[1]) {
    repl.push_back(RenAtom{csub[0], dsub[0]});
    name = "ddbar2";
  } else if (dsub[0] == csub[0]) {
    repl.push_back(RenAtom{csub[1], dsub[1]});
    name = "ddbar3";
  } else {
    if (csub[0] != dsub[0]) repl.push_back(RenAtom{csub[0], dsub[0]});
    if (csub[1] != dsub[1]) repl.push_back(RenAtom{csub[1], dsub[1]});
    name = "ddbar1";
  }
  w.splice(p, 2, repl, name);
  return true;
}

}  // namespace engine

/// Runs the full normalization pipeline: ICE order, canonical renaming form,
/// touch absorption, dummy discipline, deferred-removal elimination and
/// cancellation of undone work, iterated to a fixpoint. The result satisfies
/// every normal-form condition and has the same endpoints and interpretation
/// as the input.
inline NormalForm to_normal_form(const TypedTerm& t0, Trace* trace = nullptr) {
  engine::Work w(t0, trace);
  auto fresh = engine::fresh_for(t0.atoms, t0.graphs);
  engine::Budget bud{engine::budget_for(t0.atoms.size()), trace};
  const FunctorImage img0 = functor_image_sets(t0);

  for (;;) {
    bud.spend("normal-form");
    engine::ice_sort(w, fresh, bud);
    engine::rebuild_rename_region(w);
    if (engine::absorb_touches(w)) continue;
    if (engine::fix_dummies(w, fresh)) continue;
    if (engine::ez_slot_exchange(w)) continue;
    if (engine::fix_conn_renames(w, fresh, bud)) continue;
    if (engine::cancel_bad_pair(w, fresh, bud)) continue;
    break;
  }

  TypedTerm result = w.take();
  auto fails = normal_form_failures(result);
  if (!fails.empty()) {
    std::ostringstream msg;
    msg << "normalization left conditions unmet:";
    for (const auto& f : fails) msg << " [" << f << "]";
    throw engine_error(msg.str(), trace ? trace_to_string(*trace) : "");
  }
  if (!(functor_image_sets(result) == img0) || !(result.source() == t0.source()) ||
      !(result.target() == t0.target()))
    throw engine_error("normalization changed the term's meaning",
                       trace ? trace_to_string(*trace) : "");
  return make_normal_form_record(std::move(result));
}

inline NormalForm to_normal_form(const UntypedTerm& t, const ChemGraph& src,
                                 Trace* trace = nullptr) {
  return to_normal_form(elaborate(t, src), trace);
}

// -- canonical representative ---------------------------------------------------

namespace detail {

// In a normal form every introduced stub name and every rename-chain dummy is
// transient; those names may be rewritten freely.
inline std::set<std::string> dummy_names(const std::vector<TermAtom>& atoms) {
  std::set<std::string> out;
  for (const auto& a : atoms)
    if (auto* d = std::get_if<RuleApp>(&a))
      if (!d->is_connect())
        for (const auto& n : d->subscripts()) out.insert(n);
  auto rs = renaming_sets(atoms);
  for (const auto& n : rs.C) out.insert(n);
  return out;
}

inline std::vector<std::string> atom_name_slots(const TermAtom& a) {
  if (auto* t = std::get_if<TouchAtom>(&a)) return {t->u};
  if (auto* r = std::get_if<RenAtom>(&a)) return {r->from, r->to};
  if (auto* d = std::get_if<RuleApp>(&a)) return d->names();
  return {};
}

inline std::string atom_shape_tag(const TermAtom& a) {
  if (is_id(a)) return "id";
  if (is_touch(a)) return "S";
  if (is_ren(a)) return "R";
  const auto& d = std::get<RuleApp>(a);
  std::string t = d.is_connect() ? "~" : "";
  switch (d.kind()) {
    case RuleKind::ENeg: return t + "En";
    case RuleKind::ENonneg: return t + "Ez";
    case RuleKind::Ion: return t + "I";
    case RuleKind::Cov: return t + "C";
  }
  return "?";
}

// Refinement ranks for the dummy names: the signature of a dummy describes the
// atoms it occurs in, masking dummy co-occurrences by their previous-round
// ranks. Structurally distinct dummies separate within a few rounds.
inline std::map<std::string, int> dummy_ranks(const std::vector<TermAtom>& atoms,
                                              const std::set<std::string>& dummies) {
  std::map<std::string, std::string> sig;
  for (const auto& d : dummies) sig[d] = "";
  for (int round = 0; round < 3; ++round) {
    std::map<std::string, std::vector<std::string>> occ;
    for (const auto& a : atoms) {
      auto slots = atom_name_slots(a);
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (!dummies.count(slots[s])) continue;
        std::string desc = atom_shape_tag(a) + "/" + std::to_string(s) + "(";
        for (std::size_t k = 0; k < slots.size(); ++k) {
          if (k == s)
            desc += "@";
          else if (dummies.count(slots[k]))
            desc += "#" + sig[slots[k]];
          else
            desc += slots[k];
          desc += ",";
        }
        desc += ")";
        occ[slots[s]].push_back(desc);
      }
    }
    std::map<std::string, std::string> next;
    for (const auto& d : dummies) {
      auto v = occ[d];
      std::sort(v.begin(), v.end());
      std::string s;
      for (const auto& x : v) s += x + ";";
      next[d] = s;
    }
    // compress signatures to dense ranks for the next round
    std::vector<std::string> uniq;
    for (const auto& [d, s] : next) uniq.push_back(s);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& [d, s] : next) {
      auto it = std::lower_bound(uniq.begin(), uniq.end(), s);
      s = std::to_string(it - uniq.begin());
    }
    sig = std::move(next);
  }
  std::map<std::string, int> rank;
  for (const auto& [d, s] : sig) rank[d] = std::stoi(s);
  return rank;
}

struct NameKey {
  int cls;  // 0 persistent, 1 dummy
  int rank;
  std::string name;
  friend auto operator<=>(const NameKey&, const NameKey&) = default;
};

inline NameKey name_key(const std::string& n, const std::set<std::string>& dummies,
                        const std::map<std::string, int>& rank) {
  if (dummies.count(n)) return {1, rank.count(n) ? rank.at(n) : 0, ""};
  return {0, 0, n};
}

struct AtomKey {
  int rank;
  std::string shape;
  std::vector<NameKey> slots;
  friend auto operator<=>(const AtomKey&, const AtomKey&) = default;
};

inline AtomKey atom_key(const TermAtom& a, const std::set<std::string>& dummies,
                        const std::map<std::string, int>& rank) {
  AtomKey k;
  k.rank = block_rank(a);
  k.shape = atom_shape_tag(a);
  for (const auto& n : atom_name_slots(a)) k.slots.push_back(name_key(n, dummies, rank));
  return k;
}

// Positional print with dummies numbered by first occurrence; used to compare
// terms up to dummy renaming.
inline std::string dummy_blind_print(const std::vector<TermAtom>& atoms) {
  auto dummies = dummy_names(atoms);
  std::map<std::string, std::string> num;
  std::ostringstream out;
  for (const auto& a : atoms) {
    out << atom_shape_tag(a) << "[";
    for (const auto& n : atom_name_slots(a)) {
      if (dummies.count(n)) {
        auto it = num.find(n);
        if (it == num.end()) it = num.emplace(n, "$" + std::to_string(num.size())).first;
        out << it->second;
      } else {
        out << n;
      }
      out << ",";
    }
    out << "];";
  }
  return out.str();
}

inline std::vector<TermAtom> renumber_dummies(const std::vector<TermAtom>& atoms,
                                              const ChemGraph& H, const ChemGraph& G) {
  auto dummies = dummy_names(atoms);
  std::set<std::string> taken;
  for (const auto& [n, l] : H.vertices()) taken.insert(n);
  for (const auto& [n, l] : G.vertices()) taken.insert(n);
  for (const auto& a : atoms)
    for (const auto& n : atom_name_slots(a))
      if (!dummies.count(n)) taken.insert(n);
  std::map<std::string, std::string> sub;
  unsigned long counter = 0;
  auto fresh = [&]() {
    for (;;) {
      std::string c = "_n" + std::to_string(counter++);
      if (!taken.count(c)) {
        taken.insert(c);
        return c;
      }
    }
  };
  auto subst = [&](const std::string& n) -> std::string {
    if (!dummies.count(n)) return n;
    auto it = sub.find(n);
    if (it == sub.end()) it = sub.emplace(n, fresh()).first;
    return it->second;
  };
  std::vector<TermAtom> out;
  for (const auto& a : atoms) {
    if (auto* t = std::get_if<TouchAtom>(&a)) {
      out.push_back(TouchAtom{subst(t->u)});
    } else if (auto* r = std::get_if<RenAtom>(&a)) {
      out.push_back(RenAtom{subst(r->from), subst(r->to)});
    } else if (auto* d = std::get_if<RuleApp>(&a)) {
      RuleApp d2 = *d;
      if (!d2.subscripts().empty()) d2 = d2.with_subscripts(subst(d2.a()), subst(d2.b()));
      std::vector<std::string> sup = d2.superscripts();
      if (sup.size() == 2) d2 = d2.with_superscripts(subst(d2.u()), subst(d2.v()));
      out.push_back(d2);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

/// One deterministic pass of the block-level canonicalization: orientation of
/// covalent superscripts, canonical renaming form, block sorting with
/// structure-ranked dummies, re-pairing of repeated-rule subscripts, and
/// positional dummy renumbering. Iterated to a fixpoint.
inline std::vector<TermAtom> canonical_core(std::vector<TermAtom> atoms, const ChemGraph& H,
                                            const ChemGraph& G) {
  std::string prev;
  for (int iter = 0; iter < 8; ++iter) {
    // orient covalent rules so the lexicographically smaller vertex comes first
    for (auto& a : atoms) {
      if (auto* d = std::get_if<RuleApp>(&a))
        if (d->kind() == RuleKind::Cov && d->v() < d->u())
          *d = RuleApp::cov(d->v(), d->u(), d->b(), d->a(), d->direction());
    }
    // canonical renaming form for the rename region
    {
      TypedTerm tt = elaborate(UntypedTerm{atoms}, H);
      engine::Work w(std::move(tt));
      engine::rebuild_rename_region(w);
      atoms = w.take().atoms;
    }
    auto dummies = dummy_names(atoms);
    auto rank = dummy_ranks(atoms, dummies);
    // sort rule blocks and the touch block; the rename region keeps the
    // order the canonical builder produced
    {
      std::vector<std::pair<AtomKey, TermAtom>> keyed;
      for (const auto& a : atoms) keyed.emplace_back(atom_key(a, dummies, rank), a);
      std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.first.rank != y.first.rank) return x.first.rank < y.first.rank;
        if (x.first.rank == static_cast<int>(BlockKind::Ren)) return false;  // keep order
        return x.first < y.first;
      });
      atoms.clear();
      for (auto& [k, a] : keyed) atoms.push_back(std::move(a));
    }
    // re-pair subscripts across runs of the same rule at the same vertices
    {
      std::size_t i = 0;
      while (i < atoms.size()) {
        auto* d = std::get_if<RuleApp>(&atoms[i]);
        if (!d || d->subscripts().empty()) {
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < atoms.size()) {
          auto* e = std::get_if<RuleApp>(&atoms[j]);
          if (!e || e->kind() != d->kind() || e->direction() != d->direction() ||
              e->superscripts() != d->superscripts())
            break;
          ++j;
        }
        if (j - i > 1) {
          std::vector<std::string> firsts, seconds;
          for (std::size_t k = i; k < j; ++k) {
            const auto& r = std::get<RuleApp>(atoms[k]);
            firsts.push_back(r.a());
            seconds.push_back(r.b());
          }
          auto byKey = [&](const std::string& x, const std::string& y) {
            return name_key(x, dummies, rank) < name_key(y, dummies, rank);
          };
          std::sort(firsts.begin(), firsts.end(), byKey);
          std::sort(seconds.begin(), seconds.end(), byKey);
          for (std::size_t k = i; k < j; ++k) {
            auto& r = std::get<RuleApp>(atoms[k]);
            r = r.with_subscripts(firsts[k - i], seconds[k - i]);
          }
        }
        i = j;
      }
    }
    atoms = renumber_dummies(atoms, H, G);
    std::string now = print_term(atoms);
    if (now == prev) break;
    prev = std::move(now);
  }
  TypedTerm check = elaborate(UntypedTerm{atoms}, H);
  if (!(check.target() == G)) throw engine_error("canonicalization changed the target", "");
  return atoms;
}

}  // namespace detail

/// Deterministic representative of the equivalence class of a normal form
/// under block commutation, covalent orientation, repeated-rule index swaps,
/// dummy renaming and the two name-exchange moves. Idempotent.
inline NormalForm canonicalize_nf(const NormalForm& nf) {
  const ChemGraph& H = nf.term.source();
  const ChemGraph& G = nf.term.target();
  std::vector<TermAtom> atoms = nf.term.atoms;
  {
    // normal forms built outside to_normal_form may still carry stub-slot
    // electron atoms; normalize those away first
    engine::Work w(elaborate(UntypedTerm{atoms}, H));
    while (engine::ez_slot_exchange(w)) {
    }
    atoms = w.take().atoms;
  }
  auto best = detail::canonical_core(atoms, H, G);
  std::string bestPrint = print_term(best);

  // Bounded search over connection/rename name exchanges.
  std::set<std::string> seen{bestPrint};
  std::vector<std::vector<TermAtom>> frontier{best};
  int guard = 0;
  while (!frontier.empty() && guard < 64) {
    auto cur = std::move(frontier.back());
    frontier.pop_back();
    TypedTerm tt = elaborate(UntypedTerm{cur}, H);
    for (std::size_t p = 0; p < cur.size() && guard < 64; ++p) {
      auto* c = std::get_if<RuleApp>(&cur[p]);
      if (!c || !c->is_connect() || c->subscripts().empty()) continue;
      if (c->kind() == RuleKind::Ion) continue;
      for (std::size_t q = 0; q < cur.size() && guard < 64; ++q) {
        auto* r = std::get_if<RenAtom>(&cur[q]);
        if (!r) continue;
        for (int slot = 0; slot < 2; ++slot) {
          const std::string sub = slot == 0 ? c->a() : c->b();
          if (r->from == sub) continue;
          RuleApp cand = c->with_subscripts(slot == 0 ? r->from : c->a(),
                                            slot == 1 ? r->from : c->b());
          if (!domain_check(cand, tt.graphs[p]).in_domain) continue;
          std::vector<TermAtom> variant = cur;
          variant[p] = cand;
          variant[q] = RenAtom{sub, r->to};
          TypedTerm vt;
          if (!elaborates(UntypedTerm{variant}, H, &vt) || !(vt.target() == G)) continue;
          ++guard;
          auto canon = detail::canonical_core(variant, H, G);
          std::string cp = print_term(canon);
          if (seen.insert(cp).second) {
            if (cp < bestPrint) {
              bestPrint = cp;
              best = canon;
            }
            frontier.push_back(std::move(canon));
          }
        }
      }
    }
  }
  return make_normal_form_record(elaborate(UntypedTerm{best}, H));
}

// -- equivalence and equality deciders -------------------------------------------

struct NfEqDetail {
  bool equivalent = false;
  bool canonical_agreed = true;  // false marks a canonicalization shortfall
};

/// Two normal forms between the same endpoints are equivalent exactly when
/// their interpretations agree; the canonical printer decides the common case
/// and the interpretation settles any residue.
inline NfEqDetail nf_equivalent_detail(const NormalForm& a, const NormalForm& b) {
  if (!(a.term.source() == b.term.source()) || !(a.term.target() == b.term.target()))
    throw std::invalid_argument("nf_equivalent: endpoint graphs differ");
  bool canon =
      print_term(canonicalize_nf(a).term.atoms) == print_term(canonicalize_nf(b).term.atoms);
  if (canon) return {true, true};
  bool sem = functor_image_sets(a.term) == functor_image_sets(b.term);
  return {sem, !sem};
}

inline bool nf_equivalent(const NormalForm& a, const NormalForm& b) {
  return nf_equivalent_detail(a, b).equivalent;
}

struct EqDetail {
  bool semantic = false;
  bool syntactic = false;
  bool agree() const { return semantic == syntactic; }
};

/// Equality of two terms out of the same source graph, decided two ways:
/// semantically (equal targets and equal interpretations) and syntactically
/// (identical canonical normal forms). The deciders must agree.
inline EqDetail eq_terms_detail(const UntypedTerm& t, const UntypedTerm& s,
                                const ChemGraph& src) {
  TypedTerm tt = elaborate(t, src);
  TypedTerm ss = elaborate(s, src);
  EqDetail d;
  d.semantic =
      tt.target() == ss.target() && functor_image_sets(tt) == functor_image_sets(ss);
  if (tt.target() == ss.target()) {
    auto na = canonicalize_nf(to_normal_form(tt));
    auto nb = canonicalize_nf(to_normal_form(ss));
    d.syntactic = print_term(na.term.atoms) == print_term(nb.term.atoms);
  }
  return d;
}

inline bool eq_terms(const UntypedTerm& t, const UntypedTerm& s, const ChemGraph& src) {
  return eq_terms_detail(t, s, src).semantic;
}

}  // namespace disc
