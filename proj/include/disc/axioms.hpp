#pragma once

#include <functional>
#include <string>
#include <vector>

#include "disc/enumerate.hpp"

namespace disc {
namespace oracle {

enum class Transfer { None, LeftToRight, Both };

struct IdentityInstance {
  UntypedTerm lhs, rhs;
};

struct IdentitySchema {
  std::string name;
  Transfer transfer = Transfer::None;
  std::function<std::vector<IdentityInstance>(const ChemGraph&)> instances;
};

namespace detail {

inline std::vector<std::string> fresh_names(const ChemGraph& g, int k) {
  std::vector<std::string> out;
  int c = 0;
  while (static_cast<int>(out.size()) < k) {
    std::string n = "q" + std::to_string(c++);
    if (!g.has_vertex(n)) out.push_back(n);
  }
  return out;
}

inline std::vector<std::string> alpha_names(const ChemGraph& g) {
  std::vector<std::string> out;
  for (const auto& [n, l] : g.vertices())
    if (l.element == kAlpha) out.push_back(n);
  return out;
}

inline std::vector<RuleApp> apps_of(const ChemGraph& g, bool connect,
                                    bool subscripted_only = false) {
  std::vector<RuleApp> out;
  for (auto& r : enumerate_ruleapps(g)) {
    if (r.is_connect() != connect) continue;
    if (subscripted_only && r.subscripts().empty()) continue;
    out.push_back(r);
  }
  return out;
}

inline UntypedTerm mk(std::vector<TermAtom> atoms) { return UntypedTerm{std::move(atoms)}; }

}  // namespace detail

/// The commuting, absorption and cancellation identities of the disconnection
/// category, as instantiation schemas over a concrete graph. Used by the
/// soundness oracle, which replays every instance against the interpretation.
inline std::vector<IdentitySchema> identity_schemas() {
  using namespace detail;
  std::vector<IdentitySchema> out;
  auto add = [&out](std::string name, Transfer tr,
                    std::function<std::vector<IdentityInstance>(const ChemGraph&)> f) {
    out.push_back({std::move(name), tr, std::move(f)});
  };

  // R[u>z];R[z>w] =< R[u>w]
  add("trans", Transfer::LeftToRight, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 2);
    for (const auto& u : alpha_names(g))
      for (const std::string& w : {fs[1], u})
        v.push_back({mk({RenAtom{u, fs[0]}, RenAtom{fs[0], w}}), mk({RenAtom{u, w}})});
    return v;
  });

  // R[u>z];R[v>w] ~ R[v>w];R[u>z]
  add("rcomm", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 2);
    auto as = alpha_names(g);
    for (const auto& u : as)
      for (const auto& w : as) {
        if (u == w) continue;
        v.push_back({mk({RenAtom{u, fs[0]}, RenAtom{w, fs[1]}}),
                     mk({RenAtom{w, fs[1]}, RenAtom{u, fs[0]}})});
        v.push_back({mk({RenAtom{u, fs[0]}, RenAtom{w, u}}),
                     mk({RenAtom{w, u}, RenAtom{u, fs[0]}})});
      }
    return v;
  });

  // R[u>u] =< S[u]
  add("refl", Transfer::LeftToRight, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& u : alpha_names(g))
      v.push_back({mk({RenAtom{u, u}}), mk({TouchAtom{u}})});
    return v;
  });

  // R[b>z];R[a>b] ~ S[b];R[a>z]
  add("rsymm", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 1);
    auto as = alpha_names(g);
    for (const auto& a : as)
      for (const auto& b : as) {
        if (a == b) continue;
        v.push_back({mk({RenAtom{b, fs[0]}, RenAtom{a, b}}),
                     mk({TouchAtom{b}, RenAtom{a, fs[0]}})});
      }
    return v;
  });

  // R[u>v];S[w] ~ S[w];R[u>v]
  add("sr1", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 1);
    for (const auto& u : alpha_names(g))
      for (const auto& [w, lbl] : g.vertices())
        v.push_back({mk({RenAtom{u, fs[0]}, TouchAtom{w}}),
                     mk({TouchAtom{w}, RenAtom{u, fs[0]}})});
    return v;
  });

  // R[u>v];S[v] ~= S[u];R[u>v] ~= R[u>v]
  add("sr2", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 1);
    for (const auto& u : alpha_names(g))
      for (const std::string& t : {fs[0], u}) {
        v.push_back({mk({RenAtom{u, t}, TouchAtom{t}}), mk({TouchAtom{u}, RenAtom{u, t}})});
        v.push_back({mk({TouchAtom{u}, RenAtom{u, t}}), mk({RenAtom{u, t}})});
        v.push_back({mk({RenAtom{u, t}, TouchAtom{t}}), mk({RenAtom{u, t}})});
      }
    return v;
  });

  // R[u>v];d ~ d;R[u>v]
  add("rd1", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 1);
    for (const auto& u : alpha_names(g))
      for (const auto& d : enumerate_ruleapps(g))
        v.push_back({mk({RenAtom{u, fs[0]}, d}), mk({d, RenAtom{u, fs[0]}})});
    return v;
  });

  // R[u>v];E[w,v] ~= E[w,u];R[u>v]
  add("rd2", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 1);
    for (const auto& u : alpha_names(g))
      for (const auto& [w, lbl] : g.vertices()) {
        if (lbl.element == kAlpha || w == u) continue;
        v.push_back({mk({RenAtom{u, fs[0]}, RuleApp::enonneg(w, fs[0])}),
                     mk({RuleApp::enonneg(w, u), RenAtom{u, fs[0]}})});
      }
    return v;
  });

  // d^U_{D[u]};R[u>v] ~= d^U_{D[v/u]}
  add("rd3", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 3);
    for (const auto& d : apps_of(g, false, true)) {
      RuleApp d2 = d.with_subscripts(fs[0], fs[1]);
      v.push_back({mk({d2, RenAtom{fs[0], fs[2]}}),
                   mk({d2.with_subscripts(fs[2], fs[1])})});
      v.push_back({mk({d2, RenAtom{fs[1], fs[2]}}),
                   mk({d2.with_subscripts(fs[0], fs[2])})});
    }
    return v;
  });

  // d'[i,j];~h[a,b];R[i>c];R[j>d] =< ~h[a,b];d'[c,d]
  add("rd4", Transfer::LeftToRight, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 4);
    auto conns = apps_of(g, true, true);
    for (const auto& h : conns) {
      ChemGraph g2 = apply_rule(h, g);
      for (const auto& d : apps_of(g2, false, true)) {
        std::vector<std::pair<std::string, std::string>> cds = {
            {fs[2], fs[3]}, {h.a(), h.b()}, {h.a(), fs[3]}, {fs[2], h.b()}};
        for (auto& [c, dd] : cds) {
          if (c == dd) continue;
          RuleApp lhsd = d.with_subscripts(fs[0], fs[1]);
          RuleApp rhsd = d.with_subscripts(c, dd);
          v.push_back({mk({lhsd, h, RenAtom{fs[0], c}, RenAtom{fs[1], dd}}), mk({h, rhsd})});
        }
        if (v.size() > 150) break;
      }
      if (v.size() > 150) break;
    }
    return v;
  });

  // d[a,b];~d[c,d] ~ S^U;R[c>a];R[d>b]  (and its b=d / a=c degenerations)
  auto cancel_pairs = [](const ChemGraph& g, auto filter) {
    std::vector<std::pair<RuleApp, RuleApp>> v;
    for (const auto& d : detail::apps_of(g, false, true)) {
      ChemGraph g2 = apply_rule(d, g);
      for (const auto& c : detail::apps_of(g2, true, true)) {
        if (c.kind() != d.kind()) continue;
        if (c.superscripts() != d.superscripts()) continue;
        if (!filter(d, c)) continue;
        v.push_back({d, c});
      }
    }
    return v;
  };

  add("ddbar1", Transfer::None, [cancel_pairs](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (auto& [d, c] :
         cancel_pairs(g, [](const RuleApp& d, const RuleApp& c) {
           return c.a() != d.a() && c.b() != d.b();
         })) {
      std::vector<TermAtom> rhs;
      for (const auto& s : d.superscripts()) rhs.push_back(TouchAtom{s});
      rhs.push_back(RenAtom{c.a(), d.a()});
      rhs.push_back(RenAtom{c.b(), d.b()});
      v.push_back({mk({d, c}), mk(rhs)});
    }
    return v;
  });

  add("ddbar2", Transfer::None, [cancel_pairs](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (auto& [d, c] :
         cancel_pairs(g, [](const RuleApp& d, const RuleApp& c) {
           return c.a() != d.a() && c.b() == d.b();
         })) {
      std::vector<TermAtom> rhs;
      for (const auto& s : d.superscripts()) rhs.push_back(TouchAtom{s});
      rhs.push_back(RenAtom{c.a(), d.a()});
      v.push_back({mk({d, c}), mk(rhs)});
    }
    return v;
  });

  add("ddbar3", Transfer::None, [cancel_pairs](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (auto& [d, c] :
         cancel_pairs(g, [](const RuleApp& d, const RuleApp& c) {
           return c.a() == d.a() && c.b() != d.b();
         })) {
      std::vector<TermAtom> rhs;
      for (const auto& s : d.superscripts()) rhs.push_back(TouchAtom{s});
      rhs.push_back(RenAtom{c.b(), d.b()});
      v.push_back({mk({d, c}), mk(rhs)});
    }
    return v;
  });

  // d;~d =< S^U (all four kinds, exact inverse)
  add("ddbar4", Transfer::LeftToRight, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& d : apps_of(g, false)) {
      std::vector<TermAtom> rhs;
      for (const auto& s : d.superscripts()) rhs.push_back(TouchAtom{s});
      v.push_back({mk({d, d.invert()}), mk(rhs)});
    }
    return v;
  });

  // ~d;d =< S^U;S^D
  add("ddbar5", Transfer::LeftToRight, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& c : apps_of(g, true)) {
      std::vector<TermAtom> rhs;
      for (const auto& s : c.superscripts()) rhs.push_back(TouchAtom{s});
      for (const auto& s : c.subscripts()) rhs.push_back(TouchAtom{s});
      v.push_back({mk({c, c.invert()}), mk(rhs)});
    }
    return v;
  });

  // E[u,a];~E[u,b] ~ S[u];R[a>z];R[b>a];R[z>b]
  add("eebar", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 1);
    for (const auto& d : apps_of(g, false)) {
      if (d.kind() != RuleKind::ENonneg) continue;
      for (const auto& [b, lbl] : g.vertices()) {
        if (b == d.v() || lbl.element != kAlpha) continue;
        v.push_back({mk({d, RuleApp::enonneg(d.u(), b, Direction::Connect)}),
                     mk({TouchAtom{d.u()}, RenAtom{d.v(), fs[0]}, RenAtom{b, d.v()},
                         RenAtom{fs[0], b}})});
      }
    }
    return v;
  });

  // ~d[u,v];d[w,z] ~ d[w,z];~d[u,v]  (two-superscript rules)
  add("comm2", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& c : apps_of(g, true)) {
      if (!c.subscripts().empty()) continue;
      ChemGraph g2 = apply_rule(c, g);
      for (const auto& d : apps_of(g2, false)) {
        if (d.kind() != c.kind() || !d.subscripts().empty()) continue;
        v.push_back({mk({c, d}), mk({d, c})});
      }
    }
    return v;
  });

  // S[u];S[v] ~= S[v];S[u] ; S[u];S[u] ~= S[u]
  add("scomm", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& [u, lu] : g.vertices())
      for (const auto& [w, lw] : g.vertices())
        v.push_back({mk({TouchAtom{u}, TouchAtom{w}}), mk({TouchAtom{w}, TouchAtom{u}})});
    return v;
  });
  add("sidem", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& [u, lu] : g.vertices())
      v.push_back({mk({TouchAtom{u}, TouchAtom{u}}), mk({TouchAtom{u}})});
    return v;
  });

  // S[u];d =< d;S[u]
  add("sd1", Transfer::LeftToRight, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& [u, lu] : g.vertices())
      for (const auto& d : apps_of(g, false))
        v.push_back({mk({TouchAtom{u}, d}), mk({d, TouchAtom{u}})});
    return v;
  });

  // d^{U[v]};S[v] ~= d^{U[v]}
  add("sd2", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& d : apps_of(g, false))
      for (const auto& s : d.superscripts())
        v.push_back({mk({d, TouchAtom{s}}), mk({d})});
    return v;
  });

  // C[u,v;a,b] ~= C[v,u;b,a]
  add("cs", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& d : enumerate_ruleapps(g)) {
      if (d.kind() != RuleKind::Cov) continue;
      v.push_back({mk({d}), mk({RuleApp::cov(d.v(), d.u(), d.b(), d.a(), d.direction())})});
    }
    return v;
  });

  // A commuting instance must keep the two rules independent: the second may
  // not mention a vertex the first introduces (such overlaps belong to the
  // absorption and cancellation identities instead).
  auto independent = [](const RuleApp& x, const RuleApp& y) {
    for (const auto& n : y.names())
      for (const auto& m : x.subscripts())
        if (n == m) return false;
    return true;
  };

  // d;d' ~= d';d (disconnections of the same shape commute; mixed shapes are
  // governed by their own one-directional identities below)
  add("comm1", Transfer::Both, [independent](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& d : apps_of(g, false)) {
      ChemGraph g2 = apply_rule(d, g);
      for (const auto& e : apps_of(g2, false)) {
        if (e.kind() != d.kind()) continue;
        if (!independent(d, e)) continue;
        v.push_back({mk({d, e}), mk({e, d})});
        if (v.size() > 200) return v;
      }
    }
    return v;
  });

  // the commuting family against ionic and covalent disconnections
  struct CommSpec {
    const char* name;
    Transfer tr;
    RuleKind first;    // kind of the left atom
    bool firstConn;
    RuleKind second;   // kind of the right atom (a disconnection)
  };
  const CommSpec specs[] = {
      {"comm3", Transfer::Both, RuleKind::Cov, false, RuleKind::Ion},
      {"comm4", Transfer::LeftToRight, RuleKind::ENeg, false, RuleKind::Ion},
      {"comm5", Transfer::LeftToRight, RuleKind::ENonneg, false, RuleKind::Ion},
      {"comm6", Transfer::LeftToRight, RuleKind::ENonneg, true, RuleKind::Ion},
      {"comm7", Transfer::LeftToRight, RuleKind::ENeg, true, RuleKind::Ion},
      {"comm8", Transfer::LeftToRight, RuleKind::Cov, true, RuleKind::Ion},
      {"comm9", Transfer::Both, RuleKind::ENeg, false, RuleKind::Cov},
      {"comm10", Transfer::LeftToRight, RuleKind::ENonneg, false, RuleKind::Cov},
      {"comm11", Transfer::Both, RuleKind::ENonneg, true, RuleKind::Cov},
      {"comm12", Transfer::LeftToRight, RuleKind::ENonneg, false, RuleKind::ENeg},
      {"comm13", Transfer::Both, RuleKind::ENonneg, true, RuleKind::ENeg},
  };
  for (const auto& sp : specs) {
    add(sp.name, sp.tr, [sp, independent](const ChemGraph& g) {
      std::vector<IdentityInstance> v;
      for (const auto& x : enumerate_ruleapps(g)) {
        if (x.kind() != sp.first || x.is_connect() != sp.firstConn) continue;
        ChemGraph g2 = apply_rule(x, g);
        for (const auto& y : apps_of(g2, false)) {
          if (y.kind() != sp.second) continue;
          if (!independent(x, y)) continue;
          v.push_back({mk({x, y}), mk({y, x})});
          if (v.size() > 200) return v;
        }
      }
      return v;
    });
  }

  // derived: d^U_{D[a]};S[a] ~= d^U_{D[a]}
  add("sabsorb", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    for (const auto& d : apps_of(g, false, true))
      for (const auto& s : d.subscripts())
        v.push_back({mk({d, TouchAtom{s}}), mk({d})});
    return v;
  });

  // derived: ~d[a,b];d[c,d] ~ S^U;R[a>j];R[b>d];R[j>c]
  add("ids0", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 3);
    for (const auto& c : apps_of(g, true, true)) {
      ChemGraph g2 = apply_rule(c, g);
      for (const auto& d : apps_of(g2, false, true)) {
        if (d.kind() != c.kind() || d.superscripts() != c.superscripts()) continue;
        std::vector<TermAtom> rhs;
        for (const auto& s : c.superscripts()) rhs.push_back(TouchAtom{s});
        rhs.push_back(RenAtom{c.a(), fs[0]});
        rhs.push_back(RenAtom{c.b(), d.b()});
        rhs.push_back(RenAtom{fs[0], d.a()});
        v.push_back({mk({c, d}), mk(rhs)});
        if (v.size() > 200) return v;
      }
    }
    return v;
  });

  // derived: R[z>c];R[w>d];d[a,b] ~ R[z>a];R[w>b];d[c,d]
  add("ids1", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 4);
    auto as = alpha_names(g);
    for (const auto& z : as)
      for (const auto& w : as) {
        if (z == w) continue;
        for (const auto& d : apps_of(g, false, true)) {
          RuleApp lhsd = d.with_subscripts(fs[2], fs[3]);
          RuleApp rhsd = d.with_subscripts(fs[0], fs[1]);
          v.push_back({mk({RenAtom{z, fs[0]}, RenAtom{w, fs[1]}, lhsd}),
                       mk({RenAtom{z, fs[2]}, RenAtom{w, fs[3]}, rhsd})});
          if (v.size() > 200) return v;
        }
      }
    return v;
  });

  // derived: R[z>c];d[a,b] ~ R[z>a];d[c,b]
  add("ids2", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 3);
    for (const auto& z : alpha_names(g))
      for (const auto& d : apps_of(g, false, true)) {
        RuleApp lhsd = d.with_subscripts(fs[1], fs[2]);
        RuleApp rhsd = d.with_subscripts(fs[0], fs[2]);
        v.push_back({mk({RenAtom{z, fs[0]}, lhsd}), mk({RenAtom{z, fs[1]}, rhsd})});
      }
    return v;
  });

  // derived: R[w>d];d[a,b] ~ R[w>b];d[a,d]
  add("ids3", Transfer::None, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 3);
    for (const auto& w : alpha_names(g))
      for (const auto& d : apps_of(g, false, true)) {
        RuleApp lhsd = d.with_subscripts(fs[1], fs[2]);
        RuleApp rhsd = d.with_subscripts(fs[1], fs[0]);
        v.push_back({mk({RenAtom{w, fs[0]}, lhsd}), mk({RenAtom{w, fs[2]}, rhsd})});
      }
    return v;
  });

  // derived: d^U[a,b];d^U[c,d] ~= d^U[a,d];d^U[c,b]
  add("ddindex", Transfer::Both, [](const ChemGraph& g) {
    std::vector<IdentityInstance> v;
    auto fs = fresh_names(g, 4);
    for (const auto& d : apps_of(g, false, true)) {
      RuleApp d1 = d.with_subscripts(fs[0], fs[1]);
      RuleApp d2 = d.with_subscripts(fs[2], fs[3]);
      RuleApp e1 = d.with_subscripts(fs[0], fs[3]);
      RuleApp e2 = d.with_subscripts(fs[2], fs[1]);
      v.push_back({mk({d1, d2}), mk({e1, e2})});
    }
    return v;
  });

  return out;
}

struct SoundnessStats {
  long instances = 0;
  long checked = 0;   // pairs typed to the same target and compared
  long failures = 0;
  std::vector<std::string> examples;  // first few failures, printed
};

/// Replays one identity schema over one graph. For ~ identities, instances
/// where both sides type to the same target must have equal interpretations;
/// =< adds that a typable left side forces the right side to type to the same
/// target; ~= checks both directions.
inline void check_identity_on(const IdentitySchema& schema, const ChemGraph& g,
                              SoundnessStats& stats) {
  auto instances = schema.instances(g);
  for (const auto& inst : instances) {
    ++stats.instances;
    TypedTerm lt, rt;
    bool lok = elaborates(inst.lhs, g, &lt);
    bool rok = elaborates(inst.rhs, g, &rt);
    auto fail = [&](const std::string& why) {
      ++stats.failures;
      if (stats.examples.size() < 5)
        stats.examples.push_back(schema.name + ": " + print_term(inst.lhs) + "  vs  " +
                                 print_term(inst.rhs) + "  (" + why + ")");
    };
    if (lok && rok && lt.target() == rt.target()) {
      ++stats.checked;
      if (!(functor_image_sets(lt) == functor_image_sets(rt))) fail("images differ");
    }
    if ((schema.transfer == Transfer::LeftToRight || schema.transfer == Transfer::Both) && lok) {
      if (!rok)
        fail("right side fails to type");
      else if (!(lt.target() == rt.target()))
        fail("right side types to a different target");
    }
    if (schema.transfer == Transfer::Both && rok) {
      if (!lok)
        fail("left side fails to type");
      else if (!(lt.target() == rt.target()))
        fail("left side types to a different target");
    }
  }
}

}  // namespace oracle
}  // namespace disc
