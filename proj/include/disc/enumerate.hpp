#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "disc/normalize.hpp"
#include "disc/reaction.hpp"
#include "disc/rules.hpp"
#include "disc/semantics.hpp"

namespace disc {
namespace oracle {

struct EnumOptions {
  int max_heavy = 3;
  int max_alpha = 2;
  std::vector<std::string> elements = {"H", "C", "O", "Cl", "Na"};
  AtomTable table = AtomTable::defaults();
};

namespace detail {

inline std::string heavy_prefix(const std::string& element) {
  if (element == "Cl") return "l";
  if (element == "Na") return "n";
  std::string p;
  p += static_cast<char>(std::tolower(static_cast<unsigned char>(element[0])));
  return p;
}

struct Shell {
  std::vector<std::string> names;
  std::vector<std::string> elements;  // per vertex
  std::vector<int> valence;
};

// All ways to pick a multiset of heavy elements of the given size.
inline void element_multisets(const std::vector<std::string>& elements, int size, int from,
                              std::vector<std::string>& cur,
                              const std::function<void(const std::vector<std::string>&)>& yield) {
  if (size == 0) {
    yield(cur);
    return;
  }
  for (int i = from; i < static_cast<int>(elements.size()); ++i) {
    cur.push_back(elements[i]);
    element_multisets(elements, size - 1, i, cur, yield);
    cur.pop_back();
  }
}

// Recursive assignment of the bond labels over vertex pairs with exact
// covalent-degree targets. Ionic bonds are placed between oppositely charged
// chemical vertices that do not yet have an ionic partner.
inline void assign_bonds(ChemGraph& g, const Shell& sh, const std::vector<int>& residual,
                         const std::vector<int>& charges, std::size_t pi, std::size_t pj,
                         std::vector<bool>& hasIon,
                         const std::function<void(const ChemGraph&)>& yield) {
  const std::size_t n = sh.names.size();
  // advance to the next pair
  std::size_t i = pi, j = pj;
  while (i < n && j >= n) {
    ++i;
    j = i + 1;
  }
  if (i >= n || i + 1 >= n) {
    for (std::size_t k = 0; k < n; ++k)
      if (residual[k] != 0) return;
    yield(g);
    return;
  }

  const bool ialpha = sh.elements[i] == kAlpha;
  const bool jalpha = sh.elements[j] == kAlpha;

  // Remaining capacity prune: vertex i can still shed at most 4 per later pair.
  // (cheap and sound: if residual[i] > 4 * (pairs left that involve i), fail)
  {
    int left = static_cast<int>(n - 1 - j) + 1;
    if (residual[i] > 4 * left) return;
  }

  auto recurse = [&](std::size_t ni, std::size_t nj) {
    assign_bonds(g, sh, residual, charges, ni, nj, hasIon, yield);
  };

  // no bond
  recurse(i, j + 1);

  // covalent bonds
  int maxk = std::min(residual[i], residual[j]);
  if (ialpha || jalpha) maxk = std::min(maxk, 1);
  if (ialpha && jalpha) maxk = 0;  // stubs never bond each other
  for (int k = 1; k <= maxk && k <= 4; ++k) {
    // a stub takes at most one neighbour in total
    if (ialpha && residual[i] != 1) break;
    if (jalpha && residual[j] != 1) break;
    std::vector<int> res = residual;
    res[i] -= k;
    res[j] -= k;
    g.set_bond(sh.names[i], sh.names[j], BondLabel::covalent(k));
    assign_bonds(g, sh, res, charges, i, j + 1, hasIon, yield);
    g.set_bond(sh.names[i], sh.names[j], BondLabel{});
  }

  // ionic bond
  if (!ialpha && !jalpha && !hasIon[i] && !hasIon[j] && charges[i] != 0 &&
      charges[i] == -charges[j]) {
    g.set_bond(sh.names[i], sh.names[j], BondLabel::ionic());
    hasIon[i] = hasIon[j] = true;
    recurse(i, j + 1);
    hasIon[i] = hasIon[j] = false;
    g.set_bond(sh.names[i], sh.names[j], BondLabel{});
  }
}

inline void charges_rec(const Shell& sh, std::size_t at, std::vector<int>& charges,
                        const std::function<void(const std::vector<int>&)>& yield) {
  if (at == sh.names.size()) {
    yield(charges);
    return;
  }
  if (sh.elements[at] == kAlpha) {
    // stub charges follow from bonding; enumerate both and let validity filter
    for (int c : {0, -1}) {
      charges[at] = c;
      charges_rec(sh, at + 1, charges, yield);
    }
    return;
  }
  for (int c = -sh.valence[at]; c <= sh.valence[at]; ++c) {
    // same-element runs: nonincreasing charges kill permuted duplicates
    if (at > 0 && sh.elements[at - 1] == sh.elements[at] && charges[at - 1] < c) continue;
    charges[at] = c;
    charges_rec(sh, at + 1, charges, yield);
  }
}

}  // namespace detail

/// Streams every valid chemical graph over the requested element budget.
/// Vertices get deterministic names (h0, c0, ..., x0 for stubs). Graphs that
/// differ only by permuting equal-charge same-element vertices are partially
/// deduplicated; the stream is deterministic.
inline void enumerate_graphs(const EnumOptions& opt,
                             const std::function<void(const ChemGraph&)>& yield) {
  for (int heavy = 0; heavy <= opt.max_heavy; ++heavy) {
    std::vector<std::string> cur;
    detail::element_multisets(opt.elements, heavy, 0, cur, [&](const std::vector<std::string>&
                                                                   multiset) {
      for (int alphas = 0; alphas <= opt.max_alpha; ++alphas) {
        detail::Shell sh;
        std::map<std::string, int> counters;
        for (const auto& e : multiset) {
          sh.names.push_back(detail::heavy_prefix(e) + std::to_string(counters[e]++));
          sh.elements.push_back(e);
          sh.valence.push_back(*opt.table.valence(e));
        }
        for (int k = 0; k < alphas; ++k) {
          sh.names.push_back("x" + std::to_string(k));
          sh.elements.push_back(kAlpha);
          sh.valence.push_back(1);
        }
        if (sh.names.empty()) {
          if (heavy == 0 && alphas == 0) yield(ChemGraph{});
          continue;
        }
        std::vector<int> charges(sh.names.size(), 0);
        detail::charges_rec(sh, 0, charges, [&](const std::vector<int>& cs) {
          // residual covalent degrees must have an even sum
          long sum = 0;
          std::vector<int> residual(sh.names.size());
          for (std::size_t i = 0; i < sh.names.size(); ++i) {
            residual[i] = sh.valence[i] - std::abs(cs[i]);
            if (residual[i] < 0) return;
            sum += residual[i];
          }
          if (sum % 2 != 0) return;
          ChemGraph g;
          for (std::size_t i = 0; i < sh.names.size(); ++i)
            g.add_vertex(sh.names[i], sh.elements[i], cs[i]);
          std::vector<bool> hasIon(sh.names.size(), false);
          detail::assign_bonds(g, sh, residual, cs, 0, 1, hasIon, [&](const ChemGraph& done) {
            if (validate(done, opt.table).ok()) yield(done);
          });
        });
      }
    });
  }
}

inline std::vector<ChemGraph> enumerate_graphs(const EnumOptions& opt) {
  std::vector<ChemGraph> out;
  enumerate_graphs(opt, [&](const ChemGraph& g) { out.push_back(g); });
  return out;
}

/// All rule applications whose domain contains g, in both directions. Fresh
/// stub names for disconnections are canonical ("f0", "f1"). Candidates are
/// read off the graph structure; a final domain_check guards each one.
inline std::vector<RuleApp> enumerate_ruleapps(const ChemGraph& g) {
  std::vector<RuleApp> out;
  std::string f0 = "f0", f1 = "f1";
  while (g.has_vertex(f0)) f0 += "f";
  while (g.has_vertex(f1) || f1 == f0) f1 += "f";
  auto add = [&](RuleApp r) {
    if (domain_check(r, g).in_domain) out.push_back(std::move(r));
  };

  std::vector<std::string> chem;
  std::vector<std::string> isolatedNeg;                         // (α,-1), no bonds
  std::map<std::string, std::vector<std::string>> stubsOf;      // chem -> bonded (α,0) stubs
  std::map<std::string, int> ionCount, bondCount;
  for (const auto& [k, b] : g.bonds()) {
    ++bondCount[k.first];
    ++bondCount[k.second];
    if (b.is_ionic()) {
      ++ionCount[k.first];
      ++ionCount[k.second];
    }
  }
  for (const auto& [n, lbl] : g.vertices()) {
    if (lbl.element != kAlpha) {
      chem.push_back(n);
    } else if (lbl.charge == -1 && bondCount[n] == 0) {
      isolatedNeg.push_back(n);
    }
  }
  for (const auto& [k, b] : g.bonds()) {
    if (b != BondLabel::covalent(1)) continue;
    const auto& x = k.first;
    const auto& y = k.second;
    if (g.is_alpha(x) && !g.is_alpha(y) && g.charge(x) == 0 && bondCount[x] == 1)
      stubsOf[y].push_back(x);
    if (g.is_alpha(y) && !g.is_alpha(x) && g.charge(y) == 0 && bondCount[y] == 1)
      stubsOf[x].push_back(y);
  }

  for (const auto& u : chem) {
    if (ionCount[u]) continue;
    if (g.charge(u) < 0) add(RuleApp::eneg(u, f0, f1));
    if (g.charge(u) >= 0)
      for (const auto& x : g.cov_neighbours(u))
        if (g.is_alpha(x)) add(RuleApp::enonneg(u, x));
    if (g.charge(u) <= 0)
      for (const auto& a : stubsOf[u])
        for (const auto& b : isolatedNeg)
          if (b != a) add(RuleApp::eneg(u, a, b, Direction::Connect));
    if (g.charge(u) > 0)
      for (const auto& v : isolatedNeg) add(RuleApp::enonneg(u, v, Direction::Connect));
  }

  for (const auto& [k, b] : g.bonds()) {
    if (b.is_ionic()) {
      const auto& pos = g.charge(k.first) > 0 ? k.first : k.second;
      const auto& neg = pos == k.first ? k.second : k.first;
      add(RuleApp::ion(pos, neg));
    } else if (b.cov() >= 1 && g.is_chem(k.first) && g.is_chem(k.second)) {
      add(RuleApp::cov(k.first, k.second, f0, f1));
    }
  }

  for (std::size_t i = 0; i < chem.size(); ++i)
    for (std::size_t j = 0; j < chem.size(); ++j) {
      const auto& u = chem[i];
      const auto& v = chem[j];
      if (u == v) continue;
      // ionic formation wants the positive partner first
      if (i < j && g.charge(u) > 0 && g.charge(v) == -g.charge(u) && !ionCount[u] &&
          !ionCount[v] && g.bond(u, v).none())
        add(RuleApp::ion(u, v, Direction::Connect));
      if (i < j && g.charge(v) > 0 && g.charge(u) == -g.charge(v) && !ionCount[u] &&
          !ionCount[v] && g.bond(u, v).none())
        add(RuleApp::ion(v, u, Direction::Connect));
      if (u < v && !g.bond(u, v).is_ionic() && g.bond(u, v).cov() <= 3)
        for (const auto& a : stubsOf[u])
          for (const auto& bb : stubsOf[v]) add(RuleApp::cov(u, v, a, bb, Direction::Connect));
    }
  return out;
}

// -- random typable terms --------------------------------------------------------

struct TermGenOptions {
  int max_len = 12;
  int fresh_budget = 6;
};

/// Random typable term from src: each step samples an applicable atom, biased
/// toward rules, with preconditions read off the running graph.
inline TypedTerm random_typable_term(const ChemGraph& src, std::mt19937_64& rng,
                                     const TermGenOptions& opt = {}) {
  TypedTerm t;
  t.atoms = {};
  t.graphs = {src};
  std::uniform_int_distribution<int> lenDist(0, opt.max_len);
  const int len = lenDist(rng);
  int freshCount = 0;
  for (int step = 0; step < len; ++step) {
    const ChemGraph& g = t.graphs.back();
    std::vector<TermAtom> options;
    for (auto& r : enumerate_ruleapps(g)) {
      // fresh stubs come from a reserved pool to avoid collisions
      if (!r.is_connect() && !r.subscripts().empty()) {
        if (freshCount + 2 > opt.fresh_budget) continue;
        r = r.with_subscripts("w" + std::to_string(freshCount), "w" + std::to_string(freshCount + 1));
        if (g.has_vertex(r.a()) || g.has_vertex(r.b())) continue;
      }
      options.push_back(r);
    }
    for (const auto& [n, lbl] : g.vertices()) {
      options.push_back(TouchAtom{n});
      if (lbl.element == kAlpha) {
        options.push_back(RenAtom{n, "r" + std::to_string(freshCount)});
      }
    }
    if (options.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    TermAtom a = options[pick(rng)];
    if (is_rule(a) && !std::get<RuleApp>(a).is_connect() &&
        !std::get<RuleApp>(a).subscripts().empty())
      freshCount += 2;
    if (auto* r = std::get_if<RenAtom>(&a)) {
      if (t.graphs.back().has_vertex(r->to)) continue;
      ++freshCount;
    }
    try {
      ChemGraph next = step_atom(a, t.graphs.back());
      t.atoms.push_back(a);
      t.graphs.push_back(std::move(next));
    } catch (const std::exception&) {
      // sampled option raced a name; skip
    }
  }
  return t;
}

}  // namespace oracle
}  // namespace disc
