#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "disc/axioms.hpp"
#include "disc/enumerate.hpp"
#include "disc/normalize.hpp"
#include "disc/semantics.hpp"

namespace disc {
namespace oracle {

struct SuiteRow {
  std::string suite;
  long checked = 0;
  long failures = 0;
  std::string detail;
};

struct SuiteSummary {
  std::vector<SuiteRow> rows;
  bool ok() const {
    for (const auto& r : rows)
      if (r.failures) return false;
    return true;
  }
  std::string table() const {
    std::ostringstream out;
    out << std::left << std::setw(28) << "suite" << std::setw(12) << "checked" << std::setw(10)
        << "failures" << "detail\n";
    for (const auto& r : rows)
      out << std::left << std::setw(28) << r.suite << std::setw(12) << r.checked << std::setw(10)
          << r.failures << r.detail << "\n";
    return out.str();
  }
};

/// Rule-table suite: every in-domain application on every enumerated graph
/// yields a valid chemical graph and round-trips exactly through its inverse
/// (which is a left inverse, so the rule is injective on the whole domain).
/// Injectivity is additionally cross-checked pairwise on the small prefix of
/// the enumeration, where keeping the outputs is affordable.
inline SuiteRow rule_table_suite(const EnumOptions& opt) {
  SuiteRow row{"rule-table", 0, 0, ""};
  std::map<std::pair<std::string, std::string>, std::string> seen;  // (rule, output) -> input
  const std::size_t kPairwiseCap = 9;  // vertex-count bound for the stored cross-check
  enumerate_graphs(opt, [&](const ChemGraph& g) {
    std::string gp;
    for (const auto& r : enumerate_ruleapps(g)) {
      ++row.checked;
      ChemGraph h = apply_rule(r, g);
      if (!validate(h, opt.table).ok()) {
        ++row.failures;
        if (row.detail.empty()) row.detail = "invalid output for " + to_string(r);
        continue;
      }
      ChemGraph back = apply_rule(r.invert(), h);
      if (!(back == g)) {
        ++row.failures;
        if (row.detail.empty()) row.detail = "round-trip failed for " + to_string(r);
      }
      if (g.size() + 2 <= kPairwiseCap && g.size() <= 4) {
        if (gp.empty()) gp = print_graph(g);
        auto [it, inserted] =
            seen.emplace(std::make_pair(to_string(r), print_graph(h)), gp);
        if (!inserted && it->second != gp) {
          ++row.failures;
          if (row.detail.empty()) row.detail = "injectivity failed for " + to_string(r);
        }
      }
    }
  });
  return row;
}

/// Category-law suite: associativity and unit laws of reaction composition and
/// the contravariant involution, on composable triples built from term images.
inline SuiteRow composition_suite(const EnumOptions& opt, unsigned long long seed,
                                  int samples = 400) {
  SuiteRow row{"composition", 0, 0, ""};
  std::mt19937_64 rng(seed);
  auto graphs = enumerate_graphs(opt);
  if (graphs.empty()) return row;
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  TermGenOptions tg;
  tg.max_len = 5;
  for (int s = 0; s < samples; ++s) {
    const ChemGraph& a = graphs[pick(rng)];
    TypedTerm t1 = random_typable_term(a, rng, tg);
    TypedTerm t2 = random_typable_term(t1.target(), rng, tg);
    TypedTerm t3 = random_typable_term(t2.target(), rng, tg);
    Reaction r = functor_image(t1), s2 = functor_image(t2), t = functor_image(t3);
    ++row.checked;
    bool ok = eq_reaction(compose(compose(r, s2), t), compose(r, compose(s2, t)));
    ok = ok && eq_reaction(compose(identity(r.source()), r), r);
    ok = ok && eq_reaction(compose(r, identity(r.target())), r);
    ok = ok && eq_reaction(dagger(compose(r, s2)), compose(dagger(s2), dagger(r)));
    ok = ok && eq_reaction(dagger(dagger(r)), r);
    auto rep = validate_reaction(compose(r, s2));
    ok = ok && rep.ok;
    if (!ok) {
      ++row.failures;
      if (row.detail.empty()) row.detail = "law failed at sample " + std::to_string(s);
    }
  }
  return row;
}

/// Equation-soundness suite over the axiom schemas.
inline SuiteRow equation_suite(const EnumOptions& opt, long* instances_out = nullptr) {
  SuiteRow row{"equation-soundness", 0, 0, ""};
  auto schemas = identity_schemas();
  std::vector<SoundnessStats> stats(schemas.size());
  enumerate_graphs(opt, [&](const ChemGraph& g) {
    for (std::size_t i = 0; i < schemas.size(); ++i) check_identity_on(schemas[i], g, stats[i]);
  });
  long inst = 0;
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    row.checked += stats[i].checked;
    row.failures += stats[i].failures;
    inst += stats[i].instances;
    if (stats[i].failures && row.detail.empty()) row.detail = stats[i].examples.front();
  }
  if (instances_out) *instances_out = inst;
  return row;
}

/// Completeness sampling: on random pairs sharing endpoints, the semantic
/// decider (equal interpretations) and the syntactic decider (identical
/// canonical normal forms) must coincide.
inline SuiteRow completeness_suite(const EnumOptions& opt, unsigned long long seed, int pairs = 500,
                                   std::vector<std::string>* dumps = nullptr) {
  SuiteRow row{"completeness", 0, 0, ""};
  std::mt19937_64 rng(seed);
  auto graphs = enumerate_graphs(opt);
  if (graphs.empty()) return row;
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  TermGenOptions tg;
  tg.max_len = 8;

  while (row.checked < pairs) {
    const ChemGraph& a = graphs[pick(rng)];
    TypedTerm t = random_typable_term(a, rng, tg);
    UntypedTerm ut = t.untyped();
    UntypedTerm us;
    // three pair constructions: an equal variant (normal form), a palindrome
    // extension (equal), and an extra-touch variant (equal only when the
    // touched vertex already takes part)
    switch (row.checked % 3) {
      case 0:
        us = to_normal_form(t).term.untyped();
        break;
      case 1: {
        TypedTerm ext = random_typable_term(t.target(), rng, tg);
        us = ut;
        for (const auto& x : ext.atoms) us.atoms.push_back(x);
        UntypedTerm back = bar(ext.untyped());
        for (const auto& x : back.atoms) us.atoms.push_back(x);
        break;
      }
      default: {
        us = ut;
        if (t.target().empty()) continue;
        auto names = t.target().vertex_names();
        std::uniform_int_distribution<std::size_t> pn(0, names.size() - 1);
        auto it = names.begin();
        std::advance(it, pn(rng));
        us.atoms.push_back(TouchAtom{*it});
        break;
      }
    }
    TypedTerm s;
    if (!elaborates(us, a, &s)) continue;
    if (!(s.target() == t.target())) continue;
    ++row.checked;
    auto d = eq_terms_detail(ut, us, a);
    if (!d.agree()) {
      ++row.failures;
      if (row.detail.empty())
        row.detail = "deciders disagree on " + print_term(ut) + " vs " + print_term(us);
      if (dumps) {
        dumps->push_back("source:\n" + print_graph(a) + "t: " + print_term(ut) +
                         "\ns: " + print_term(us));
      }
    }
  }
  return row;
}

/// Universality suite: decompose-then-recompose round-trips on an enumerated
/// family of reactions (whole-graph changed regions between same-formula
/// endpoint pairs, plus copies extended by an untouched context).
inline SuiteRow universality_suite(const EnumOptions& opt, long limit = 0) {
  SuiteRow row{"universality", 0, 0, ""};
  auto graphs = enumerate_graphs(opt);

  auto formula = [](const ChemGraph& g) {
    std::map<std::string, int> f;
    for (const auto& [n, lbl] : g.vertices())
      if (lbl.element != kAlpha) ++f[lbl.element];
    std::ostringstream out;
    for (const auto& [e, k] : f) out << e << k;
    out << "|" << net_charge(g);
    return out.str();
  };
  std::map<std::string, std::vector<const ChemGraph*>> byFormula;
  for (const auto& g : graphs) byFormula[formula(g)].push_back(&g);

  ChemGraph context;  // a fixed disjoint spectator molecule
  context.add_vertex("ctxa", "H");
  context.add_vertex("ctxb", "H");
  context.set_bond("ctxa", "ctxb", BondLabel::covalent(1));

  for (const auto& [key, gs] : byFormula) {
    for (const ChemGraph* A : gs)
      for (const ChemGraph* C : gs) {
        if (limit && row.checked >= limit) return row;
        // pair chemical vertices per element, in name order
        std::map<std::string, std::string> b;
        {
          std::map<std::string, std::vector<std::string>> ea, ec;
          for (const auto& [n, lbl] : A->vertices())
            if (lbl.element != kAlpha) ea[lbl.element].push_back(n);
          for (const auto& [n, lbl] : C->vertices())
            if (lbl.element != kAlpha) ec[lbl.element].push_back(n);
          for (auto& [e, va] : ea)
            for (std::size_t i = 0; i < va.size(); ++i) b[va[i]] = ec[e][i];
        }
        Reaction r = Reaction::unchecked(*A, *C, A->vertex_names(), C->vertex_names(), b, {});
        if (!validate_reaction(r).ok) continue;
        ++row.checked;
        if (!roundtrip_check(r)) {
          ++row.failures;
          if (row.detail.empty()) row.detail = "round-trip failed for a " + key + " reaction";
          continue;
        }
        // the same reaction next to an untouched context exercises i
        ChemGraph A2 = *A, C2 = *C;
        for (const auto& [n, lbl] : context.vertices()) {
          A2.add_vertex(n, lbl.element, lbl.charge);
          C2.add_vertex(n, lbl.element, lbl.charge);
        }
        for (const auto& [k2, bl] : context.bonds()) {
          A2.set_bond(k2.first, k2.second, bl);
          C2.set_bond(k2.first, k2.second, bl);
        }
        std::map<std::string, std::string> i;
        for (const auto& [n, lbl] : context.vertices()) i[n] = n;
        Reaction r2 =
            Reaction::unchecked(A2, C2, A->vertex_names(), C->vertex_names(), b, i);
        if (validate_reaction(r2).ok) {
          ++row.checked;
          if (!roundtrip_check(r2)) {
            ++row.failures;
            if (row.detail.empty()) row.detail = "context round-trip failed";
          }
        }
      }
  }
  return row;
}

inline SuiteSummary run_all_suites(const EnumOptions& opt, unsigned long long seed) {
  SuiteSummary s;
  s.rows.push_back(rule_table_suite(opt));
  s.rows.push_back(composition_suite(opt, seed));
  s.rows.push_back(equation_suite(opt));
  s.rows.push_back(completeness_suite(opt, seed));
  EnumOptions small = opt;
  small.max_heavy = std::min(opt.max_heavy, 2);
  small.max_alpha = std::min(opt.max_alpha, 2);
  s.rows.push_back(universality_suite(small, 4000));
  return s;
}

}  // namespace oracle
}  // namespace disc
