// Acceptance suite: one pass/fail line per criterion, with pinned bounds.
// Exit status is the number of failed criteria.

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "disc/oracle_suites.hpp"

using namespace disc;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << idx << "] " << std::left << std::setw(34)
            << name << std::fixed << std::setprecision(2) << std::setw(9) << seconds << "s  "
            << detail << "\n";
  if (!pass) ++failures;
}

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Golden {
  ChemGraph A;
  Reaction r;
  UntypedTerm t29, t5;
};

Golden load_golden() {
  Golden g;
  g.A = parse_graphs(slurp("benzyl_reagents.graph"))[0].graph;
  g.r = parse_reaction(slurp("benzyl.reaction"));
  g.t29 = parse_term_file(slurp("example29.term")).terms.at(0);
  g.t5 = parse_term_file(slurp("nf5.term")).terms.at(0);
  return g;
}

}  // namespace

int main() {
  const auto golden = load_golden();
  const auto refCanonical = [&] {
    return print_term(canonicalize_nf(to_normal_form(elaborate(golden.t5, golden.A))).term.atoms);
  }();

  // 1. golden decomposition
  {
    auto start = Clock::now();
    bool pass = false;
    std::string detail;
    try {
      auto d = decompose(golden.r);
      auto nf = to_normal_form(d.term);
      auto ref = to_normal_form(elaborate(golden.t5, golden.A));
      bool equiv = nf_equivalent(nf, ref);
      std::string canon = print_term(canonicalize_nf(nf).term.atoms);
      pass = equiv && canon == refCanonical;
      detail = canon;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(1, "golden decomposition", pass && secs < 1.0, secs, detail);
  }

  // 2. golden normalization of the published 29-atom sequence
  {
    auto start = Clock::now();
    bool pass = false;
    std::string detail;
    try {
      auto nf = to_normal_form(elaborate(golden.t29, golden.A));
      std::string canon = print_term(canonicalize_nf(nf).term.atoms);
      pass = canon == refCanonical;
      detail = canon;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(2, "golden normalization", pass && secs < 1.0, secs, detail);
  }

  oracle::EnumOptions enumOpt;
  enumOpt.max_heavy = 4;
  enumOpt.max_alpha = 4;
  enumOpt.elements = {"H", "C", "O", "Cl", "Na"};

  // 3. rule-table oracle over the full enumeration
  {
    auto start = Clock::now();
    auto row = oracle::rule_table_suite(enumOpt);
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(3, "rule-table oracle", row.failures == 0 && secs < 300.0, secs,
           std::to_string(row.checked) + " applications; " + row.detail);
  }

  // 4. equation soundness over the enumeration (every identity involves at
  // most two rule atoms, so three heavy atoms plus three stubs already realize
  // every row-condition combination)
  {
    auto start = Clock::now();
    oracle::EnumOptions eqOpt = enumOpt;
    eqOpt.max_heavy = 3;
    eqOpt.max_alpha = 3;
    long instances = 0;
    auto row = oracle::equation_suite(eqOpt, &instances);
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(4, "equation soundness", row.failures == 0, secs,
           std::to_string(instances) + " instances, " + std::to_string(row.checked) +
               " same-type checks; " + row.detail);
  }

  // 5. functoriality and dagger compatibility on seeded random terms
  {
    auto start = Clock::now();
    std::mt19937_64 rng(2024);
    oracle::EnumOptions small = enumOpt;
    small.max_heavy = 3;
    small.max_alpha = 3;
    auto graphs = oracle::enumerate_graphs(small);
    std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
    long checked = 0, bad = 0;
    std::string detail;
    oracle::TermGenOptions tg;
    tg.max_len = 12;
    while (checked < 1000) {
      auto t = oracle::random_typable_term(graphs[pick(rng)], rng, tg);
      auto s = oracle::random_typable_term(t.target(), rng, tg);
      TypedTerm joined;
      joined.atoms = t.atoms;
      joined.graphs = t.graphs;
      for (std::size_t k = 0; k < s.atoms.size(); ++k) {
        joined.atoms.push_back(s.atoms[k]);
        joined.graphs.push_back(s.graphs[k + 1]);
      }
      ++checked;
      bool ok = eq_reaction(functor_image(joined), compose(functor_image(t), functor_image(s)));
      ok = ok && dagger_compat_check(t) && dagger_compat_check(joined);
      if (!ok) {
        ++bad;
        if (detail.empty()) detail = "failed on " + print_term(joined.atoms);
      }
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(5, "functoriality & dagger", bad == 0, secs,
           std::to_string(checked) + " samples; " + detail);
  }

  // 6. normalization preserves meaning and lands in normal form
  {
    auto start = Clock::now();
    std::mt19937_64 rng(2024);
    oracle::EnumOptions small = enumOpt;
    small.max_heavy = 3;
    small.max_alpha = 3;
    auto graphs = oracle::enumerate_graphs(small);
    std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
    long checked = 0, bad = 0;
    std::string detail;
    oracle::TermGenOptions tg;
    tg.max_len = 12;
    while (checked < 1000) {
      auto t = oracle::random_typable_term(graphs[pick(rng)], rng, tg);
      ++checked;
      try {
        auto nf = to_normal_form(t);
        bool ok = nf.term.source() == t.source() && nf.term.target() == t.target() &&
                  functor_image_sets(nf.term) == functor_image_sets(t) &&
                  normal_form_failures(nf.term).empty();
        if (!ok) {
          ++bad;
          if (detail.empty()) detail = "failed on " + print_term(t.atoms);
        }
      } catch (const std::exception& e) {
        ++bad;
        if (detail.empty()) detail = std::string(e.what()) + " on " + print_term(t.atoms);
      }
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(6, "normalization preserves meaning", bad == 0, secs,
           std::to_string(checked) + " samples; " + detail);
  }

  // 7. completeness sampling: the two equality deciders agree
  {
    auto start = Clock::now();
    oracle::EnumOptions small = enumOpt;
    small.max_heavy = 2;
    small.max_alpha = 3;
    std::vector<std::string> dumps;
    auto row = oracle::completeness_suite(small, 2024, 500, &dumps);
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    for (const auto& d : dumps) std::cerr << "decider disagreement:\n" << d << "\n";
    report(7, "completeness sampling", row.failures == 0, secs,
           std::to_string(row.checked) + " pairs; " + row.detail);
  }

  // 8. universality round-trip over enumerated reactions whose changed region
  // has at most three heavy atoms (each side paired with every same-formula
  // partner, alone and next to an untouched spectator)
  {
    auto start = Clock::now();
    oracle::EnumOptions small = enumOpt;
    small.max_heavy = 3;
    small.max_alpha = 2;
    auto row = oracle::universality_suite(small);
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    report(8, "universality round-trip", row.failures == 0 && secs < 600.0, secs,
           std::to_string(row.checked) + " reactions; " + row.detail);
  }

  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "\n";
  return failures;
}
