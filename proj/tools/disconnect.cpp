// Command-line surface for the disconnection-rule toolkit: validation, rule
// application, typing, normalization, term equality, interpretation,
// reaction algebra, decomposition and the brute-force oracle suites.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "disc/axioms.hpp"
#include "disc/enumerate.hpp"
#include "disc/normalize.hpp"
#include "disc/oracle_suites.hpp"
#include "disc/reaction.hpp"
#include "disc/semantics.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& text, const std::string& outPath) {
  if (outPath.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(outPath);
  if (!out) throw std::runtime_error("cannot write " + outPath);
  out << text;
}

disc::AtomTable load_table(const std::string& path) {
  if (path.empty()) return disc::AtomTable::defaults();
  return disc::AtomTable::parse(slurp(path));
}

// Picks the graph a term file binds to (by its "source <name>" header) or the
// first block of the graph file.
disc::ChemGraph pick_source(const disc::TermFile& tf, const std::string& graphPath) {
  auto blocks = disc::parse_graphs(slurp(graphPath));
  if (blocks.empty()) throw std::runtime_error("no graph blocks in " + graphPath);
  if (tf.source_name) {
    for (auto& b : blocks)
      if (b.name == *tf.source_name) return b.graph;
    throw std::runtime_error("graph " + *tf.source_name + " not found in " + graphPath);
  }
  return blocks.front().graph;
}

void print_trace(const disc::Trace& tr, std::ostream& os) {
  for (const auto& e : tr) os << "# " << e.rule << " @ " << e.pos << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disconnection rules, reactions and normal forms"};
  app.require_subcommand(1);

  std::string graphFile, termFileA, termFileB, reactionA, reactionB, out, tablePath, ruleText;
  bool traceFlag = false, canonicalFlag = false, jsonFlag = false;
  unsigned long long seed = 7;
  int maxHeavy = 3, maxAlpha = 2;

  auto* validateCmd = app.add_subcommand("validate", "check chemical-graph validity");
  validateCmd->add_option("graph", graphFile)->required();
  validateCmd->add_option("--valence-table", tablePath);
  validateCmd->add_flag("--json", jsonFlag);

  auto* applyCmd = app.add_subcommand("apply", "apply one rule to a graph");
  applyCmd->add_option("graph", graphFile)->required();
  applyCmd->add_option("rule", ruleText)->required();
  applyCmd->add_option("-o,--output", out);
  applyCmd->add_option("--valence-table", tablePath);

  auto* typecheckCmd = app.add_subcommand("typecheck", "elaborate a term against its source");
  typecheckCmd->add_option("term", termFileA)->required();
  typecheckCmd->add_option("--source", graphFile)->required();
  typecheckCmd->add_option("-o,--output", out);

  auto* normalizeCmd = app.add_subcommand("normalize", "normal form of a term");
  normalizeCmd->add_option("term", termFileA)->required();
  normalizeCmd->add_option("--source", graphFile)->required();
  normalizeCmd->add_flag("--canonical", canonicalFlag);
  normalizeCmd->add_flag("--trace", traceFlag);
  normalizeCmd->add_option("-o,--output", out);

  auto* eqCmd = app.add_subcommand("eq", "decide equality of two terms");
  eqCmd->add_option("a", termFileA)->required();
  eqCmd->add_option("b", termFileB)->required();
  eqCmd->add_option("--source", graphFile)->required();
  eqCmd->add_flag("--json", jsonFlag);

  auto* imageCmd = app.add_subcommand("image", "interpret a term as a reaction");
  imageCmd->add_option("term", termFileA)->required();
  imageCmd->add_option("--source", graphFile)->required();
  imageCmd->add_option("-o,--output", out);

  auto* composeCmd = app.add_subcommand("compose", "compose two reactions");
  composeCmd->add_option("r", reactionA)->required();
  composeCmd->add_option("s", reactionB)->required();
  composeCmd->add_option("-o,--output", out);

  auto* daggerCmd = app.add_subcommand("dagger", "reverse a reaction");
  daggerCmd->add_option("r", reactionA)->required();
  daggerCmd->add_option("-o,--output", out);

  auto* decomposeCmd = app.add_subcommand("decompose", "decompose a reaction into a term");
  decomposeCmd->add_option("r", reactionA)->required();
  decomposeCmd->add_option("-o,--output", out);

  auto* roundtripCmd = app.add_subcommand("roundtrip", "decompose and recompose a reaction");
  roundtripCmd->add_option("r", reactionA)->required();

  auto* oracleCmd = app.add_subcommand("oracle", "run the brute-force suites");
  oracleCmd->add_option("--seed", seed);
  oracleCmd->add_option("--max-vertices", maxHeavy, "heavy-atom bound for the enumeration");
  oracleCmd->add_option("--max-alpha", maxAlpha);
  oracleCmd->add_flag("--json", jsonFlag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit with 2
  }

  try {
    disc::AtomTable table = load_table(tablePath);

    if (app.got_subcommand(validateCmd)) {
      auto blocks = disc::parse_graphs(slurp(graphFile));
      bool allOk = true;
      json report = json::array();
      for (const auto& b : blocks) {
        auto rep = disc::validate(b.graph, table);
        if (jsonFlag) {
          json jb{{"graph", b.name}, {"ok", rep.ok()}};
          jb["violations"] = json::array();
          for (const auto& v : rep.violations)
            jb["violations"].push_back(
                {{"condition", v.condition}, {"vertices", v.vertices}, {"detail", v.detail}});
          report.push_back(jb);
        } else {
          std::cout << b.name << ": " << (rep.ok() ? "ok" : "invalid") << "\n";
          if (!rep.ok()) std::cout << rep.to_string();
        }
        allOk = allOk && rep.ok();
      }
      if (jsonFlag) std::cout << report.dump(2) << "\n";
      return allOk ? 0 : 1;
    }

    if (app.got_subcommand(applyCmd)) {
      auto g = disc::parse_graph(slurp(graphFile));
      auto term = disc::parse_term(ruleText);
      if (term.atoms.size() != 1 || !disc::is_rule(term.atoms[0]))
        throw std::runtime_error("apply expects exactly one rule atom");
      const auto& rule = std::get<disc::RuleApp>(term.atoms[0]);
      auto rep = disc::domain_check(rule, g);
      if (!rep.in_domain) {
        std::cerr << "not in domain: " << rep.reason << "\n";
        return 1;
      }
      write_out(disc::print_graph(disc::apply_rule(rule, g), "result"), out);
      return 0;
    }

    if (app.got_subcommand(typecheckCmd)) {
      auto tf = disc::parse_term_file(slurp(termFileA));
      auto src = pick_source(tf, graphFile);
      for (const auto& t : tf.terms) {
        try {
          auto tt = disc::elaborate(t, src);
          write_out(disc::print_graph(tt.target(), "target"), out);
        } catch (const disc::type_error& e) {
          std::cerr << e.what() << "\n";
          return 1;
        }
      }
      return 0;
    }

    if (app.got_subcommand(normalizeCmd)) {
      auto tf = disc::parse_term_file(slurp(termFileA));
      auto src = pick_source(tf, graphFile);
      std::ostringstream result;
      for (const auto& t : tf.terms) {
        disc::Trace trace;
        auto nf = disc::to_normal_form(disc::elaborate(t, src), traceFlag ? &trace : nullptr);
        if (canonicalFlag) nf = disc::canonicalize_nf(nf);
        if (traceFlag) print_trace(trace, result);
        result << disc::print_term(nf.term.atoms) << "\n";
      }
      write_out(result.str(), out);
      return 0;
    }

    if (app.got_subcommand(eqCmd)) {
      auto ta = disc::parse_term_file(slurp(termFileA));
      auto tb = disc::parse_term_file(slurp(termFileB));
      auto src = pick_source(ta, graphFile);
      if (ta.terms.size() != 1 || tb.terms.size() != 1)
        throw std::runtime_error("eq expects one term per file");
      auto d = disc::eq_terms_detail(ta.terms[0], tb.terms[0], src);
      if (jsonFlag) {
        std::cout << json{{"equal", d.semantic},
                          {"semantic", d.semantic},
                          {"syntactic", d.syntactic},
                          {"deciders_agree", d.agree()}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << (d.semantic ? "equal" : "unequal") << "\n";
        std::cout << "semantic: " << (d.semantic ? "equal" : "unequal")
                  << ", syntactic: " << (d.syntactic ? "equal" : "unequal")
                  << ", deciders " << (d.agree() ? "agree" : "DISAGREE") << "\n";
      }
      return d.agree() ? 0 : 1;
    }

    if (app.got_subcommand(imageCmd)) {
      auto tf = disc::parse_term_file(slurp(termFileA));
      auto src = pick_source(tf, graphFile);
      std::ostringstream result;
      for (const auto& t : tf.terms)
        result << disc::print_reaction(disc::functor_image(disc::elaborate(t, src)));
      write_out(result.str(), out);
      return 0;
    }

    if (app.got_subcommand(composeCmd)) {
      auto r = disc::parse_reaction(slurp(reactionA));
      auto s = disc::parse_reaction(slurp(reactionB));
      write_out(disc::print_reaction(disc::compose(r, s)), out);
      return 0;
    }

    if (app.got_subcommand(daggerCmd)) {
      auto r = disc::parse_reaction(slurp(reactionA));
      write_out(disc::print_reaction(disc::dagger(r)), out);
      return 0;
    }

    if (app.got_subcommand(decomposeCmd)) {
      auto r = disc::parse_reaction(slurp(reactionA));
      auto rep = disc::validate_reaction(r);
      if (!rep.ok) {
        std::cerr << "invalid reaction: " << rep.clause << ": " << rep.message << "\n";
        return 1;
      }
      auto d = disc::decompose(r);
      std::ostringstream result;
      result << disc::print_term(d.term.atoms) << "\n";
      result << "iota";
      for (const auto& [x, y] : d.iota) result << " " << x << ":" << y;
      result << "\n";
      write_out(result.str(), out);
      return 0;
    }

    if (app.got_subcommand(roundtripCmd)) {
      auto r = disc::parse_reaction(slurp(reactionA));
      auto rep = disc::validate_reaction(r);
      if (!rep.ok) {
        std::cerr << "invalid reaction: " << rep.clause << ": " << rep.message << "\n";
        return 1;
      }
      bool ok = disc::roundtrip_check(r);
      std::cout << (ok ? "pass" : "fail") << "\n";
      return ok ? 0 : 1;
    }

    if (app.got_subcommand(oracleCmd)) {
      disc::oracle::EnumOptions opt;
      opt.max_heavy = maxHeavy;
      opt.max_alpha = maxAlpha;
      auto summary = disc::oracle::run_all_suites(opt, seed);
      if (jsonFlag) {
        json j = json::array();
        for (const auto& row : summary.rows)
          j.push_back({{"suite", row.suite},
                       {"checked", row.checked},
                       {"failures", row.failures},
                       {"detail", row.detail}});
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << summary.table();
      }
      return summary.ok() ? 0 : 1;
    }
  } catch (const disc::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
