#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>

#include "disc/graph.hpp"

namespace disc {

struct ReactionReport {
  bool ok = true;
  std::string clause;  // first failing clause: "graphs", "net-charge", "bijection",
                       // "labels", "complement-iso", "boundary"
  std::string message;
};

/// A formal reaction (U_A, U_B, b, i) between two chemical graphs: changed
/// regions of equal net charge, an element-preserving bijection b on their
/// chemical parts, and an isomorphism i of the untouched complements that
/// also matches every bond crossing the boundary.
class Reaction {
 public:
  Reaction() = default;

  /// Builds without validating; tests use this to construct broken tuples.
  static Reaction unchecked(ChemGraph source, ChemGraph target, std::set<std::string> uA,
                            std::set<std::string> uB, std::map<std::string, std::string> b,
                            std::map<std::string, std::string> i) {
    Reaction r;
    r.source_ = std::move(source);
    r.target_ = std::move(target);
    r.uA_ = std::move(uA);
    r.uB_ = std::move(uB);
    r.b_ = std::move(b);
    r.i_ = std::move(i);
    return r;
  }

  /// Builds and validates; throws std::invalid_argument with the report on failure.
  static Reaction checked(ChemGraph source, ChemGraph target, std::set<std::string> uA,
                          std::set<std::string> uB, std::map<std::string, std::string> b,
                          std::map<std::string, std::string> i);

  const ChemGraph& source() const { return source_; }
  const ChemGraph& target() const { return target_; }
  const std::set<std::string>& uA() const { return uA_; }
  const std::set<std::string>& uB() const { return uB_; }
  const std::map<std::string, std::string>& b() const { return b_; }
  const std::map<std::string, std::string>& i() const { return i_; }

  friend bool operator==(const Reaction&, const Reaction&) = default;

 private:
  ChemGraph source_, target_;
  std::set<std::string> uA_, uB_;
  std::map<std::string, std::string> b_, i_;
};

namespace detail {

inline std::set<std::string> chem_part(const ChemGraph& g, const std::set<std::string>& names) {
  std::set<std::string> out;
  for (const auto& n : names)
    if (g.has_vertex(n) && g.is_chem(n)) out.insert(n);
  return out;
}

inline std::set<std::string> complement(const ChemGraph& g, const std::set<std::string>& names) {
  std::set<std::string> out;
  for (const auto& [n, lbl] : g.vertices())
    if (!names.count(n)) out.insert(n);
  return out;
}

}  // namespace detail

/// Validates the four defining clauses, reporting the first failure.
inline ReactionReport validate_reaction(const Reaction& r) {
  auto fail = [](std::string clause, std::string msg) {
    return ReactionReport{false, std::move(clause), std::move(msg)};
  };

  for (const auto& n : r.uA())
    if (!r.source().has_vertex(n)) return fail("graphs", "uA name " + n + " not in source");
  for (const auto& n : r.uB())
    if (!r.target().has_vertex(n)) return fail("graphs", "uB name " + n + " not in target");

  if (net_charge(r.source(), r.uA()) != net_charge(r.target(), r.uB()))
    return fail("net-charge", std::to_string(net_charge(r.source(), r.uA())) + " vs " +
                                  std::to_string(net_charge(r.target(), r.uB())));

  auto chemA = detail::chem_part(r.source(), r.uA());
  auto chemB = detail::chem_part(r.target(), r.uB());
  if (r.b().size() != chemA.size() || chemB.size() != chemA.size())
    return fail("bijection", "b must pair the chemical parts of uA and uB");
  std::set<std::string> image;
  for (const auto& [x, y] : r.b()) {
    if (!chemA.count(x)) return fail("bijection", "b domain name " + x + " not chemical in uA");
    if (!chemB.count(y)) return fail("bijection", "b image name " + y + " not chemical in uB");
    if (!image.insert(y).second) return fail("bijection", "b not injective at " + y);
    if (r.source().element(x) != r.target().element(y))
      return fail("labels", "b sends " + x + " (" + r.source().element(x) + ") to " + y + " (" +
                                r.target().element(y) + ")");
  }

  auto compA = detail::complement(r.source(), r.uA());
  auto compB = detail::complement(r.target(), r.uB());
  if (r.i().size() != compA.size() || compB.size() != compA.size())
    return fail("complement-iso", "i must pair the complements of uA and uB");
  std::set<std::string> iImage;
  for (const auto& [x, y] : r.i()) {
    if (!compA.count(x)) return fail("complement-iso", "i domain name " + x + " not in complement");
    if (!compB.count(y)) return fail("complement-iso", "i image name " + y + " not in complement");
    if (!iImage.insert(y).second) return fail("complement-iso", "i not injective at " + y);
    if (r.source().label(x) != r.target().label(y))
      return fail("complement-iso", "i does not preserve the label of " + x);
  }
  for (const auto& x : compA)
    for (const auto& y : compA) {
      if (x >= y) continue;
      if (r.source().bond(x, y) != r.target().bond(r.i().at(x), r.i().at(y)))
        return fail("complement-iso", "i does not preserve the bond " + x + "-" + y);
    }

  for (const auto& u : chemA)
    for (const auto& a : compA)
      if (r.source().bond(u, a) != r.target().bond(r.b().at(u), r.i().at(a)))
        return fail("boundary", "bond " + u + "-" + a + " not preserved across the boundary");

  return {};
}

inline Reaction Reaction::checked(ChemGraph source, ChemGraph target, std::set<std::string> uA,
                                  std::set<std::string> uB, std::map<std::string, std::string> b,
                                  std::map<std::string, std::string> i) {
  Reaction r = unchecked(std::move(source), std::move(target), std::move(uA), std::move(uB),
                         std::move(b), std::move(i));
  auto rep = validate_reaction(r);
  if (!rep.ok) throw std::invalid_argument("invalid reaction: " + rep.clause + ": " + rep.message);
  return r;
}

inline Reaction identity(const ChemGraph& g) {
  std::map<std::string, std::string> id;
  for (const auto& [n, lbl] : g.vertices()) id[n] = n;
  return Reaction::unchecked(g, g, {}, {}, {}, std::move(id));
}

inline Reaction dagger(const Reaction& r) {
  std::map<std::string, std::string> binv, iinv;
  for (const auto& [x, y] : r.b()) binv[y] = x;
  for (const auto& [x, y] : r.i()) iinv[y] = x;
  return Reaction::unchecked(r.target(), r.source(), r.uB(), r.uA(), std::move(binv),
                             std::move(iinv));
}

/// Composite of r: A -> B and s: B -> C. The middle graphs must agree on the
/// nose (names, labels and bonds); renamed middles are rejected.
inline Reaction compose(const Reaction& r, const Reaction& s) {
  if (!(r.target() == s.source()))
    throw compose_error("compose: middle graphs differ");

  const ChemGraph& A = r.source();
  const ChemGraph& B = r.target();
  const ChemGraph& C = s.target();

  // Z_A = U_A u i^-1(W_B minus U_B); Z_C = W_C u j(U_B minus W_B).
  std::set<std::string> zA = r.uA();
  std::map<std::string, std::string> iinv;
  for (const auto& [x, y] : r.i()) iinv[y] = x;
  for (const auto& w : s.uA())
    if (!r.uB().count(w)) zA.insert(iinv.at(w));

  std::set<std::string> zC = s.uB();
  for (const auto& u : r.uB())
    if (!s.uA().count(u)) zC.insert(s.i().at(u));

  // The bijection part dispatches per vertex through b+i then c+j, restricted
  // to the chemical part of Z_A; the iso part is j after i on the rest.
  auto through_first = [&](const std::string& x) {
    return r.uA().count(x) ? r.b().at(x) : r.i().at(x);
  };
  auto through_second = [&](const std::string& y) {
    return s.uA().count(y) ? s.b().at(y) : s.i().at(y);
  };

  std::map<std::string, std::string> bComp, iComp;
  for (const auto& x : zA) {
    if (!A.is_chem(x)) continue;
    bComp[x] = through_second(through_first(x));
  }
  for (const auto& [n, lbl] : A.vertices()) {
    if (zA.count(n)) continue;
    iComp[n] = s.i().at(r.i().at(n));
  }

  Reaction out =
      Reaction::unchecked(A, C, std::move(zA), std::move(zC), std::move(bComp), std::move(iComp));
  auto rep = validate_reaction(out);
  if (!rep.ok)
    throw std::logic_error("compose produced an invalid reaction: " + rep.clause + ": " +
                           rep.message);
  return out;
}

inline bool eq_reaction(const Reaction& r, const Reaction& s) { return r == s; }

// -- text format --------------------------------------------------------------

inline std::string print_reaction(const Reaction& r) {
  std::ostringstream out;
  out << print_graph(r.source(), "A");
  out << print_graph(r.target(), "B");
  out << "uA";
  for (const auto& n : r.uA()) out << " " << n;
  out << "\nuB";
  for (const auto& n : r.uB()) out << " " << n;
  out << "\nb";
  for (const auto& [x, y] : r.b()) out << " " << x << ":" << y;
  out << "\ni";
  for (const auto& [x, y] : r.i()) out << " " << x << ":" << y;
  out << "\n";
  return out.str();
}

inline Reaction parse_reaction(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<NamedGraph> graphs;
  std::set<std::string> uA, uB;
  std::map<std::string, std::string> b, i;
  bool sawUA = false, sawUB = false, sawB = false, sawI = false;
  std::ostringstream graphText;

  auto parse_pairs = [&](std::istringstream& ls, std::map<std::string, std::string>& into) {
    std::string tok;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw parse_error("expected <name>:<name>, got " + tok, lineno, 1);
      into[tok.substr(0, colon)] = tok.substr(colon + 1);
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "graph" || tok == "v" || tok == "e") {
      graphText << line << "\n";
    } else if (tok == "uA") {
      sawUA = true;
      std::string n;
      while (ls >> n) uA.insert(n);
    } else if (tok == "uB") {
      sawUB = true;
      std::string n;
      while (ls >> n) uB.insert(n);
    } else if (tok == "b") {
      sawB = true;
      parse_pairs(ls, b);
    } else if (tok == "i") {
      sawI = true;
      parse_pairs(ls, i);
    } else {
      throw parse_error("unknown directive " + tok, lineno, 1);
    }
  }
  graphs = parse_graphs(graphText.str());
  if (graphs.size() != 2) throw parse_error("a reaction needs exactly two graph blocks", lineno, 1);
  if (!sawUA || !sawUB || !sawB || !sawI)
    throw parse_error("a reaction needs uA, uB, b and i lines", lineno, 1);
  return Reaction::unchecked(std::move(graphs[0].graph), std::move(graphs[1].graph), std::move(uA),
                             std::move(uB), std::move(b), std::move(i));
}

}  // namespace disc
