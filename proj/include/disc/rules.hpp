#pragma once

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "disc/graph.hpp"

namespace disc {

enum class RuleKind { ENeg, ENonneg, Ion, Cov };
enum class Direction { Disconnect, Connect };

/// One rule application with its vertex-name parameters:
///   ENeg    E[u;a,b]   electron detachment from a negative u
///   ENonneg E[u,v]     electron detachment from a non-negative u onto its "*"-neighbour v
///   Ion     I[u,v]     ionic bond breaking
///   Cov     C[u,v;a,b] covalent bond breaking, leaving "*"-stubs a on u and b on v
/// A leading Connect direction marks the converse (connection) rule.
class RuleApp {
 public:
  static RuleApp eneg(std::string u, std::string a, std::string b,
                      Direction dir = Direction::Disconnect) {
    return RuleApp(RuleKind::ENeg, dir, std::move(u), "", std::move(a), std::move(b));
  }
  static RuleApp enonneg(std::string u, std::string v, Direction dir = Direction::Disconnect) {
    return RuleApp(RuleKind::ENonneg, dir, std::move(u), std::move(v), "", "");
  }
  static RuleApp ion(std::string u, std::string v, Direction dir = Direction::Disconnect) {
    return RuleApp(RuleKind::Ion, dir, std::move(u), std::move(v), "", "");
  }
  static RuleApp cov(std::string u, std::string v, std::string a, std::string b,
                     Direction dir = Direction::Disconnect) {
    return RuleApp(RuleKind::Cov, dir, std::move(u), std::move(v), std::move(a), std::move(b));
  }

  RuleKind kind() const { return kind_; }
  Direction direction() const { return dir_; }
  bool is_connect() const { return dir_ == Direction::Connect; }

  const std::string& u() const { return u_; }
  const std::string& v() const { return v_; }
  const std::string& a() const { return a_; }
  const std::string& b() const { return b_; }

  // Superscript names (the vertices the rule acts at).
  std::vector<std::string> superscripts() const {
    switch (kind_) {
      case RuleKind::ENeg:
        return {u_};
      default:
        return {u_, v_};
    }
  }

  // Subscript names (the "*"-vertices a disconnection introduces / a connection removes).
  std::vector<std::string> subscripts() const {
    switch (kind_) {
      case RuleKind::ENeg:
      case RuleKind::Cov:
        return {a_, b_};
      default:
        return {};
    }
  }

  std::vector<std::string> names() const {
    auto out = superscripts();
    for (auto& s : subscripts()) out.push_back(s);
    return out;
  }

  RuleApp invert() const {
    RuleApp r = *this;
    r.dir_ = dir_ == Direction::Disconnect ? Direction::Connect : Direction::Disconnect;
    return r;
  }

  RuleApp with_subscripts(std::string a, std::string b) const {
    RuleApp r = *this;
    r.a_ = std::move(a);
    r.b_ = std::move(b);
    r.check_distinct();
    return r;
  }

  RuleApp with_superscripts(std::string u, std::string v) const {
    RuleApp r = *this;
    r.u_ = std::move(u);
    r.v_ = std::move(v);
    r.check_distinct();
    return r;
  }

  friend bool operator==(const RuleApp&, const RuleApp&) = default;
  friend auto operator<=>(const RuleApp&, const RuleApp&) = default;

 private:
  RuleApp(RuleKind kind, Direction dir, std::string u, std::string v, std::string a, std::string b)
      : kind_(kind), dir_(dir), u_(std::move(u)), v_(std::move(v)), a_(std::move(a)),
        b_(std::move(b)) {
    check_distinct();
  }

  void check_distinct() const {
    auto ns = names();
    for (auto& n : ns)
      if (n.empty()) throw name_error("empty vertex name in rule", n);
    std::set<std::string> s(ns.begin(), ns.end());
    if (s.size() != ns.size()) throw name_error("rule vertex names must be pairwise distinct", u_);
  }

  RuleKind kind_;
  Direction dir_;
  std::string u_, v_, a_, b_;
};

inline std::string to_string(const RuleApp& r) {
  std::ostringstream out;
  if (r.is_connect()) out << "~";
  switch (r.kind()) {
    case RuleKind::ENeg:
      out << "E[" << r.u() << ";" << r.a() << "," << r.b() << "]";
      break;
    case RuleKind::ENonneg:
      out << "E[" << r.u() << "," << r.v() << "]";
      break;
    case RuleKind::Ion:
      out << "I[" << r.u() << "," << r.v() << "]";
      break;
    case RuleKind::Cov:
      out << "C[" << r.u() << "," << r.v() << ";" << r.a() << "," << r.b() << "]";
      break;
  }
  return out.str();
}

struct DomainReport {
  bool in_domain = false;
  std::string reason;  // first violated clause when not in domain
};

// Not-in-domain failure raised by apply_rule.
struct domain_error : std::runtime_error {
  DomainReport report;
  domain_error(const RuleApp& r, DomainReport rep)
      : std::runtime_error(to_string(r) + " not applicable: " + rep.reason),
        report(std::move(rep)) {}
};

namespace detail {

inline DomainReport fail(std::string reason) { return {false, std::move(reason)}; }

// A bonded "*"-stub: label (*,0), exactly one neighbour w, single bond.
inline bool is_bonded_stub(const ChemGraph& g, const std::string& a, const std::string& w) {
  return g.has_vertex(a) && g.is_alpha(a) && g.charge(a) == 0 &&
         g.bond(a, w) == BondLabel::covalent(1) && g.neighbours(a) == std::set<std::string>{w};
}

// An isolated "*" with charge -1.
inline bool is_isolated_neg(const ChemGraph& g, const std::string& b) {
  return g.has_vertex(b) && g.is_alpha(b) && g.charge(b) == -1 && g.neighbours(b).empty();
}

}  // namespace detail

/// Decides membership in the (partial) rule's domain and reports the first
/// violated clause. Connect domains are the explicit characterizations of the
/// forward rules' images.
inline DomainReport domain_check(const RuleApp& r, const ChemGraph& g) {
  using detail::fail;
  const bool fwd = !r.is_connect();

  // Disconnections require U present and D fresh; connections consume D, so
  // all named vertices must be present except as noted per rule.
  for (const auto& n : r.superscripts())
    if (!g.has_vertex(n)) return fail("vertex " + n + " not in graph");
  if (fwd) {
    for (const auto& n : r.subscripts())
      if (g.has_vertex(n)) return fail("vertex " + n + " already in graph");
  } else {
    for (const auto& n : r.subscripts())
      if (!g.has_vertex(n)) return fail("vertex " + n + " not in graph");
  }

  switch (r.kind()) {
    case RuleKind::ENeg: {
      if (!g.is_chem(r.u())) return fail("vertex " + r.u() + " is not chemical");
      // changing u's charge under an ionic bond would leave a non-chemical graph
      if (!g.ion_neighbours(r.u()).empty())
        return fail("vertex " + r.u() + " has an ionic neighbour");
      if (fwd) {
        if (g.charge(r.u()) >= 0) return fail("vertex " + r.u() + " is not negative");
      } else {
        if (g.charge(r.u()) > 0) return fail("vertex " + r.u() + " is positive");
        if (!detail::is_bonded_stub(g, r.a(), r.u()))
          return fail("vertex " + r.a() + " is not a neutral * bonded only to " + r.u());
        if (!detail::is_isolated_neg(g, r.b()))
          return fail("vertex " + r.b() + " is not an isolated * with charge -1");
      }
      return {true, ""};
    }
    case RuleKind::ENonneg: {
      if (!g.is_chem(r.u())) return fail("vertex " + r.u() + " is not chemical");
      if (!g.ion_neighbours(r.u()).empty())
        return fail("vertex " + r.u() + " has an ionic neighbour");
      if (!g.is_alpha(r.v())) return fail("vertex " + r.v() + " is not a * vertex");
      if (fwd) {
        if (g.charge(r.u()) < 0) return fail("vertex " + r.u() + " is negative");
        if (g.bond(r.u(), r.v()) != BondLabel::covalent(1))
          return fail("bond " + r.u() + "-" + r.v() + " is not a single bond");
      } else {
        if (g.charge(r.u()) <= 0) return fail("vertex " + r.u() + " is not positive");
        if (!detail::is_isolated_neg(g, r.v()))
          return fail("vertex " + r.v() + " is not an isolated * with charge -1");
      }
      return {true, ""};
    }
    case RuleKind::Ion: {
      if (fwd) {
        if (!g.bond(r.u(), r.v()).is_ionic())
          return fail("bond " + r.u() + "-" + r.v() + " is not ionic");
        if (g.charge(r.u()) <= 0) return fail("vertex " + r.u() + " is not positive");
        if (g.charge(r.v()) >= 0) return fail("vertex " + r.v() + " is not negative");
      } else {
        if (!g.is_chem(r.u()) || !g.is_chem(r.v())) return fail("ionic partners must be chemical");
        if (!g.bond(r.u(), r.v()).none())
          return fail("vertices " + r.u() + "," + r.v() + " are already bonded");
        if (g.charge(r.u()) <= 0) return fail("vertex " + r.u() + " is not positive");
        if (g.charge(r.v()) != -g.charge(r.u()))
          return fail("charges of " + r.u() + "," + r.v() + " are not opposite");
        if (!g.ion_neighbours(r.u()).empty())
          return fail("vertex " + r.u() + " already has an ionic neighbour");
        if (!g.ion_neighbours(r.v()).empty())
          return fail("vertex " + r.v() + " already has an ionic neighbour");
      }
      return {true, ""};
    }
    case RuleKind::Cov: {
      if (!g.is_chem(r.u())) return fail("vertex " + r.u() + " is not chemical");
      if (!g.is_chem(r.v())) return fail("vertex " + r.v() + " is not chemical");
      BondLabel b = g.bond(r.u(), r.v());
      if (fwd) {
        if (b.is_ionic() || b.cov() < 1)
          return fail("bond " + r.u() + "-" + r.v() + " is not covalent of multiplicity >= 1");
      } else {
        if (b.is_ionic() || b.cov() > 3)
          return fail("bond " + r.u() + "-" + r.v() + " cannot gain multiplicity");
        if (!detail::is_bonded_stub(g, r.a(), r.u()))
          return fail("vertex " + r.a() + " is not a neutral * bonded only to " + r.u());
        if (!detail::is_bonded_stub(g, r.b(), r.v()))
          return fail("vertex " + r.b() + " is not a neutral * bonded only to " + r.v());
      }
      return {true, ""};
    }
  }
  return fail("unreachable");
}

/// Applies one rule. The output of an in-domain application is again a valid
/// chemical graph; callers outside tests never see invalid intermediates.
inline ChemGraph apply_rule(const RuleApp& r, const ChemGraph& g) {
  auto rep = domain_check(r, g);
  if (!rep.in_domain) throw domain_error(r, rep);
  ChemGraph out = g;
  const bool fwd = !r.is_connect();
  switch (r.kind()) {
    case RuleKind::ENeg:
      if (fwd) {
        out.add_charge(r.u(), +1);
        out.add_vertex(r.a(), kAlpha, 0);
        out.set_bond(r.u(), r.a(), BondLabel::covalent(1));
        out.add_vertex(r.b(), kAlpha, -1);
      } else {
        out.remove_vertex(r.a());
        out.remove_vertex(r.b());
        out.add_charge(r.u(), -1);
      }
      break;
    case RuleKind::ENonneg:
      if (fwd) {
        out.add_charge(r.u(), +1);
        out.set_charge(r.v(), -1);
        out.set_bond(r.u(), r.v(), BondLabel{});
      } else {
        out.add_charge(r.u(), -1);
        out.set_charge(r.v(), 0);
        out.set_bond(r.u(), r.v(), BondLabel::covalent(1));
      }
      break;
    case RuleKind::Ion:
      out.set_bond(r.u(), r.v(), fwd ? BondLabel{} : BondLabel::ionic());
      break;
    case RuleKind::Cov:
      if (fwd) {
        out.set_bond(r.u(), r.v(), BondLabel::covalent(g.bond(r.u(), r.v()).cov() - 1));
        out.add_vertex(r.a(), kAlpha, 0);
        out.set_bond(r.u(), r.a(), BondLabel::covalent(1));
        out.add_vertex(r.b(), kAlpha, 0);
        out.set_bond(r.v(), r.b(), BondLabel::covalent(1));
      } else {
        out.remove_vertex(r.a());
        out.remove_vertex(r.b());
        out.set_bond(r.u(), r.v(), BondLabel::covalent(g.bond(r.u(), r.v()).cov() + 1));
      }
      break;
  }
  return out;
}

inline RuleApp invert(const RuleApp& r) { return r.invert(); }

}  // namespace disc
