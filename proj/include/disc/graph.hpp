#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "disc/atoms.hpp"
#include "disc/error.hpp"

namespace disc {

struct VertexLabel {
  std::string element;
  int charge = 0;
  friend bool operator==(const VertexLabel&, const VertexLabel&) = default;
  friend auto operator<=>(const VertexLabel&, const VertexLabel&) = default;
};

/// A finite graph over named vertices with (element, charge) vertex labels and
/// covalent/ionic bond labels. Bonds are stored on unordered pairs and only when
/// non-zero, so the structure is symmetric and irreflexive by construction.
class ChemGraph {
 public:
  using BondKey = std::pair<std::string, std::string>;

  bool has_vertex(const std::string& name) const { return verts_.count(name) != 0; }

  const VertexLabel& label(const std::string& name) const { return at(name); }
  const std::string& element(const std::string& name) const { return at(name).element; }
  int charge(const std::string& name) const { return at(name).charge; }
  bool is_alpha(const std::string& name) const { return at(name).element == kAlpha; }
  bool is_chem(const std::string& name) const { return at(name).element != kAlpha; }

  void add_vertex(const std::string& name, const std::string& element, int charge = 0) {
    if (name.empty()) throw name_error("empty vertex name", name);
    if (verts_.count(name)) throw name_error("duplicate vertex", name);
    verts_[name] = VertexLabel{element, charge};
  }

  void remove_vertex(const std::string& name) {
    at(name);
    verts_.erase(name);
    for (auto it = bonds_.begin(); it != bonds_.end();) {
      if (it->first.first == name || it->first.second == name)
        it = bonds_.erase(it);
      else
        ++it;
    }
  }

  void set_charge(const std::string& name, int charge) { mut(name).charge = charge; }
  void add_charge(const std::string& name, int delta) { mut(name).charge += delta; }

  BondLabel bond(const std::string& u, const std::string& v) const {
    at(u);
    at(v);
    if (u == v) return BondLabel{};
    auto it = bonds_.find(key(u, v));
    return it == bonds_.end() ? BondLabel{} : it->second;
  }

  void set_bond(const std::string& u, const std::string& v, BondLabel b) {
    at(u);
    at(v);
    if (u == v) throw name_error("no self-bonds", u);
    if (b.none())
      bonds_.erase(key(u, v));
    else
      bonds_[key(u, v)] = b;
  }

  const std::map<std::string, VertexLabel>& vertices() const { return verts_; }
  const std::map<BondKey, BondLabel>& bonds() const { return bonds_; }

  std::set<std::string> vertex_names() const {
    std::set<std::string> out;
    for (const auto& [n, lbl] : verts_) out.insert(n);
    return out;
  }

  std::size_t size() const { return verts_.size(); }
  bool empty() const { return verts_.empty(); }

  int cov_degree(const std::string& u) const {
    at(u);
    int sum = 0;
    for (const auto& [k, b] : bonds_)
      if (k.first == u || k.second == u) sum += b.cov();
    return sum;
  }

  std::set<std::string> neighbours(const std::string& u) const {
    return nbrs(u, [](BondLabel b) { return !b.none(); });
  }
  std::set<std::string> cov_neighbours(const std::string& u) const {
    return nbrs(u, [](BondLabel b) { return b.cov() != 0; });
  }
  std::set<std::string> ion_neighbours(const std::string& u) const {
    return nbrs(u, [](BondLabel b) { return b.ion() != 0; });
  }

  friend bool operator==(const ChemGraph&, const ChemGraph&) = default;

 private:
  static BondKey key(const std::string& u, const std::string& v) {
    return u < v ? BondKey{u, v} : BondKey{v, u};
  }

  const VertexLabel& at(const std::string& name) const {
    auto it = verts_.find(name);
    if (it == verts_.end()) throw name_error("unknown vertex", name);
    return it->second;
  }
  VertexLabel& mut(const std::string& name) {
    auto it = verts_.find(name);
    if (it == verts_.end()) throw name_error("unknown vertex", name);
    return it->second;
  }

  template <typename Pred>
  std::set<std::string> nbrs(const std::string& u, Pred pred) const {
    at(u);
    std::set<std::string> out;
    for (const auto& [k, b] : bonds_) {
      if (k.first == u && pred(b)) out.insert(k.second);
      if (k.second == u && pred(b)) out.insert(k.first);
    }
    return out;
  }

  std::map<std::string, VertexLabel> verts_;
  std::map<BondKey, BondLabel> bonds_;
};

// -- vertex classes ---------------------------------------------------------

struct Classification {
  std::set<std::string> alpha, chem, neutral, charged, negative, positive;
};

inline Classification classify(const ChemGraph& g) {
  Classification c;
  for (const auto& [n, lbl] : g.vertices()) {
    (lbl.element == kAlpha ? c.alpha : c.chem).insert(n);
    (lbl.charge == 0 ? c.neutral : c.charged).insert(n);
    if (lbl.charge < 0) c.negative.insert(n);
    if (lbl.charge > 0) c.positive.insert(n);
  }
  return c;
}

inline int net_charge(const ChemGraph& g, const std::set<std::string>& names) {
  int sum = 0;
  for (const auto& n : names) sum += g.charge(n);  // throws on unknown names
  return sum;
}

inline int net_charge(const ChemGraph& g) { return net_charge(g, g.vertex_names()); }

// -- validity ---------------------------------------------------------------

struct Violation {
  std::string condition;  // "element", "valence", "alpha-charge", "alpha-bond",
                          // "alpha-neighbours", "ion-count", "ion-charge"
  std::vector<std::string> vertices;
  std::string detail;
};

struct ValidityReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    if (ok()) return "ok";
    std::ostringstream out;
    for (const auto& v : violations) {
      out << v.condition << " [";
      for (std::size_t i = 0; i < v.vertices.size(); ++i) out << (i ? " " : "") << v.vertices[i];
      out << "] " << v.detail << "\n";
    }
    return out.str();
  }
};

/// Checks chemical-graph validity: per-vertex valence balance, the three
/// constraints on "*"-vertices, and the ionic-partner constraint.
inline ValidityReport validate(const ChemGraph& g, const AtomTable& table) {
  ValidityReport rep;
  auto add = [&rep](std::string cond, std::vector<std::string> vs, std::string detail) {
    rep.violations.push_back({std::move(cond), std::move(vs), std::move(detail)});
  };

  // one pass over the bonds accumulates everything per vertex
  std::map<std::string, int> covdeg, nbrs, ioncnt;
  for (const auto& [k, b] : g.bonds()) {
    covdeg[k.first] += b.cov();
    covdeg[k.second] += b.cov();
    ++nbrs[k.first];
    ++nbrs[k.second];
    ioncnt[k.first] += b.ion();
    ioncnt[k.second] += b.ion();

    bool aFirst = g.is_alpha(k.first), aSecond = g.is_alpha(k.second);
    if ((aFirst || aSecond) && (b.is_ionic() || b.cov() > 1))
      add("alpha-bond", {k.first, k.second}, "bond label " + to_string(b) + " not in {0,1}");
    if (aFirst && aSecond)
      add("alpha-neighbours", {k.first, k.second}, "neighbour is not chemical");
    if (b.is_ionic()) {
      // Ionic partners carry equal and opposite nonzero charges.
      int c1 = g.charge(k.first), c2 = g.charge(k.second);
      if (c1 == 0 || c2 != -c1)
        add("ion-charge", {k.first, k.second},
            std::to_string(c1) + " vs " + std::to_string(c2));
    }
  }

  for (const auto& [n, lbl] : g.vertices()) {
    auto val = table.valence(lbl.element);
    if (!val) {
      add("element", {n}, "unknown element label " + lbl.element);
      continue;
    }
    int deg = covdeg.count(n) ? covdeg[n] : 0;
    if (std::abs(lbl.charge) + deg != *val)
      add("valence", {n},
          "|" + std::to_string(lbl.charge) + "| + " + std::to_string(deg) +
              " != " + std::to_string(*val));
    if (lbl.element == kAlpha) {
      if (lbl.charge != 0 && lbl.charge != -1)
        add("alpha-charge", {n}, "charge " + std::to_string(lbl.charge) + " not in {-1,0}");
      if (nbrs[n] > 1) add("alpha-neighbours", {n}, "more than one neighbour");
    } else if (ioncnt[n] > 1) {
      add("ion-count", {n}, "more than one ionic neighbour");
    }
  }
  return rep;
}

// -- renaming and isomorphism checking --------------------------------------

inline ChemGraph rename(const ChemGraph& g, const std::string& u, const std::string& v) {
  if (!g.has_vertex(u)) throw name_error("unknown vertex", u);
  if (v.empty()) throw name_error("empty vertex name", v);
  if (v != u && g.has_vertex(v)) throw name_error("vertex name already in use", v);
  if (u == v) return g;
  ChemGraph out;
  for (const auto& [n, lbl] : g.vertices()) out.add_vertex(n == u ? v : n, lbl.element, lbl.charge);
  for (const auto& [k, b] : g.bonds())
    out.set_bond(k.first == u ? v : k.first, k.second == u ? v : k.second, b);
  return out;
}

/// Verifies that f is a label- and bond-preserving bijection from g onto h.
/// This is verification only; no isomorphism search happens anywhere.
inline bool check_iso(const ChemGraph& g, const ChemGraph& h,
                      const std::map<std::string, std::string>& f) {
  if (f.size() != g.size() || g.size() != h.size()) return false;
  std::set<std::string> image;
  for (const auto& [a, b] : f) {
    if (!g.has_vertex(a) || !h.has_vertex(b)) return false;
    if (g.label(a) != h.label(b)) return false;
    if (!image.insert(b).second) return false;
  }
  for (const auto& [k, b] : g.bonds())
    if (h.bond(f.at(k.first), f.at(k.second)) != b) return false;
  // f is injective on pairs, so matching counts make the bond map onto.
  if (g.bonds().size() != h.bonds().size()) return false;
  return true;
}

// -- text format -------------------------------------------------------------

struct NamedGraph {
  std::string name;
  ChemGraph graph;
};

/// Canonical printing: vertices then edges, each sorted lexicographically.
inline std::string print_graph(const ChemGraph& g, const std::string& name = "g") {
  std::ostringstream out;
  out << "graph " << name << "\n";
  for (const auto& [n, lbl] : g.vertices())
    out << "v " << n << " " << lbl.element << " " << lbl.charge << "\n";
  for (const auto& [k, b] : g.bonds())
    out << "e " << k.first << " " << k.second << " " << to_string(b) << "\n";
  return out.str();
}

inline std::vector<NamedGraph> parse_graphs(const std::string& text) {
  std::vector<NamedGraph> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "graph") {
      std::string name;
      if (!(ls >> name)) throw parse_error("graph header without a name", lineno, 1);
      out.push_back({name, ChemGraph{}});
    } else if (tok == "v") {
      if (out.empty()) throw parse_error("vertex line before any graph header", lineno, 1);
      std::string name, element;
      long charge = 0;
      if (!(ls >> name >> element >> charge))
        throw parse_error("expected: v <name> <element> <charge>", lineno, 1);
      try {
        out.back().graph.add_vertex(name, element, static_cast<int>(charge));
      } catch (const name_error& e) {
        throw parse_error(e.what(), lineno, 1);
      }
    } else if (tok == "e") {
      if (out.empty()) throw parse_error("edge line before any graph header", lineno, 1);
      std::string u, v, lab;
      if (!(ls >> u >> v >> lab)) throw parse_error("expected: e <u> <v> <label>", lineno, 1);
      auto b = bond_label_from_string(lab);
      if (!b || b->none()) throw parse_error("bad bond label " + lab, lineno, 1);
      try {
        out.back().graph.set_bond(u, v, *b);
      } catch (const name_error& e) {
        throw parse_error(e.what(), lineno, 1);
      }
    } else {
      throw parse_error("unknown directive " + tok, lineno, 1);
    }
    std::string rest;
    if (ls >> rest) throw parse_error("trailing token " + rest, lineno, 1);
  }
  return out;
}

inline ChemGraph parse_graph(const std::string& text) {
  auto all = parse_graphs(text);
  if (all.size() != 1) throw parse_error("expected exactly one graph block", 1, 1);
  return std::move(all.front().graph);
}

}  // namespace disc
