#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "disc/error.hpp"

namespace disc {

// Reserved vertex label for an unpaired electron; rendered "*" in the text formats.
inline const std::string kAlpha = "*";

/// Edge label: a covalent bond of multiplicity 0..4 (0 meaning no edge) or an ionic bond.
class BondLabel {
 public:
  constexpr BondLabel() = default;

  static constexpr BondLabel covalent(int k) {
    BondLabel b;
    b.mult_ = k;
    return b;
  }
  static constexpr BondLabel ionic() {
    BondLabel b;
    b.ionic_ = true;
    return b;
  }

  constexpr int cov() const { return ionic_ ? 0 : mult_; }
  constexpr int ion() const { return ionic_ ? 1 : 0; }
  constexpr bool is_ionic() const { return ionic_; }
  constexpr bool none() const { return !ionic_ && mult_ == 0; }

  friend constexpr bool operator==(BondLabel, BondLabel) = default;
  friend constexpr auto operator<=>(BondLabel, BondLabel) = default;

 private:
  int mult_ = 0;
  bool ionic_ = false;
};

inline std::string to_string(BondLabel b) {
  return b.is_ionic() ? "ionic" : std::to_string(b.cov());
}

inline std::optional<BondLabel> bond_label_from_string(const std::string& s) {
  if (s == "ionic") return BondLabel::ionic();
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '4') return BondLabel::covalent(s[0] - '0');
  return std::nullopt;
}

/// Element symbols with their valences. The reserved label "*" (valence 1) is always present,
/// and a usable table carries at least two further symbols.
class AtomTable {
 public:
  AtomTable() { valence_[kAlpha] = 1; }

  static AtomTable defaults() {
    AtomTable t;
    // Main-group valences; override via a table file when an element needs a
    // context-dependent valence.
    t.set("H", 1);
    t.set("Li", 1);
    t.set("B", 3);
    t.set("C", 4);
    t.set("N", 3);
    t.set("O", 2);
    t.set("F", 1);
    t.set("Na", 1);
    t.set("Mg", 2);
    t.set("Si", 4);
    t.set("P", 3);
    t.set("S", 2);
    t.set("Cl", 1);
    t.set("K", 1);
    t.set("Ca", 2);
    t.set("Br", 1);
    t.set("I", 1);
    return t;
  }

  void set(const std::string& element, int valence) {
    if (element.empty()) throw std::invalid_argument("empty element symbol");
    if (valence < 0) throw std::invalid_argument("negative valence for " + element);
    if (element == kAlpha && valence != 1)
      throw std::invalid_argument("the \"*\" label has fixed valence 1");
    valence_[element] = valence;
  }

  bool contains(const std::string& element) const { return valence_.count(element) != 0; }

  std::optional<int> valence(const std::string& element) const {
    auto it = valence_.find(element);
    if (it == valence_.end()) return std::nullopt;
    return it->second;
  }

  // Throws unless the table is usable: "*" with valence 1 plus at least two other labels.
  void check() const {
    auto it = valence_.find(kAlpha);
    if (it == valence_.end() || it->second != 1)
      throw std::invalid_argument("atom table must map \"*\" to valence 1");
    if (valence_.size() < 3)
      throw std::invalid_argument("atom table needs at least two labels besides \"*\"");
  }

  const std::map<std::string, int>& entries() const { return valence_; }

  // One "<element> <valence>" pair per line; '#' starts a comment.
  static AtomTable parse(const std::string& text) {
    AtomTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string element;
      if (!(ls >> element)) continue;
      long valence = 0;
      if (!(ls >> valence)) throw parse_error("expected valence after element", lineno, 1);
      std::string rest;
      if (ls >> rest) throw parse_error("trailing token " + rest, lineno, 1);
      t.set(element, static_cast<int>(valence));
    }
    t.check();
    return t;
  }

 private:
  std::map<std::string, int> valence_;
};

}  // namespace disc
