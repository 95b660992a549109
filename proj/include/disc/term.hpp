#pragma once

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "disc/rules.hpp"

namespace disc {

struct IdAtom {
  friend bool operator==(const IdAtom&, const IdAtom&) = default;
  friend auto operator<=>(const IdAtom&, const IdAtom&) = default;
};

// S[u]: touch the vertex u without changing the graph.
struct TouchAtom {
  std::string u;
  friend bool operator==(const TouchAtom&, const TouchAtom&) = default;
  friend auto operator<=>(const TouchAtom&, const TouchAtom&) = default;
};

// R[u>v]: rename the "*"-vertex u to the fresh name v.
struct RenAtom {
  std::string from, to;
  friend bool operator==(const RenAtom&, const RenAtom&) = default;
  friend auto operator<=>(const RenAtom&, const RenAtom&) = default;
};

using TermAtom = std::variant<IdAtom, TouchAtom, RenAtom, RuleApp>;

struct UntypedTerm {
  std::vector<TermAtom> atoms;
  friend bool operator==(const UntypedTerm&, const UntypedTerm&) = default;
};

inline bool is_rule(const TermAtom& a) { return std::holds_alternative<RuleApp>(a); }
inline bool is_ren(const TermAtom& a) { return std::holds_alternative<RenAtom>(a); }
inline bool is_touch(const TermAtom& a) { return std::holds_alternative<TouchAtom>(a); }
inline bool is_id(const TermAtom& a) { return std::holds_alternative<IdAtom>(a); }

inline std::string to_string(const TermAtom& a) {
  if (is_id(a)) return "id";
  if (auto* t = std::get_if<TouchAtom>(&a)) return "S[" + t->u + "]";
  if (auto* r = std::get_if<RenAtom>(&a)) return "R[" + r->from + ">" + r->to + "]";
  return to_string(std::get<RuleApp>(a));
}

inline std::string print_term(const UntypedTerm& t) {
  if (t.atoms.empty()) return "id";
  std::ostringstream out;
  for (std::size_t i = 0; i < t.atoms.size(); ++i) out << (i ? " ; " : "") << to_string(t.atoms[i]);
  return out.str();
}

inline std::string print_term(const std::vector<TermAtom>& atoms) {
  return print_term(UntypedTerm{atoms});
}

/// A term together with its source, every intermediate graph, and its target:
/// graphs.size() == atoms.size() + 1 and atom k transforms graphs[k] into graphs[k+1].
struct TypedTerm {
  std::vector<TermAtom> atoms;
  std::vector<ChemGraph> graphs;

  const ChemGraph& source() const { return graphs.front(); }
  const ChemGraph& target() const { return graphs.back(); }
  UntypedTerm untyped() const { return UntypedTerm{atoms}; }
  friend bool operator==(const TypedTerm&, const TypedTerm&) = default;
};

/// Applies one atom to a graph, or explains why it does not type.
inline ChemGraph step_atom(const TermAtom& a, const ChemGraph& g, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) -> ChemGraph {
    if (why) *why = m;
    throw name_error(m, "");
  };
  if (is_id(a)) return g;
  if (auto* t = std::get_if<TouchAtom>(&a)) {
    if (!g.has_vertex(t->u)) return fail("vertex " + t->u + " not in graph");
    return g;
  }
  if (auto* r = std::get_if<RenAtom>(&a)) {
    if (!g.has_vertex(r->from)) return fail("vertex " + r->from + " not in graph");
    if (!g.is_alpha(r->from)) return fail("renamed vertex " + r->from + " is not a * vertex");
    if (r->to != r->from && g.has_vertex(r->to))
      return fail("vertex name " + r->to + " already in use");
    return rename(g, r->from, r->to);
  }
  const auto& rule = std::get<RuleApp>(a);
  auto rep = domain_check(rule, g);
  if (!rep.in_domain) return fail(rep.reason);
  return apply_rule(rule, g);
}

/// Elaborates an untyped term against a source graph, producing the unique
/// typed term when every atom types, and failing at the first that does not.
inline TypedTerm elaborate(const UntypedTerm& t, const ChemGraph& src) {
  TypedTerm out;
  out.atoms = t.atoms;
  out.graphs.reserve(t.atoms.size() + 1);
  out.graphs.push_back(src);
  for (std::size_t i = 0; i < t.atoms.size(); ++i) {
    std::string why;
    try {
      out.graphs.push_back(step_atom(t.atoms[i], out.graphs.back(), &why));
    } catch (const std::exception&) {
      throw type_error(i, why);
    }
  }
  return out;
}

inline bool elaborates(const UntypedTerm& t, const ChemGraph& src, TypedTerm* out = nullptr) {
  try {
    TypedTerm tt = elaborate(t, src);
    if (out) *out = std::move(tt);
    return true;
  } catch (const type_error&) {
    return false;
  }
}

// -- the bar involution ------------------------------------------------------

inline TermAtom bar(const TermAtom& a) {
  if (auto* r = std::get_if<RenAtom>(&a)) return RenAtom{r->to, r->from};
  if (auto* d = std::get_if<RuleApp>(&a)) return d->invert();
  return a;
}

/// Reverses the sequence, inverting each atom. An involution; a term types
/// A -> B exactly when its bar types B -> A.
inline UntypedTerm bar(const UntypedTerm& t) {
  UntypedTerm out;
  out.atoms.reserve(t.atoms.size());
  for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it) out.atoms.push_back(bar(*it));
  return out;
}

inline TypedTerm bar(const TypedTerm& t) {
  TypedTerm out;
  out.atoms.reserve(t.atoms.size());
  for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it) out.atoms.push_back(bar(*it));
  out.graphs.assign(t.graphs.rbegin(), t.graphs.rend());
  return out;
}

// -- typability order (test helper) -----------------------------------------

/// Probe-based check of "whenever t types from A it targets B, then s types
/// A -> B as well", quantified over the given probe graphs only.
inline bool leq_typability(const UntypedTerm& t, const UntypedTerm& s,
                           const std::vector<ChemGraph>& probes) {
  for (const auto& g : probes) {
    TypedTerm tt;
    if (!elaborates(t, g, &tt)) continue;
    TypedTerm ss;
    if (!elaborates(s, g, &ss)) return false;
    if (ss.target() != tt.target()) return false;
  }
  return true;
}

// -- parser ------------------------------------------------------------------

namespace detail {

class TermParser {
 public:
  TermParser(const std::string& text, std::size_t line) : text_(text), line_(line) {}

  UntypedTerm parse() {
    UntypedTerm t;
    skip_ws();
    if (eof()) throw err("empty term");
    t.atoms.push_back(atom());
    skip_ws();
    while (!eof()) {
      expect(';');
      skip_ws();
      t.atoms.push_back(atom());
      skip_ws();
    }
    return t;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  parse_error err(const std::string& m) const { return parse_error(m, line_, pos_ + 1); }
  void expect(char c) {
    if (eof() || peek() != c) throw err(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string name() {
    skip_ws();
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '\'' || peek() == '-'))
      ++pos_;
    if (pos_ == start) throw err("expected a vertex name");
    return text_.substr(start, pos_ - start);
  }

  TermAtom atom() {
    skip_ws();
    if (eof()) throw err("expected an atom");
    bool connect = false;
    if (peek() == '~') {
      connect = true;
      ++pos_;
      skip_ws();
    }
    std::size_t at = pos_;
    std::string head = name();
    if (head == "id") {
      if (connect) throw err("'~' before id");
      return IdAtom{};
    }
    if (head.size() != 1) throw err("unknown atom " + head);
    char h = head[0];
    expect('[');
    try {
      if (h == 'S') {
        if (connect) throw err("'~' before S");
        std::string u = name();
        skip_ws();
        expect(']');
        return TouchAtom{u};
      }
      if (h == 'R') {
        if (connect) throw err("'~' before R");
        std::string u = name();
        skip_ws();
        expect('>');
        std::string v = name();
        skip_ws();
        expect(']');
        return RenAtom{u, v};
      }
      Direction dir = connect ? Direction::Connect : Direction::Disconnect;
      if (h == 'I') {
        std::string u = name();
        skip_ws();
        expect(',');
        std::string v = name();
        skip_ws();
        expect(']');
        return RuleApp::ion(u, v, dir);
      }
      if (h == 'C') {
        std::string u = name();
        skip_ws();
        expect(',');
        std::string v = name();
        skip_ws();
        expect(';');
        std::string a = name();
        skip_ws();
        expect(',');
        std::string b = name();
        skip_ws();
        expect(']');
        return RuleApp::cov(u, v, a, b, dir);
      }
      if (h == 'E') {
        std::string u = name();
        skip_ws();
        if (!eof() && peek() == ';') {
          ++pos_;
          std::string a = name();
          skip_ws();
          expect(',');
          std::string b = name();
          skip_ws();
          expect(']');
          return RuleApp::eneg(u, a, b, dir);
        }
        expect(',');
        std::string v = name();
        skip_ws();
        expect(']');
        return RuleApp::enonneg(u, v, dir);
      }
    } catch (const name_error& e) {
      throw parse_error(e.what(), line_, at + 1);
    }
    throw err("unknown atom " + head);
  }

  const std::string& text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline UntypedTerm parse_term(const std::string& text, std::size_t line = 1) {
  return detail::TermParser(text, line).parse();
}

// -- term files ---------------------------------------------------------------

struct TermFile {
  std::optional<std::string> source_name;  // from an optional "source <name>" header
  std::vector<UntypedTerm> terms;
};

inline TermFile parse_term_file(const std::string& text) {
  TermFile out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    std::istringstream probe(line);
    std::string tok;
    probe >> tok;
    if (first_content && tok == "source") {
      std::string name;
      if (!(probe >> name)) throw parse_error("source header without a name", lineno, 1);
      out.source_name = name;
      first_content = false;
      continue;
    }
    first_content = false;
    out.terms.push_back(parse_term(line, lineno));
  }
  return out;
}

}  // namespace disc
