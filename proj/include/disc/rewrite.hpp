#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "disc/semantics.hpp"
#include "disc/term.hpp"

namespace disc {

struct TraceEntry {
  std::string rule;
  std::size_t pos;
};
using Trace = std::vector<TraceEntry>;

inline std::string trace_to_string(const Trace& tr) {
  std::ostringstream out;
  for (const auto& e : tr) out << e.rule << "@" << e.pos << "\n";
  return out.str();
}

/// Block order of the ICE form. Lower ranks commute to the left.
enum class BlockKind : int {
  Ion = 0,
  Cov = 1,
  ENeg = 2,
  ENonneg = 3,
  ENonnegBar = 4,
  ENegBar = 5,
  CovBar = 6,
  IonBar = 7,
  Ren = 8,
  Touch = 9,
  Id = 10,
};

inline BlockKind block_kind(const TermAtom& a) {
  if (is_id(a)) return BlockKind::Id;
  if (is_touch(a)) return BlockKind::Touch;
  if (is_ren(a)) return BlockKind::Ren;
  const auto& r = std::get<RuleApp>(a);
  const bool c = r.is_connect();
  switch (r.kind()) {
    case RuleKind::Ion:
      return c ? BlockKind::IonBar : BlockKind::Ion;
    case RuleKind::Cov:
      return c ? BlockKind::CovBar : BlockKind::Cov;
    case RuleKind::ENeg:
      return c ? BlockKind::ENegBar : BlockKind::ENeg;
    case RuleKind::ENonneg:
      return c ? BlockKind::ENonnegBar : BlockKind::ENonneg;
  }
  return BlockKind::Id;
}

inline int block_rank(const TermAtom& a) { return static_cast<int>(block_kind(a)); }

/// A term is in ICE form when its atoms appear in block order
/// I;C;E;E;Ebar;Ebar;Cbar;Ibar;R;S with no explicit id atoms (the empty or
/// all-id term counts as the identity).
inline bool is_ice_form(const TypedTerm& t) {
  bool allId = true;
  for (const auto& a : t.atoms)
    if (!is_id(a)) allId = false;
  if (allId) return true;
  int prev = -1;
  for (const auto& a : t.atoms) {
    if (is_id(a)) return false;
    int r = block_rank(a);
    if (r < prev) return false;
    prev = r;
  }
  return true;
}

namespace engine {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct Budget {
  std::size_t left = 0;
  const Trace* trace = nullptr;
  void spend(const char* what) {
    if (left == 0)
      throw engine_error(std::string("rewrite step budget exhausted at ") + what,
                         trace ? trace_to_string(*trace) : "");
    --left;
  }
};

inline std::size_t budget_for(std::size_t n) { return 400 + 120 * (n + 2) * (n + 2); }

/// Working copy of a typed term. Every mutation replaces a window of atoms,
/// re-elaborates it and insists the window's output graph is unchanged, so the
/// term's endpoints (and, by soundness of the applied identities, its
/// interpretation) are preserved across arbitrary rewrite sequences.
class Work {
 public:
  explicit Work(TypedTerm t, Trace* trace = nullptr)
      : atoms_(std::move(t.atoms)), graphs_(std::move(t.graphs)), trace_(trace) {}

  std::size_t size() const { return atoms_.size(); }
  const TermAtom& atom(std::size_t i) const { return atoms_[i]; }
  const std::vector<TermAtom>& atoms() const { return atoms_; }
  const ChemGraph& graph(std::size_t i) const { return graphs_[i]; }
  const ChemGraph& source() const { return graphs_.front(); }
  const ChemGraph& target() const { return graphs_.back(); }
  Trace* trace() const { return trace_; }
  std::string trace_dump() const { return trace_ ? trace_to_string(*trace_) : ""; }

  bool try_splice(std::size_t i, std::size_t count, const std::vector<TermAtom>& repl,
                  const char* rule) {
    std::vector<ChemGraph> mids;
    mids.push_back(graphs_[i]);
    for (const auto& a : repl) {
      try {
        mids.push_back(step_atom(a, mids.back()));
      } catch (const std::exception&) {
        return false;
      }
    }
    if (!(mids.back() == graphs_[i + count])) return false;
    atoms_.erase(atoms_.begin() + i, atoms_.begin() + i + count);
    atoms_.insert(atoms_.begin() + i, repl.begin(), repl.end());
    graphs_.erase(graphs_.begin() + i, graphs_.begin() + i + count + 1);
    graphs_.insert(graphs_.begin() + i, mids.begin(), mids.end());
    if (trace_) trace_->push_back({rule, i});
    return true;
  }

  void splice(std::size_t i, std::size_t count, const std::vector<TermAtom>& repl,
              const char* rule) {
    if (!try_splice(i, count, repl, rule))
      throw engine_error(std::string("rewrite ") + rule + " failed at " + std::to_string(i),
                         trace_dump());
  }

  TypedTerm take() { return TypedTerm{std::move(atoms_), std::move(graphs_)}; }
  TypedTerm snapshot() const { return TypedTerm{atoms_, graphs_}; }

 private:
  std::vector<TermAtom> atoms_;
  std::vector<ChemGraph> graphs_;
  Trace* trace_;
};

inline disc::detail::FreshNames fresh_for(const std::vector<TermAtom>& atoms,
                                          const std::vector<ChemGraph>& graphs) {
  std::set<std::string> taken;
  for (const auto& g : graphs)
    for (const auto& [n, lbl] : g.vertices()) taken.insert(n);
  for (const auto& a : atoms) {
    if (auto* t = std::get_if<TouchAtom>(&a)) taken.insert(t->u);
    if (auto* r = std::get_if<RenAtom>(&a)) {
      taken.insert(r->from);
      taken.insert(r->to);
    }
    if (auto* d = std::get_if<RuleApp>(&a))
      for (const auto& n : d->names()) taken.insert(n);
  }
  return disc::detail::FreshNames(std::move(taken));
}

inline disc::detail::FreshNames fresh_for(const Work& w) {
  std::vector<ChemGraph> gs;
  gs.push_back(w.source());
  gs.push_back(w.target());
  auto f = fresh_for(w.atoms(), gs);
  return f;
}

// Name of the commuting identity that justifies swapping x;y -> y;x.
inline const char* swap_name(const TermAtom& x, const TermAtom& y) {
  BlockKind kx = block_kind(x), ky = block_kind(y);
  auto pair = [&](BlockKind a, BlockKind b) { return kx == a && ky == b; };
  using K = BlockKind;
  if (pair(K::Cov, K::Ion)) return "comm3";
  if (pair(K::ENeg, K::Ion)) return "comm4";
  if (pair(K::ENonneg, K::Ion)) return "comm5";
  if (pair(K::ENonnegBar, K::Ion)) return "comm6";
  if (pair(K::ENegBar, K::Ion)) return "comm7";
  if (pair(K::CovBar, K::Ion)) return "comm8";
  if (pair(K::IonBar, K::Ion)) return "comm2";
  if (pair(K::ENeg, K::Cov)) return "comm9";
  if (pair(K::ENonneg, K::Cov)) return "comm10";
  if (pair(K::ENonnegBar, K::Cov)) return "comm11";
  if (pair(K::IonBar, K::Cov)) return "comm8-bar";
  if (pair(K::ENonneg, K::ENeg)) return "comm12";
  if (pair(K::ENonnegBar, K::ENeg)) return "comm13";
  if (pair(K::IonBar, K::ENeg)) return "comm7-bar";
  if (pair(K::ENonnegBar, K::ENonneg)) return "comm2";
  if (pair(K::IonBar, K::ENonneg)) return "comm6-bar";
  if (pair(K::ENegBar, K::ENonnegBar)) return "comm12-bar";
  if (pair(K::CovBar, K::ENonnegBar)) return "comm10-bar";
  if (pair(K::IonBar, K::ENonnegBar)) return "comm5-bar";
  if (pair(K::CovBar, K::ENegBar)) return "comm9-bar";
  if (pair(K::IonBar, K::ENegBar)) return "comm4-bar";
  if (pair(K::IonBar, K::CovBar)) return "comm3-bar";
  if (kx == ky) {
    const bool conn = std::holds_alternative<RuleApp>(x) && std::get<RuleApp>(x).is_connect();
    return conn ? "comm1-bar" : "comm1";
  }
  // Remaining rule pairs are reachable through the rename-mediated identity
  // plus absorption of the introduced renames.
  return "rd4+rd3";
}

struct ExchangeResult {
  bool ok = false;
  std::size_t first_pos = npos;   // new index of the former atoms[i]
  std::size_t second_pos = npos;  // new index of the former atoms[i+1]
  std::ptrdiff_t delta = 0;       // change in term length
};

/// Attempts to rewrite the window (atoms[i], atoms[i+1]) so that the second
/// atom's action happens first. Chooses the identity by the shapes involved;
/// every candidate is validated by concrete re-elaboration.
inline ExchangeResult try_exchange(Work& w, std::size_t i, disc::detail::FreshNames& fresh) {
  const TermAtom x = w.atom(i);
  const TermAtom y = w.atom(i + 1);
  auto plain = [&](const char* name) -> ExchangeResult {
    if (w.try_splice(i, 2, {y, x}, name)) return {true, i + 1, i, 0};
    return {};
  };

  if (is_touch(x)) {
    const auto& s = std::get<TouchAtom>(x);
    if (auto* r = std::get_if<RenAtom>(&y)) {
      if (r->from == s.u) {
        if (w.try_splice(i, 2, {y}, "sr2")) return {true, npos, i, -1};
        return {};
      }
      return plain("sr1");
    }
    if (auto* d = std::get_if<RuleApp>(&y)) {
      auto sup = d->superscripts();
      if (std::find(sup.begin(), sup.end(), s.u) != sup.end()) {
        if (w.try_splice(i, 2, {y}, d->is_connect() ? "sd2-bar" : "sd2")) return {true, npos, i, -1};
        return {};
      }
      auto sub = d->subscripts();
      if (d->is_connect() && std::find(sub.begin(), sub.end(), s.u) != sub.end()) {
        if (w.try_splice(i, 2, {y}, "sabsorb-bar")) return {true, npos, i, -1};
        return {};
      }
      return plain(d->is_connect() ? "sd1-bar" : "sd1");
    }
    if (is_touch(y)) return plain("scomm");
    return {};
  }

  if (auto* r = std::get_if<RenAtom>(&x)) {
    if (auto* d0 = std::get_if<RuleApp>(&y)) {
      const RuleApp& d = *d0;
      if (d.kind() == RuleKind::ENonneg && d.v() == r->to) {
        RuleApp d2 = d.with_superscripts(d.u(), r->from);
        if (w.try_splice(i, 2, {d2, x}, d.is_connect() ? "rd2-bar" : "rd2"))
          return {true, i + 1, i, 0};
        return {};
      }
      if (d.is_connect() && !d.subscripts().empty() && (d.a() == r->to || d.b() == r->to)) {
        RuleApp d2 = d.with_subscripts(d.a() == r->to ? r->from : d.a(),
                                       d.b() == r->to ? r->from : d.b());
        if (w.try_splice(i, 2, {d2}, "rd3-bar")) return {true, npos, i, -1};
        return {};
      }
      if (!d.is_connect() && !d.subscripts().empty() &&
          (d.a() == r->from || d.b() == r->from)) {
        // The disconnection reuses the vacated name; route it through a fresh
        // one and restore with a second rename.
        std::string j = fresh.next();
        RuleApp d2 =
            d.with_subscripts(d.a() == r->from ? j : d.a(), d.b() == r->from ? j : d.b());
        if (w.try_splice(i, 2, {d2, x, RenAtom{j, r->from}}, "rd3+rd1"))
          return {true, i + 1, i, +1};
        return {};
      }
      return plain(d.is_connect() ? "rd1-bar" : "rd1");
    }
    if (is_touch(y)) return plain("sr1");
    return {};
  }

  if (auto* h0 = std::get_if<RuleApp>(&x)) {
    const RuleApp h = *h0;
    if (auto* r = std::get_if<RenAtom>(&y)) {
      // Dragging a rename left past a rule.
      if (!h.is_connect()) {
        if (!h.subscripts().empty() && (h.a() == r->from || h.b() == r->from)) {
          RuleApp h2 = h.with_subscripts(h.a() == r->from ? r->to : h.a(),
                                         h.b() == r->from ? r->to : h.b());
          if (w.try_splice(i, 2, {h2}, "rd3")) return {true, i, npos, -1};
          return {};
        }
        if (h.kind() == RuleKind::ENonneg && h.v() == r->from) {
          RuleApp h2 = h.with_superscripts(h.u(), r->to);
          if (w.try_splice(i, 2, {y, h2}, "rd2")) return {true, i + 1, i, 0};
          return {};
        }
      } else {
        if (h.kind() == RuleKind::ENonneg && h.v() == r->from) {
          RuleApp h2 = h.with_superscripts(h.u(), r->to);
          if (w.try_splice(i, 2, {y, h2}, "rd2-bar")) return {true, i + 1, i, 0};
          return {};
        }
        if (!h.subscripts().empty() && (h.a() == r->to || h.b() == r->to)) {
          // The connection removed the name the rename re-creates; when the
          // rename's source is an equally placed vertex, swap their roles and
          // the rename degenerates to a touch.
          RuleApp h2 = h.with_subscripts(h.a() == r->to ? r->from : h.a(),
                                         h.b() == r->to ? r->from : h.b());
          if (w.try_splice(i, 2, {h2, TouchAtom{r->to}}, "ids23")) return {true, i, i + 1, 0};
        }
      }
      return plain(h.is_connect() ? "rd1-bar" : "rd1");
    }
    if (is_touch(y)) {
      const auto& s = std::get<TouchAtom>(y);
      auto sup = h.superscripts();
      if (std::find(sup.begin(), sup.end(), s.u) != sup.end()) {
        if (w.try_splice(i, 2, {x}, h.is_connect() ? "sd2-bar" : "sd2")) return {true, i, npos, -1};
        return {};
      }
      if (!h.is_connect() && !h.subscripts().empty() &&
          (h.a() == s.u || h.b() == s.u)) {
        if (w.try_splice(i, 2, {x}, "sabsorb")) return {true, i, npos, -1};
        return {};
      }
      return plain(h.is_connect() ? "sd1-bar" : "sd1");
    }
    if (auto* d0 = std::get_if<RuleApp>(&y)) {
      const RuleApp d = *d0;
      // Connection followed by a disconnection of the same shape at the same
      // vertices collapses to touches and renames.
      if (h.is_connect() && !d.is_connect() && h.kind() == d.kind()) {
        bool match = false;
        RuleApp da = d;
        if (h.kind() == RuleKind::ENeg) {
          match = h.u() == d.u();
        } else if (h.kind() == RuleKind::Cov) {
          if (h.u() == d.u() && h.v() == d.v()) {
            match = true;
          } else if (h.u() == d.v() && h.v() == d.u()) {
            match = true;
            da = RuleApp::cov(d.v(), d.u(), d.b(), d.a(), d.direction());
          }
        } else {
          match = h.u() == d.u() && h.v() == d.v();
        }
        if (match) {
          std::vector<TermAtom> repl;
          for (const auto& sname : h.superscripts()) repl.push_back(TouchAtom{sname});
          auto hs = h.subscripts();
          auto ds = da.subscripts();
          const char* name = "ids0";
          if (hs.empty()) {
            name = "ddbar5";
          } else if (hs == ds) {
            name = "ddbar5";
            repl.push_back(TouchAtom{hs[0]});
            repl.push_back(TouchAtom{hs[1]});
          } else {
            std::string j = fresh.next();
            auto add_ren = [&repl](const std::string& f, const std::string& t) {
              if (f == t)
                repl.push_back(TouchAtom{f});
              else
                repl.push_back(RenAtom{f, t});
            };
            add_ren(hs[0], j);
            add_ren(hs[1], ds[1]);
            add_ren(j, ds[0]);
          }
          if (w.try_splice(i, 2, repl, name))
            return {true, npos, npos, static_cast<std::ptrdiff_t>(repl.size()) - 2};
          return {};
        }
      }
      auto res = plain(swap_name(x, y));
      if (res.ok) return res;
      if (h.is_connect() && !d.is_connect() && !d.subscripts().empty()) {
        // Move the disconnection left past the connection by introducing its
        // stubs under fresh names and renaming afterwards.
        std::string j1 = fresh.next(), j2 = fresh.next();
        RuleApp d2 = d.with_subscripts(j1, j2);
        if (w.try_splice(i, 2, {d2, x, RenAtom{j1, d.a()}, RenAtom{j2, d.b()}}, "rd4"))
          return {true, i + 1, i, +2};
      }
      return {};
    }
  }
  return {};
}

inline void drop_ids(Work& w) {
  for (std::size_t i = 0; i < w.size();) {
    if (is_id(w.atom(i)))
      w.splice(i, 1, {}, "unit");
    else
      ++i;
  }
}

/// Staged commutation into ICE block order: ionic disconnections move left
/// past everything, then covalent ones past everything later, and so on; a
/// final pass puts renames before touches.
inline void ice_sort(Work& w, disc::detail::FreshNames& fresh, Budget& bud) {
  drop_ids(w);
  for (int k = 0; k <= 7; ++k) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (block_rank(w.atom(i + 1)) == k && block_rank(w.atom(i)) > k) {
          bud.spend("ice-sort");
          auto res = try_exchange(w, i, fresh);
          if (!res.ok)
            throw engine_error("ice-sort stuck at " + std::to_string(i) + ": " +
                                   to_string(w.atom(i)) + " ; " + to_string(w.atom(i + 1)),
                               w.trace_dump());
          changed = true;
          break;
        }
      }
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (is_touch(w.atom(i)) && is_ren(w.atom(i + 1))) {
        bud.spend("ice-sort");
        auto res = try_exchange(w, i, fresh);
        if (!res.ok) throw engine_error("ice-sort: touch/rename swap failed", w.trace_dump());
        changed = true;
        break;
      }
    }
  }
}

}  // namespace engine

/// Commutes a typed term into ICE block order; endpoints and interpretation
/// are unchanged. With a trace, records one entry per applied identity.
inline TypedTerm to_ice_form(const TypedTerm& t, Trace* trace = nullptr) {
  engine::Work w(t, trace);
  auto fresh = engine::fresh_for(t.atoms, t.graphs);
  engine::Budget bud{engine::budget_for(t.atoms.size()), trace};
  engine::ice_sort(w, fresh, bud);
  return w.take();
}

}  // namespace disc
