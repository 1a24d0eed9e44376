#include "pgame/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "pgame/syntax.hpp"

namespace pgame {

std::string_view to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Valid:
      return "Valid";
    case Verdict::Kind::Invalid:
      return "Invalid";
    case Verdict::Kind::Unknown:
      return "Unknown";
  }
  return "?";
}

std::string to_hex(const StateHash& h) {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(h[0]),
                static_cast<unsigned long long>(h[1]));
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// hashing

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix(h ^ mix(v + 0x632be59bd9b4e019ULL)); }

struct StateHashHasher {
  std::size_t operator()(const StateHash& h) const { return static_cast<std::size_t>(h[0] ^ (h[1] * 31)); }
};

// ---------------------------------------------------------------------------
// skeletons: a formula with its non-root constants abstracted away

struct Skeleton {
  std::uint64_t digest = 0;
  std::vector<std::string> occurrences;  // non-root constants, in order
};

class SkeletonWriter {
 public:
  SkeletonWriter(const std::set<std::string>& root, Skeleton& out) : root_(root), out_(out) {}

  void formula(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::Falsum:
        text_ += 'F';
        return;
      case K::Atom:
        text_ += 'A';
        text_ += f.predicate();
        text_ += '(';
        for (const auto& t : f.args()) {
          term(t);
          text_ += ',';
        }
        text_ += ')';
        return;
      case K::Forall:
        text_ += f.bound().sort == Sort::Ack ? "Qa(" : "Qi(";
        binders_.push_back(f.bound().name);
        formula(f.body());
        binders_.pop_back();
        text_ += ')';
        return;
      case K::Guard:
        text_ += "G(";
        term(f.guard_left());
        text_ += '=';
        term(f.guard_right());
        text_ += ',';
        formula(f.body());
        text_ += ')';
        return;
      case K::Implies:
        text_ += "I(";
        formula(f.first());
        text_ += ',';
        formula(f.second());
        text_ += ')';
        return;
      default:
        throw Error("solver: sugar in a game formula");
    }
  }

  void term(const Term& t) {
    switch (t.kind()) {
      case Term::Kind::AckConst:
        if (root_.count(t.name())) {
          text_ += "c:" + t.name();
        } else {
          text_ += '?';
          out_.occurrences.push_back(t.name());
        }
        return;
      case Term::Kind::AckVar:
      case Term::Kind::IntVar: {
        auto it = std::find(binders_.rbegin(), binders_.rend(), t.name());
        text_ += it == binders_.rend() ? "v:" + t.name() : "#" + std::to_string(it - binders_.rbegin());
        return;
      }
      case Term::Kind::IntLit:
        text_ += std::to_string(t.value());
        return;
      case Term::Kind::FunApp:
        text_ += "f:" + t.name() + "(";
        for (const auto& a : t.args()) {
          term(a);
          text_ += ',';
        }
        text_ += ')';
        return;
    }
  }

  void finish() { out_.digest = mix(std::hash<std::string>{}(text_)); }

 private:
  const std::set<std::string>& root_;
  Skeleton& out_;
  std::string text_;
  std::vector<std::string> binders_;
};

/// Skeletons keyed by the concrete canonical key of a formula.
class SkeletonCache {
 public:
  explicit SkeletonCache(const Formula& root) {
    for (auto& c : constants_of(root)) root_.insert(c);
  }

  const Skeleton& get(const std::string& key, const Formula& f) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Skeleton s;
    SkeletonWriter w(root_, s);
    w.formula(f);
    w.finish();
    return cache_.emplace(key, std::move(s)).first->second;
  }

  bool is_root_constant(const std::string& c) const { return root_.count(c) != 0; }

 private:
  std::set<std::string> root_;
  std::unordered_map<std::string, Skeleton> cache_;
};

// ---------------------------------------------------------------------------
// canonical digests

constexpr std::size_t kMaxPermutations = 120;
constexpr std::uint64_t kMark = 0xffffffffULL;

struct TaggedSkeleton {
  char tag;
  const Skeleton* skel;
};

struct CanonInfo {
  StateHash hash{};
  std::vector<std::string> order;                      // rank -> constant
  std::unordered_map<std::string, std::size_t> rank;  // constant -> rank
};

std::uint64_t item_digest(std::uint64_t tag, const Skeleton& s, const std::unordered_map<std::string, std::size_t>& rank) {
  std::uint64_t h = combine(tag, s.digest);
  for (const auto& c : s.occurrences) h = combine(h, rank.at(c));
  return h;
}

std::vector<std::uint64_t> sorted_digests(const std::vector<TaggedSkeleton>& items,
                                          const std::unordered_map<std::string, std::size_t>& rank) {
  std::vector<std::uint64_t> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(item_digest(static_cast<std::uint64_t>(it.tag), *it.skel, rank));
  std::sort(out.begin(), out.end());
  return out;
}

CanonInfo canonicalize_items(const std::vector<TaggedSkeleton>& items) {
  // constants, in order of first occurrence
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& it : items)
    for (const auto& c : it.skel->occurrences)
      if (index.emplace(c, names.size()).second) names.push_back(c);
  const std::size_t r = names.size();

  std::vector<std::vector<std::size_t>> occ(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    for (const auto& c : items[i].skel->occurrences) occ[i].push_back(index[c]);

  std::vector<std::uint64_t> color(r, 0);
  std::size_t classes = r ? 1 : 0;
  for (std::size_t round = 0; r && round <= r; ++round) {
    std::vector<std::vector<std::uint64_t>> contrib(r);
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& o = occ[i];
      for (std::size_t p = 0; p < o.size(); ++p) {
        std::size_t c = o[p];
        if (std::find(o.begin(), o.begin() + static_cast<std::ptrdiff_t>(p), c) != o.begin() + static_cast<std::ptrdiff_t>(p))
          continue;
        std::uint64_t h = combine(static_cast<std::uint64_t>(items[i].tag), items[i].skel->digest);
        for (std::size_t q : o) h = combine(h, q == c ? kMark : color[q] + 1);
        contrib[c].push_back(h);
      }
    }
    std::vector<std::uint64_t> sig(r);
    for (std::size_t c = 0; c < r; ++c) {
      std::sort(contrib[c].begin(), contrib[c].end());
      std::uint64_t h = mix(color[c]);
      for (auto x : contrib[c]) h = combine(h, x);
      sig[c] = h;
    }
    std::vector<std::uint64_t> uniq = sig;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t c = 0; c < r; ++c)
      color[c] = static_cast<std::uint64_t>(std::lower_bound(uniq.begin(), uniq.end(), sig[c]) - uniq.begin());
    if (uniq.size() == classes) break;
    classes = uniq.size();
  }

  std::vector<std::size_t> order(r);
  for (std::size_t c = 0; c < r; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return color[a] < color[b]; });

  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t perms = 1;
  for (std::size_t i = 0; i < r;) {
    std::size_t j = i;
    while (j < r && color[order[j]] == color[order[i]]) ++j;
    if (j - i > 1) {
      groups.emplace_back(i, j);
      for (std::size_t k = 2; k <= j - i && perms <= kMaxPermutations; ++k) perms *= k;
    }
    i = j;
  }

  auto rank_of = [&](const std::vector<std::size_t>& ord) {
    std::unordered_map<std::string, std::size_t> rank;
    for (std::size_t k = 0; k < ord.size(); ++k) rank[names[ord[k]]] = k;
    return rank;
  };

  std::vector<std::size_t> best_order = order;
  std::vector<std::uint64_t> best;
  if (!groups.empty() && perms <= kMaxPermutations) {
    bool have = false;
    std::function<void(std::size_t)> search = [&](std::size_t g) {
      if (g == groups.size()) {
        auto d = sorted_digests(items, rank_of(order));
        if (!have || d < best) {
          best = std::move(d);
          best_order = order;
          have = true;
        }
        return;
      }
      auto [b, e] = groups[g];
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(b), order.begin() + static_cast<std::ptrdiff_t>(e));
      do {
        search(g + 1);
      } while (std::next_permutation(order.begin() + static_cast<std::ptrdiff_t>(b),
                                     order.begin() + static_cast<std::ptrdiff_t>(e)));
    };
    search(0);
  }

  CanonInfo info;
  info.rank = rank_of(best_order);
  for (std::size_t k : best_order) info.order.push_back(names[k]);
  if (best.empty()) best = sorted_digests(items, info.rank);
  std::uint64_t h0 = mix(best.size()), h1 = mix(best.size() ^ 0x5bd1e995ULL);
  for (auto x : best) {
    h0 = combine(h0, x);
    h1 = combine(h1 ^ 0xa0761d6478bd642fULL, x);
  }
  info.hash = {h0, h1};
  return info;
}

CanonInfo canon(const GameState& s, bool with_v, SkeletonCache& cache) {
  std::vector<TaggedSkeleton> items;
  items.reserve(s.U.size() + s.A.size() + (with_v ? s.V.size() : 0));
  for (std::size_t k = 0; k < s.U.size(); ++k) items.push_back({'U', &cache.get(s.U.keys()[k], s.U.items()[k])});
  for (std::size_t k = 0; k < s.A.size(); ++k) items.push_back({'A', &cache.get(s.A.keys()[k], s.A.items()[k])});
  if (with_v)
    for (std::size_t k = 0; k < s.V.size(); ++k) items.push_back({'V', &cache.get(s.V.keys()[k], s.V.items()[k])});
  return canonicalize_items(items);
}

// ---------------------------------------------------------------------------
// canonical moves

Term rename_term(const Term& t, const std::unordered_map<std::string, std::size_t>& rank) {
  switch (t.kind()) {
    case Term::Kind::AckConst: {
      auto it = rank.find(t.name());
      return it == rank.end() ? t : Term::constant("$" + std::to_string(it->second));
    }
    case Term::Kind::FunApp: {
      std::vector<Term> args;
      for (const auto& a : t.args()) args.push_back(rename_term(a, rank));
      return Term::app(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

Formula rename_constants(const Formula& f, const std::unordered_map<std::string, std::size_t>& rank) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom: {
      std::vector<Term> args;
      for (const auto& a : f.args()) args.push_back(rename_term(a, rank));
      return Formula::atom(f.predicate(), std::move(args));
    }
    case K::Implies:
      return Formula::implies(rename_constants(f.first(), rank), rename_constants(f.second(), rank));
    case K::Forall:
      return Formula::forall(f.bound(), rename_constants(f.body(), rank));
    case K::Guard:
      return Formula::guard(rename_term(f.guard_left(), rank), rename_term(f.guard_right(), rank),
                            rename_constants(f.body(), rank));
    default:
      return f;
  }
}

constexpr std::uint64_t kMoveTag = 'M';

CanonicalMove make_canonical_move(const Move& m, const CanonInfo& info, SkeletonCache& cache) {
  CanonicalMove cm;
  const std::string key = canonical_key(m.chosen.formula());
  cm.formula_digest = item_digest(kMoveTag, cache.get(key, m.chosen), info.rank);
  cm.formula_text = print_formula(rename_constants(m.chosen.formula(), info.rank));
  std::vector<std::string> fresh;
  for (const auto& v : m.values) {
    if (const auto* c = std::get_if<std::string>(&v)) {
      if (auto it = info.rank.find(*c); it != info.rank.end()) {
        cm.values.emplace_back("$" + std::to_string(it->second));
      } else if (cache.is_root_constant(*c)) {
        cm.values.emplace_back(*c);
      } else {
        auto f = std::find(fresh.begin(), fresh.end(), *c);
        std::size_t idx = static_cast<std::size_t>(f - fresh.begin());
        if (f == fresh.end()) fresh.push_back(*c);
        cm.values.emplace_back("*" + std::to_string(idx));
      }
    } else {
      cm.values.push_back(v);
    }
  }
  return cm;
}

}  // namespace

nlohmann::json Certificate::to_json() const {
  nlohmann::json moves_json = nlohmann::json::object();
  for (const auto& [k, m] : moves) {
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& v : m.values) {
      if (const auto* c = std::get_if<std::string>(&v))
        vals.push_back(*c);
      else
        vals.push_back(std::get<Natural>(v));
    }
    moves_json[to_hex(k)] = {{"formula", m.formula_text}, {"values", vals}};
  }
  return {{"side", std::string(pgame::to_string(side))}, {"moves", moves_json}};
}

StateHash strategy_key(const GameState& s) {
  SkeletonCache cache(s.root.formula());
  return canon(s, s.turn == Side::Opponent, cache).hash;
}

std::optional<Move> concretize(const GameState& s, const CanonicalMove& cm) {
  SkeletonCache cache(s.root.formula());
  CanonInfo info = canon(s, s.turn == Side::Opponent, cache);
  const FormulaSet& from = s.turn == Side::Opponent ? s.V : s.U;
  const NormalFormula* chosen = nullptr;
  for (std::size_t k = 0; k < from.size(); ++k) {
    if (item_digest(kMoveTag, cache.get(from.keys()[k], from.items()[k]), info.rank) == cm.formula_digest) {
      chosen = &from.items()[k];
      break;
    }
  }
  if (!chosen) return std::nullopt;
  Move m{s.turn, *chosen, {}};
  for (const auto& v : cm.values) {
    const auto* c = std::get_if<std::string>(&v);
    if (!c) {
      m.values.push_back(v);
    } else if (c->size() > 1 && (*c)[0] == '$') {
      std::size_t r = std::stoul(c->substr(1));
      if (r >= info.order.size()) return std::nullopt;
      m.values.emplace_back(info.order[r]);
    } else if (c->size() > 1 && (*c)[0] == '*') {
      m.values.emplace_back(fresh_constant(s, std::stoul(c->substr(1))));
    } else {
      m.values.push_back(v);
    }
  }
  return m;
}

namespace {

struct LimitHit {};
struct BudgetHit {};

enum class Mode { Valid, Invalid };

struct Option {
  Move move;
  Instance inst;
  std::size_t u_index = 0;
  std::size_t a_index = 0;
};

struct PlayerOptions {
  std::vector<Option> options;
  bool truncated = false;
};

std::size_t renamable_count(const GameState& s, const SkeletonCache& cache) {
  std::size_t n = 0;
  for (const auto& c : s.pool)
    if (!cache.is_root_constant(c)) ++n;
  return n;
}

// Player moves. Unconstrained ack coordinates draw from the pool (a pool
// constant is never worse than a fresh one); a fresh constant is used only
// when the pool is empty.
PlayerOptions player_options(const GameState& s, Mode mode, const SearchLimits& lim, const SkeletonCache& cache) {
  PlayerOptions out;
  const Signature& sig = *s.signature;
  const bool fresh_room = mode == Mode::Valid || renamable_count(s, cache) < lim.fresh_bound;
  std::vector<Option> closing, rest;
  for (std::size_t ui = s.U.size(); ui-- > 0;) {
    const NormalFormula& psi = s.U.items()[ui];
    const NormalView& view = psi.view();
    std::set<std::vector<Value>> seen;
    for (std::size_t ai = 0; ai < s.A.size(); ++ai) {
      const NormalFormula& alpha = s.A.items()[ai];
      std::map<Variable, Value> fixed;
      if (!match_atom(view.conclusion, alpha.formula(), fixed, sig)) continue;
      std::vector<std::vector<Value>> choices(view.prefix.size());
      bool skip = false;
      for (std::size_t k = 0; k < view.prefix.size() && !skip; ++k) {
        const Variable& x = view.prefix[k];
        if (auto it = fixed.find(x); it != fixed.end()) {
          choices[k] = {it->second};
        } else if (x.sort == Sort::Int) {
          if (mode == Mode::Invalid) {
            out.truncated = true;
            skip = true;
          } else {
            for (Natural n : int_candidates(s, lim.int_bound, psi, x)) choices[k].emplace_back(n);
          }
        } else if (!s.pool.empty()) {
          for (auto it = s.pool.rbegin(); it != s.pool.rend(); ++it) choices[k].emplace_back(*it);
        } else if (fresh_room) {
          choices[k] = {fresh_constant(s)};
        } else {
          out.truncated = true;
          skip = true;
        }
      }
      if (skip) continue;
      std::vector<Value> cur(view.prefix.size());
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == cur.size()) {
          if (!seen.insert(cur).second) return;
          Instance inst;
          try {
            inst = instantiate(psi, cur, sig);
          } catch (const Error&) {
            return;
          }
          if (!inst.guards_hold || !s.A.contains(inst.conclusion)) return;
          Option o{Move{Side::Player, psi, cur}, std::move(inst), ui, ai};
          (o.inst.premises.empty() ? closing : rest).push_back(std::move(o));
          return;
        }
        for (const auto& v : choices[k]) {
          cur[k] = v;
          rec(k + 1);
        }
      };
      rec(0);
    }
  }
  out.options = std::move(closing);
  for (auto& o : rest) out.options.push_back(std::move(o));
  return out;
}

// Opponent moves on one V formula. In the unbounded game fresh constants are
// never worse for the Opponent, so the Valid search offers only those; under
// a cap they use up room, so the Invalid search offers the pool as well.
std::vector<Option> opponent_options(const GameState& s, const NormalFormula& phi, Mode mode, const SearchLimits& lim,
                                     const SkeletonCache& cache) {
  const Signature& sig = *s.signature;
  const auto& prefix = phi.view().prefix;
  std::size_t acks = 0;
  for (const auto& x : prefix) acks += x.sort == Sort::Ack;
  std::size_t room = acks;
  bool fresh_only = true;
  if (mode == Mode::Invalid) {
    std::size_t used = renamable_count(s, cache);
    room = used >= lim.fresh_bound ? 0 : lim.fresh_bound - used;
    fresh_only = false;
  }
  std::vector<std::vector<Natural>> ints(prefix.size());
  for (std::size_t k = 0; k < prefix.size(); ++k)
    if (prefix[k].sort == Sort::Int) ints[k] = int_candidates(s, lim.int_bound, phi, prefix[k]);

  std::vector<Option> out;
  std::vector<Value> cur(prefix.size());
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t fresh_used) {
    if (k == prefix.size()) {
      Instance inst = instantiate(phi, cur, sig);
      out.push_back(Option{Move{Side::Opponent, phi, cur}, std::move(inst)});
      return;
    }
    if (prefix[k].sort == Sort::Int) {
      for (Natural n : ints[k]) {
        cur[k] = n;
        rec(k + 1, fresh_used);
      }
      return;
    }
    if (fresh_only) {
      cur[k] = fresh_constant(s, fresh_used);
      rec(k + 1, fresh_used + 1);
      return;
    }
    for (const auto& c : s.pool) {
      cur[k] = c;
      rec(k + 1, fresh_used);
    }
    for (std::size_t j = 0; j <= fresh_used && j < room; ++j) {
      cur[k] = fresh_constant(s, j);
      rec(k + 1, std::max(fresh_used, j + 1));
    }
  };
  rec(0, 0);
  return out;
}

GameState after_player(const GameState& s, const Option& o) {
  GameState n = s;
  n.V.clear();
  for (const auto& p : o.inst.premises) {
    absorb_formula(n, p.formula());
    n.V.insert(p);
  }
  absorb_values(n, o.move.values);
  n.turn = Side::Opponent;
  return n;
}

GameState after_opponent(const GameState& s, const Option& o) {
  GameState n = s;
  for (const auto& p : o.inst.premises) {
    absorb_formula(n, p.formula());
    n.U.insert(p);
  }
  absorb_formula(n, o.inst.conclusion);
  n.A.insert(NormalFormula(o.inst.conclusion));
  absorb_values(n, o.move.values);
  n.turn = Side::Player;
  return n;
}

// ---------------------------------------------------------------------------
// Valid: iterative deepening over Player states (U, A)

// What the last Opponent move added; a focused Player move touches one of
// these.
struct Focus {
  std::size_t u_from = 0;
  std::size_t a_from = 0;
  std::size_t pool_from = 0;
};

bool in_focus(const GameState& s, const Focus& f, const Option& o) {
  if (o.u_index >= f.u_from || o.a_index >= f.a_from) return true;
  for (const auto& v : o.move.values) {
    const auto* c = std::get_if<std::string>(&v);
    if (!c) continue;
    auto it = std::find(s.pool.begin(), s.pool.end(), *c);
    if (it == s.pool.end() || static_cast<std::size_t>(it - s.pool.begin()) >= f.pool_from) return true;
  }
  return false;
}

class ValidSearch {
 public:
  ValidSearch(const SearchLimits& lim, SkeletonCache& cache, std::size_t& states, bool focused,
              std::size_t budget = SIZE_MAX)
      : lim_(lim), cache_(cache), states_(states), focused_(focused), budget_(budget) {}

  /// Player wins within d Player moves from an Opponent-turn state.
  bool opponent_node(const GameState& s, std::size_t d) {
    const Focus f{s.U.size(), s.A.size(), s.pool.size()};
    std::size_t worst = 0;
    for (const auto& phi : s.V) {
      const std::uint64_t id = std::hash<std::string>{}(canonical_key(phi.formula()));
      for (const auto& o : opponent_options(s, phi, Mode::Valid, lim_, cache_)) {
        if (!o.inst.guards_hold) continue;
        expanded_.push_back(id);
        bool ok = player_node(after_opponent(s, o), d, f);
        expanded_.pop_back();
        if (!ok) return false;
        worst = std::max(worst, win_depth_);
      }
    }
    win_depth_ = worst;
    return true;
  }

  bool player_node(const GameState& s, std::size_t d, const Focus& focus = {}) {
    if (d == 0) {
      cut_ = true;
      return false;
    }
    CanonInfo ci = canon(s, false, cache_);
    auto [it, inserted] = memo_.try_emplace(ci.hash);
    if (inserted) {
      if (++states_ > lim_.max_canonical_states) throw LimitHit{};
      if (budget_-- == 0) throw BudgetHit{};
    }
    if (it->second.win && it->second.win <= d) {
      win_depth_ = it->second.win;
      return true;
    }
    if (it->second.fail >= d) {
      cut_ = cut_ || it->second.cut;
      return false;
    }
    const bool outer_cut = cut_;
    cut_ = false;
    PlayerOptions opts = player_options(s, Mode::Valid, lim_, cache_);
    for (const auto& o : opts.options) {
      if (o.inst.premises.empty()) return record_win(ci, 1, o, outer_cut);
      if (focused_ && !in_focus(s, focus, o)) continue;
      if (d == 1) {
        cut_ = true;
        break;
      }
      bool pruned = false;
      for (const auto& phi : o.inst.premises) {
        std::uint64_t id = std::hash<std::string>{}(canonical_key(phi.formula()));
        if (std::find(expanded_.begin(), expanded_.end(), id) != expanded_.end()) pruned = true;
      }
      if (pruned) continue;
      if (opponent_node(after_player(s, o), d - 1)) return record_win(ci, win_depth_ + 1, o, outer_cut);
    }
    Entry& e = memo_[ci.hash];
    e.fail = std::max(e.fail, d);
    e.cut = cut_;
    cut_ = outer_cut || cut_;
    return false;
  }

  bool cut() const { return cut_; }
  /// Player moves of the last win found.
  std::size_t win_depth() const { return win_depth_; }
  void reset_cut() { cut_ = false; }

  std::shared_ptr<Certificate> certificate() const {
    auto cert = std::make_shared<Certificate>();
    cert->side = Side::Player;
    for (const auto& [k, e] : memo_)
      if (e.win && e.best) cert->moves.emplace(k, *e.best);
    return cert;
  }

 private:
  struct Entry {
    std::size_t win = 0;
    std::size_t fail = 0;
    bool cut = false;
    std::optional<CanonicalMove> best;
  };

  bool record_win(const CanonInfo& ci, std::size_t d, const Option& o, bool outer_cut) {
    Entry& e = memo_[ci.hash];
    if (!e.win || d < e.win) {
      e.win = d;
      e.best = make_canonical_move(o.move, ci, cache_);
    }
    win_depth_ = e.win;
    cut_ = outer_cut;
    return true;
  }

  const SearchLimits& lim_;
  SkeletonCache& cache_;
  std::size_t& states_;
  std::unordered_map<StateHash, Entry, StateHashHasher> memo_;
  std::vector<std::uint64_t> expanded_;
  bool cut_ = false;
  bool focused_ = false;
  std::size_t budget_;
  std::size_t win_depth_ = 0;
};

// ---------------------------------------------------------------------------
// Invalid: explicit graph under a constant cap, Player attractor

struct GraphResult {
  bool opponent_wins = false;
  std::shared_ptr<Certificate> certificate;
};

GraphResult invalid_search(const GameState& start, const SearchLimits& lim, SkeletonCache& cache,
                           std::size_t& states) {
  struct Node {
    bool opp = false;
    bool win = false;
    std::size_t pending = 0;
    StateHash hash{};
    std::vector<std::uint32_t> preds;
    std::vector<std::pair<std::uint32_t, CanonicalMove>> edges;  // opponent nodes only
  };
  std::vector<Node> nodes;
  std::unordered_map<StateHash, std::uint32_t, StateHashHasher> ids;
  std::vector<std::pair<std::uint32_t, GameState>> queue;

  auto node_for = [&](const GameState& s, CanonInfo* info_out) -> std::uint32_t {
    const bool opp = s.turn == Side::Opponent;
    CanonInfo ci = canon(s, opp, cache);
    StateHash h = ci.hash;
    h[1] ^= opp ? 0x1ULL : 0x2ULL;
    if (info_out) *info_out = ci;
    auto [it, inserted] = ids.try_emplace(h, static_cast<std::uint32_t>(nodes.size()));
    if (inserted) {
      if (++states > lim.max_canonical_states) throw LimitHit{};
      Node n;
      n.opp = opp;
      n.hash = ci.hash;
      nodes.push_back(std::move(n));
      queue.emplace_back(it->second, s);
    }
    return it->second;
  };

  const std::uint32_t root = node_for(start, nullptr);
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::uint32_t id = queue[qi].first;
    GameState s = std::move(queue[qi].second);
    if (!nodes[id].opp) {
      PlayerOptions opts = player_options(s, Mode::Invalid, lim, cache);
      if (opts.truncated || (!opts.options.empty() && opts.options.front().inst.premises.empty())) {
        nodes[id].win = true;
        continue;
      }
      std::set<std::uint32_t> kids;
      for (const auto& o : opts.options) kids.insert(node_for(after_player(s, o), nullptr));
      for (auto k : kids) nodes[k].preds.push_back(id);
    } else {
      CanonInfo ci;
      node_for(s, &ci);
      std::set<std::uint32_t> kids;
      std::vector<std::pair<std::uint32_t, CanonicalMove>> edges;
      for (const auto& phi : s.V) {
        for (const auto& o : opponent_options(s, phi, Mode::Invalid, lim, cache)) {
          if (!o.inst.guards_hold) continue;
          std::uint32_t k = node_for(after_opponent(s, o), nullptr);
          if (kids.insert(k).second) edges.emplace_back(k, make_canonical_move(o.move, ci, cache));
        }
      }
      for (auto k : kids) nodes[k].preds.push_back(id);
      nodes[id].pending = kids.size();
      nodes[id].edges = std::move(edges);
      if (kids.empty()) nodes[id].win = true;
    }
    queue[qi].second = GameState{};
  }

  std::vector<std::uint32_t> work;
  for (std::uint32_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].win) work.push_back(i);
  while (!work.empty()) {
    std::uint32_t n = work.back();
    work.pop_back();
    for (std::uint32_t p : nodes[n].preds) {
      Node& pn = nodes[p];
      if (pn.win) continue;
      if (!pn.opp || --pn.pending == 0) {
        pn.win = true;
        work.push_back(p);
      }
    }
  }

  GraphResult r;
  r.opponent_wins = !nodes[root].win;
  if (r.opponent_wins) {
    auto cert = std::make_shared<Certificate>();
    cert->side = Side::Opponent;
    for (const auto& n : nodes) {
      if (!n.opp || n.win) continue;
      for (const auto& [k, cm] : n.edges) {
        if (!nodes[k].win) {
          cert->moves.emplace(n.hash, cm);
          break;
        }
      }
    }
    r.certificate = std::move(cert);
  }
  return r;
}

// Ground formulas: a valuation with U true, A false and (on the Opponent's
// turn) some V formula false gives an Opponent strategy that never loses:
// play a false V formula. Its premises join U (true), its conclusion joins A
// (false), and any Player answer is true with a false conclusion, so it
// leaves a false premise in V.

class GroundModel {
 public:
  bool add_atoms(const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Falsum:
        return true;
      case Formula::Kind::Atom: {
        const std::string k = canonical_key(f);
        if (!index_.count(k)) index_.emplace(k, index_.size());
        return true;
      }
      case Formula::Kind::Implies:
        return add_atoms(f.first()) && add_atoms(f.second());
      case Formula::Kind::Guard:
        return add_atoms(f.body());
      default:
        return false;
    }
  }
  std::size_t atom_count() const { return index_.size(); }

  std::uint32_t compile(const Formula& f, const Signature& sig) {
    Node n;
    switch (f.kind()) {
      case Formula::Kind::Falsum:
        n.kind = Node::False;
        break;
      case Formula::Kind::Atom:
        n.kind = Node::Atom;
        n.a = static_cast<std::uint32_t>(index_.at(canonical_key(f)));
        break;
      case Formula::Kind::Guard:
        n.kind = evaluate_term(f.guard_left(), sig) == evaluate_term(f.guard_right(), sig) ? Node::Body : Node::True;
        n.a = compile(f.body(), sig);
        break;
      default:
        n.kind = Node::Implies;
        n.a = compile(f.first(), sig);
        n.b = compile(f.second(), sig);
        break;
    }
    nodes_.push_back(n);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  bool eval(std::uint32_t id, std::uint32_t mask) const {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case Node::False:
        return false;
      case Node::True:
        return true;
      case Node::Atom:
        return (mask >> n.a) & 1U;
      case Node::Body:
        return eval(n.a, mask);
      case Node::Implies:
        return !eval(n.a, mask) || eval(n.b, mask);
    }
    return false;
  }

 private:
  struct Node {
    enum Kind : std::uint8_t { False, True, Atom, Body, Implies } kind = False;
    std::uint32_t a = 0, b = 0;
  };
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Node> nodes_;
};

constexpr std::size_t kMaxGroundAtoms = 16;

std::shared_ptr<Certificate> ground_refutation(const GameState& start, const SearchLimits& lim, SkeletonCache& cache,
                                               std::size_t& states) {
  if (!variable_names(start.root.formula()).empty()) return nullptr;
  const Signature& sig = *start.signature;
  GroundModel model;
  if (!model.add_atoms(start.root.formula())) return nullptr;
  for (const auto* set : {&start.U, &start.V, &start.A})
    for (const auto& f : *set)
      if (!model.add_atoms(f.formula())) return nullptr;
  if (model.atom_count() > kMaxGroundAtoms) return nullptr;

  std::unordered_map<std::string, std::uint32_t> compiled;
  auto id_of = [&](const NormalFormula& f) {
    const std::string k = canonical_key(f.formula());
    auto it = compiled.find(k);
    if (it == compiled.end()) {
      if (!model.add_atoms(f.formula()) || model.atom_count() > kMaxGroundAtoms) throw LimitHit{};
      it = compiled.emplace(k, model.compile(f.formula(), sig)).first;
    }
    return it->second;
  };
  auto holds = [&](const GameState& s, std::uint32_t mask) {
    for (const auto& f : s.U)
      if (!model.eval(id_of(f), mask)) return false;
    for (const auto& f : s.A)
      if (model.eval(id_of(f), mask)) return false;
    if (s.turn == Side::Player) return true;
    for (const auto& f : s.V)
      if (!model.eval(id_of(f), mask)) return true;
    return false;
  };

  try {
    std::optional<std::uint32_t> found;
    for (std::uint32_t mask = 0; mask < (1U << model.atom_count()) && !found; ++mask)
      if (holds(start, mask)) found = mask;
    if (!found) return nullptr;
    const std::uint32_t mask = *found;

    auto cert = std::make_shared<Certificate>();
    cert->side = Side::Opponent;
    std::unordered_set<StateHash, StateHashHasher> seen;
    std::vector<GameState> queue{start};
    std::size_t used = 0;
    while (!queue.empty()) {
      GameState s = std::move(queue.back());
      queue.pop_back();
      const bool opp = s.turn == Side::Opponent;
      CanonInfo ci = canon(s, opp, cache);
      StateHash h = ci.hash;
      h[1] ^= opp ? 0x1ULL : 0x2ULL;
      if (!seen.insert(h).second) continue;
      if (++used > lim.max_canonical_states) {
        states += used;
        return nullptr;
      }
      if (opp) {
        const NormalFormula* phi = nullptr;
        for (const auto& f : s.V)
          if (!model.eval(id_of(f), mask)) {
            phi = &f;
            break;
          }
        if (!phi) return nullptr;
        auto opts = opponent_options(s, *phi, Mode::Valid, lim, cache);
        if (opts.size() != 1 || !opts.front().inst.guards_hold) return nullptr;
        cert->moves.emplace(ci.hash, make_canonical_move(opts.front().move, ci, cache));
        queue.push_back(after_opponent(s, opts.front()));
      } else {
        PlayerOptions po = player_options(s, Mode::Valid, lim, cache);
        if (po.truncated) return nullptr;
        for (const auto& o : po.options) {
          GameState next = after_player(s, o);
          if (next.V.empty() || !holds(next, mask)) return nullptr;
          queue.push_back(std::move(next));
        }
      }
    }
    states += used;
    return cert;
  } catch (const LimitHit&) {
    return nullptr;
  }
}

}  // namespace

namespace {

std::size_t next_depth(std::size_t d, std::size_t max_depth) {
  return std::min(max_depth, d < 4 ? d + 1 : d + d / 2);
}

}  // namespace

Verdict solve_from(const GameState& s, const SearchLimits& limits) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  SkeletonCache cache(s.root.formula());
  std::size_t states = 0;
  auto finish = [&](Verdict::Kind k) {
    v.kind = k;
    v.stats.states = states;
    v.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
  };
  if (s.outcome.finished()) {
    if (s.outcome.kind == Outcome::Kind::PlayerWins) return finish(Verdict::Kind::Valid);
    return finish(Verdict::Kind::Unknown);
  }

  if (auto cert = ground_refutation(s, limits, cache, states)) {
    v.certificate = std::move(cert);
    return finish(Verdict::Kind::Invalid);
  }

  bool exhausted = false;
  try {
    try {
      ValidSearch quick(limits, cache, states, true, limits.max_canonical_states / 64);
      for (std::size_t d = 1; d <= std::min<std::size_t>(2, limits.max_depth); ++d) {
        quick.reset_cut();
        if (s.turn == Side::Opponent ? quick.opponent_node(s, d) : quick.player_node(s, d)) {
          v.stats.depth = quick.win_depth();
          v.certificate = quick.certificate();
          return finish(Verdict::Kind::Valid);
        }
        if (!quick.cut()) break;
      }
    } catch (const BudgetHit&) {
    }
    try {
      ValidSearch probe(limits, cache, states, true, limits.max_canonical_states / 8);
      if (s.turn == Side::Opponent ? probe.opponent_node(s, limits.max_depth) : probe.player_node(s, limits.max_depth)) {
        v.stats.depth = probe.win_depth();
        v.certificate = probe.certificate();
        return finish(Verdict::Kind::Valid);
      }
    } catch (const BudgetHit&) {
    }
    for (bool focused : {true, false}) {
      ValidSearch search(limits, cache, states, focused);
      for (std::size_t d = 1, last = 0; last < limits.max_depth; last = d, d = next_depth(d, limits.max_depth)) {
        search.reset_cut();
        bool win = s.turn == Side::Opponent ? search.opponent_node(s, d) : search.player_node(s, d);
        v.stats.depth = d;
        if (win) {
          v.stats.depth = search.win_depth();
          v.certificate = search.certificate();
          return finish(Verdict::Kind::Valid);
        }
        if (!search.cut()) {
          exhausted = !focused;
          break;
        }
      }
    }
  } catch (const LimitHit&) {
    v.stats.limit = "max_canonical_states";
    return finish(Verdict::Kind::Unknown);
  }
  if (!exhausted) v.stats.limit = "max_depth";

  try {
    GraphResult g = invalid_search(s, limits, cache, states);
    if (g.opponent_wins) {
      v.certificate = std::move(g.certificate);
      v.stats.limit.clear();
      return finish(Verdict::Kind::Invalid);
    }
    if (v.stats.limit.empty()) v.stats.limit = "fresh_bound";
  } catch (const LimitHit&) {
    v.stats.limit = "max_canonical_states";
  }
  return finish(Verdict::Kind::Unknown);
}

Verdict solve(const NormalFormula& f, std::shared_ptr<const Signature> sig, const SearchLimits& limits) {
  return solve_from(init_game(f, std::move(sig)), limits);
}

std::vector<OmegaInstance> check_omega_instances(const NormalFormula& f, std::shared_ptr<const Signature> sig,
                                                 const std::vector<Natural>& n_values, const SearchLimits& limits) {
  GameState s0 = init_game(f, std::move(sig));
  const auto& prefix = f.view().prefix;
  auto first_int = std::find_if(prefix.begin(), prefix.end(), [](const Variable& x) { return x.sort == Sort::Int; });
  if (first_int == prefix.end()) throw Error("check_omega_instances: the root formula has no integer quantifier");
  std::vector<OmegaInstance> out;
  for (Natural n : n_values) {
    std::vector<Value> values;
    std::size_t fresh = 0;
    for (auto it = prefix.begin(); it != prefix.end(); ++it) {
      if (it == first_int)
        values.emplace_back(n);
      else if (it->sort == Sort::Int)
        values.emplace_back(Natural{0});
      else
        values.emplace_back(fresh_constant(s0, fresh++));
    }
    GameState s = apply_move(s0, Move{Side::Opponent, f, values});
    out.push_back({n, solve_from(s, limits)});
  }
  return out;
}

Move greedy_player(const GameState& s, const SearchLimits& limits) {
  if (s.turn != Side::Player || s.outcome.finished()) throw Error("greedy_player: not the player's turn");
  SkeletonCache cache(s.root.formula());
  PlayerOptions opts = player_options(s, Mode::Valid, limits, cache);
  if (opts.options.empty()) throw Error("greedy_player: no legal move");
  if (opts.options.front().inst.premises.empty()) return opts.options.front().move;
  Verdict v = solve_from(s, limits);
  if (v.kind == Verdict::Kind::Valid && v.certificate) {
    auto it = v.certificate->moves.find(strategy_key(s));
    if (it != v.certificate->moves.end())
      if (auto m = concretize(s, it->second)) return *m;
  }
  // most recently added formula other than the root negation
  for (const auto& o : opts.options)
    if (!o.move.chosen.formula().same_node(s.U.items().front().formula())) return o.move;
  return opts.options.front().move;
}

}  // namespace pgame
