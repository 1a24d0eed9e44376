#include "pgame/normal.hpp"

#include <algorithm>

namespace pgame {

std::size_t NormalView::formula_premise_count() const {
  return static_cast<std::size_t>(
      std::count_if(premises.begin(), premises.end(), [](const Premise& p) { return !is_guard(p); }));
}

std::optional<NormalView> decompose(const Formula& f) {
  using K = Formula::Kind;
  NormalView v;
  const Formula* cur = &f;
  while (cur->kind() == K::Forall) {
    v.prefix.push_back(cur->bound());
    cur = &cur->body();
  }
  for (;;) {
    switch (cur->kind()) {
      case K::Falsum:
      case K::Atom:
        v.conclusion = *cur;
        return v;
      case K::Implies:
        v.premises.emplace_back(cur->first());
        cur = &cur->second();
        break;
      case K::Guard:
        v.premises.emplace_back(Equation{cur->guard_left(), cur->guard_right()});
        cur = &cur->body();
        break;
      default:
        return std::nullopt;
    }
  }
}

Formula rebuild(const NormalView& v) {
  Formula out = v.conclusion;
  for (auto it = v.premises.rbegin(); it != v.premises.rend(); ++it) {
    if (const auto* eq = std::get_if<Equation>(&*it))
      out = Formula::guard(eq->left, eq->right, out);
    else
      out = Formula::implies(std::get<Formula>(*it), out);
  }
  return Formula::forall(v.prefix, out);
}

bool is_normal(const Formula& f) {
  if (!f.is_core()) return false;
  auto v = decompose(f);
  if (!v) return false;
  for (std::size_t i = 0; i < v->prefix.size(); ++i)
    for (std::size_t j = i + 1; j < v->prefix.size(); ++j)
      if (v->prefix[i].name == v->prefix[j].name) return false;
  for (const auto& p : v->premises)
    if (const auto* g = std::get_if<Formula>(&p); g && !is_normal(*g)) return false;
  return true;
}

NormalFormula::NormalFormula(Formula f) : formula_(std::move(f)) {
  if (!is_normal(formula_)) throw Error("formula is not in normal form");
  view_ = std::make_shared<const NormalView>(*decompose(formula_));
}

std::string FreshNames::next(Sort sort) {
  static constexpr const char* ack_names[] = {"x", "y", "z", "u", "v", "w"};
  static constexpr const char* int_names[] = {"i", "j", "k", "l", "m", "n"};
  const auto& base = sort == Sort::Ack ? ack_names : int_names;
  for (int round = 0;; ++round) {
    for (const char* b : base) {
      std::string cand = round == 0 ? std::string(b) : std::string(b) + std::to_string(round);
      if (used_.insert(cand).second) return cand;
    }
  }
}

namespace {

void rename_prefix_var(NormalView& v, std::size_t index, const std::string& fresh) {
  const Variable old = v.prefix[index];
  const Term t = Term::var(Variable{fresh, old.sort});
  for (auto& p : v.premises) {
    if (auto* eq = std::get_if<Equation>(&p)) {
      eq->left = replace_free(eq->left, old, t);
      eq->right = replace_free(eq->right, old, t);
    } else {
      p = replace_free(std::get<Formula>(p), old, t);
    }
  }
  v.conclusion = replace_free(v.conclusion, old, t);
  v.prefix[index].name = fresh;
}

std::set<std::string> term_names(const Term& t) {
  std::set<std::string> out;
  for (const auto& v : free_vars(t)) out.insert(v.name);
  return out;
}

NormalView norm(const Formula& f, FreshNames& fresh) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Falsum:
    case K::Atom:
      return NormalView{{}, {}, f};
    case K::Forall: {
      NormalView v = norm(f.body(), fresh);
      for (std::size_t i = 0; i < v.prefix.size(); ++i)
        if (v.prefix[i].name == f.bound().name) rename_prefix_var(v, i, fresh.next(v.prefix[i].sort));
      v.prefix.insert(v.prefix.begin(), f.bound());
      return v;
    }
    case K::Guard: {
      NormalView v = norm(f.body(), fresh);
      auto names = term_names(f.guard_left());
      names.merge(term_names(f.guard_right()));
      for (std::size_t i = 0; i < v.prefix.size(); ++i)
        if (names.contains(v.prefix[i].name)) rename_prefix_var(v, i, fresh.next(v.prefix[i].sort));
      v.premises.insert(v.premises.begin(), Equation{f.guard_left(), f.guard_right()});
      return v;
    }
    case K::Implies: {
      Formula premise = rebuild(norm(f.first(), fresh));
      NormalView v = norm(f.second(), fresh);
      auto names = variable_names(premise);
      for (std::size_t i = 0; i < v.prefix.size(); ++i)
        if (names.contains(v.prefix[i].name)) rename_prefix_var(v, i, fresh.next(v.prefix[i].sort));
      v.premises.insert(v.premises.begin(), premise);
      return v;
    }
    default:
      throw Error("normalize: formula contains unexpanded connectives");
  }
}

}  // namespace

NormalFormula normalize(const Formula& f) {
  if (!f.is_core()) throw Error("normalize: formula contains unexpanded connectives");
  FreshNames fresh(variable_names(f));
  return NormalFormula(rebuild(norm(f, fresh)));
}

}  // namespace pgame
