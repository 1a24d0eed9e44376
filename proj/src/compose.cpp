#include "pgame/compose.hpp"

#include <algorithm>

namespace pgame {

std::vector<AtomicOccurrence> final_occurrences(const NormalFormula& f) {
  std::vector<AtomicOccurrence> out;
  for (auto& occ : occurrences(f.formula()))
    if (occ.is_final()) out.push_back(std::move(occ));
  return out;
}

NormalFormula compose(const NormalFormula& f, const NormalFormula& g) {
  if (!is_closed(f.formula())) throw Error("compose: first formula is not closed");
  if (!is_closed(g.formula())) throw Error("compose: second formula is not closed");
  auto finals = final_occurrences(f);
  Formula h = f.formula();
  for (auto it = finals.rbegin(); it != finals.rend(); ++it)
    h = replace_at(h, it->path, Formula::implies(g.formula(), it->atom));
  return normalize(h);
}

Signature merge_signatures(const Signature& a, const Signature& b) {
  Signature out = a;
  for (const auto& [name, sorts] : b.predicates()) {
    if (const auto* existing = out.predicate(name)) {
      if (*existing != sorts) throw Error("predicate '" + name + "' is declared with different sorts");
      continue;
    }
    out.add_predicate(name, sorts);
  }
  for (const auto& [name, fn] : b.functions()) {
    if (const auto* existing = out.function(name)) {
      if (existing->arity != fn.arity || existing->builtin != fn.builtin)
        throw Error("function '" + name + "' is declared differently");
      continue;
    }
    if (!fn.builtin.empty())
      out.add_builtin_function(name, fn.arity, fn.builtin);
    else
      out.add_function(name, fn.arity, fn.eval);
  }
  for (const auto& c : b.constants())
    if (!out.has_constant(c)) out.add_constant(c);
  return out;
}

}  // namespace pgame
