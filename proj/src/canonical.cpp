#include "pgame/canonical.hpp"

#include <algorithm>
#include <map>
#include <functional>
#include <optional>
#include <set>

namespace pgame {

namespace {

constexpr std::size_t kMaxPermutations = 120;

std::string full_key(std::span<const std::pair<char, Formula>> items, const ConstantRenaming& ren) {
  std::vector<std::string> parts;
  parts.reserve(items.size());
  for (const auto& [tag, f] : items) parts.push_back(tag + canonical_key(f, &ren));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) {
    out += p;
    out += ';';
  }
  return out;
}

ConstantRenaming renaming_for(const std::vector<std::string>& order) {
  ConstantRenaming ren;
  for (std::size_t i = 0; i < order.size(); ++i) ren[order[i]] = "$" + std::to_string(i);
  return ren;
}

std::size_t factorial_capped(std::size_t n) {
  std::size_t r = 1;
  for (std::size_t k = 2; k <= n; ++k) {
    r *= k;
    if (r > kMaxPermutations) return kMaxPermutations + 1;
  }
  return r;
}

}  // namespace

Canonical canonicalize(std::span<const std::pair<char, Formula>> items, const std::vector<std::string>& renamable) {
  Canonical out;
  if (renamable.empty()) {
    out.key = full_key(items, {});
    return out;
  }

  std::vector<std::vector<std::string>> item_consts(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) item_consts[i] = constants_of(items[i].second);
  std::map<std::string, std::size_t> color;
  for (const auto& c : renamable) color[c] = 0;

  // color refinement
  std::size_t classes = 1;
  for (std::size_t round = 0; round <= renamable.size(); ++round) {
    std::map<std::string, std::string> sig;
    for (const auto& c : renamable) {
      ConstantRenaming ren;
      for (const auto& d : renamable) ren[d] = d == c ? "@" : "?" + std::to_string(color[d]);
      std::vector<std::string> parts;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (std::find(item_consts[i].begin(), item_consts[i].end(), c) != item_consts[i].end())
          parts.push_back(items[i].first + canonical_key(items[i].second, &ren));
      std::sort(parts.begin(), parts.end());
      std::string s = std::to_string(color[c]) + "|";
      for (const auto& p : parts) s += p + ";";
      sig[c] = std::move(s);
    }
    std::set<std::string> distinct;
    for (const auto& [c, s] : sig) distinct.insert(s);
    std::vector<std::string> ranked(distinct.begin(), distinct.end());
    for (const auto& c : renamable)
      color[c] = static_cast<std::size_t>(std::lower_bound(ranked.begin(), ranked.end(), sig[c]) - ranked.begin());
    if (ranked.size() == classes) break;
    classes = ranked.size();
  }

  // renamable is in first-appearance order; stable sort keeps it within ties
  std::vector<std::string> order = renamable;
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) { return color[a] < color[b]; });

  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  std::size_t perms = 1;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && color[order[j]] == color[order[i]]) ++j;
    if (j - i > 1) {
      groups.emplace_back(i, j);
      perms *= factorial_capped(j - i);
      if (perms > kMaxPermutations) perms = kMaxPermutations + 1;
    }
    i = j;
  }

  if (groups.empty() || perms > kMaxPermutations) {
    out.order = std::move(order);
    out.renaming = renaming_for(out.order);
    out.key = full_key(items, out.renaming);
    return out;
  }

  for (auto& [b, e] : groups) std::sort(order.begin() + b, order.begin() + e);
  std::optional<std::string> best;
  std::vector<std::string> best_order;
  std::function<void(std::size_t)> search = [&](std::size_t g) {
    if (g == groups.size()) {
      auto ren = renaming_for(order);
      std::string k = full_key(items, ren);
      if (!best || k < *best) {
        best = std::move(k);
        best_order = order;
      }
      return;
    }
    auto [b, e] = groups[g];
    do {
      search(g + 1);
    } while (std::next_permutation(order.begin() + b, order.begin() + e));
  };
  search(0);
  out.order = std::move(best_order);
  out.renaming = renaming_for(out.order);
  out.key = std::move(*best);
  return out;
}

std::vector<std::string> renamable_constants(const GameState& s) {
  auto fixed = constants_of(s.root.formula());
  std::vector<std::string> out;
  for (const auto& c : s.pool)
    if (std::find(fixed.begin(), fixed.end(), c) == fixed.end()) out.push_back(c);
  return out;
}

Canonical canonical_state(const GameState& s) {
  std::vector<std::pair<char, Formula>> items;
  for (const auto& f : s.U) items.emplace_back('U', f.formula());
  for (const auto& f : s.V) items.emplace_back('V', f.formula());
  for (const auto& f : s.A) items.emplace_back('A', f.formula());
  Canonical c = canonicalize(items, renamable_constants(s));
  std::string head = s.turn == Side::Opponent ? "O" : "P";
  if (s.outcome.finished()) head += "!";
  c.key = head + "|" + c.key;
  return c;
}

}  // namespace pgame
