#include "pgame/occurrence.hpp"

#include "pgame/normal.hpp"

namespace pgame {

namespace {

Polarity flip(Polarity p) { return p == Polarity::Positive ? Polarity::Negative : Polarity::Positive; }

void collect(const Formula& f, Path& path, Polarity sign, std::vector<AtomicOccurrence>& out) {
  using K = Formula::Kind;
  const std::size_t depth = path.size();
  const Formula* cur = &f;
  while (cur->kind() == K::Forall) {
    path.push_back(Step::ForallBody);
    cur = &cur->body();
  }
  std::size_t hypotheses = 0;
  for (;;) {
    if (cur->kind() == K::Implies) {
      path.push_back(Step::Premise);
      collect(cur->first(), path, flip(sign), out);
      path.back() = Step::Conclusion;
      ++hypotheses;
      cur = &cur->second();
    } else if (cur->kind() == K::Guard) {
      path.push_back(Step::GuardBody);
      cur = &cur->body();
    } else {
      break;
    }
  }
  out.push_back(AtomicOccurrence{path, sign, hypotheses, *cur});
  path.resize(depth);
}

}  // namespace

std::vector<AtomicOccurrence> occurrences(const Formula& f) {
  if (!is_normal(f)) throw Error("occurrences: formula is not in normal form");
  std::vector<AtomicOccurrence> out;
  Path path;
  collect(f, path, Polarity::Positive, out);
  return out;
}

const Formula& subformula_at(const Formula& f, const Path& path) {
  const Formula* cur = &f;
  for (Step s : path) {
    switch (s) {
      case Step::Premise:
        cur = &cur->first();
        break;
      case Step::Conclusion:
        cur = &cur->second();
        break;
      case Step::ForallBody:
      case Step::GuardBody:
        cur = &cur->body();
        break;
    }
  }
  return *cur;
}

namespace {

Formula replace_rec(const Formula& f, const Path& path, std::size_t i, const Formula& r) {
  if (i == path.size()) return r;
  switch (path[i]) {
    case Step::Premise:
      return Formula::implies(replace_rec(f.first(), path, i + 1, r), f.second());
    case Step::Conclusion:
      return Formula::implies(f.first(), replace_rec(f.second(), path, i + 1, r));
    case Step::ForallBody:
      return Formula::forall(f.bound(), replace_rec(f.body(), path, i + 1, r));
    case Step::GuardBody:
      return Formula::guard(f.guard_left(), f.guard_right(), replace_rec(f.body(), path, i + 1, r));
  }
  return f;
}

}  // namespace

Formula replace_at(const Formula& f, const Path& path, const Formula& replacement) {
  return replace_rec(f, path, 0, replacement);
}

std::string to_string(const Path& path) {
  static constexpr char tags[] = {'L', 'R', 'B', 'G'};
  std::string s;
  for (Step st : path) s += tags[static_cast<int>(st)];
  return s.empty() ? "." : s;
}

}  // namespace pgame
