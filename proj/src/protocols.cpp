#include "pgame/protocols.hpp"

namespace pgame {

namespace {

const Variable kX{"x", Sort::Ack};
const Variable kY{"y", Sort::Ack};

Formula packet_exchange(const std::string& p, const Formula* inner) {
  Formula header = Formula::atom(p, {Term::var(kX)});
  if (inner) header = Formula::implies(*inner, header);
  Formula body = Formula::forall(kY, Formula::implies(header, Formula::atom(p, {Term::var(kY)})));
  return expand_sugar(Formula::exists(kX, body));
}

}  // namespace

Formula single_packet(const std::string& predicate) { return packet_exchange(predicate, nullptr); }

Formula make_ack_chain(std::size_t n, const Signature& sig, std::vector<std::string> predicates) {
  if (n == 0) throw Error("make_ack_chain: n must be at least 1");
  if (predicates.empty())
    for (std::size_t k = 1; k <= n; ++k) predicates.push_back("P" + std::to_string(k));
  if (predicates.size() != n) throw Error("make_ack_chain: need exactly n predicate names");
  for (const auto& p : predicates) {
    const auto* sorts = sig.predicate(p);
    if (!sorts) throw Error("make_ack_chain: undeclared predicate '" + p + "'");
    if (*sorts != std::vector<Sort>{Sort::Ack})
      throw SortError("make_ack_chain: predicate '" + p + "' must take one ack argument", "");
  }
  Formula f = packet_exchange(predicates[0], nullptr);
  for (std::size_t k = 1; k < n; ++k) f = packet_exchange(predicates[k], &f);
  return f;
}

}  // namespace pgame
