#pragma once

// Builders for the acknowledgement-protocol family.

#include <string>
#include <vector>

#include "pgame/formula.hpp"

namespace pgame {

/// exists x forall y (P x -> P y), sugar-expanded: one packet and its ack.
Formula single_packet(const std::string& predicate);

/// F1 = exists x forall y (P1 x -> P1 y),
/// F(k+1) = exists x forall y ((Fk -> P(k+1) x) -> P(k+1) y).
///
/// Predicates default to P1..Pn and must be declared unary over ack.
/// The result is sugar-free and normal.
Formula make_ack_chain(std::size_t n, const Signature& sig, std::vector<std::string> predicates = {});

}  // namespace pgame
