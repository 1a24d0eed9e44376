#pragma once

// Randomized property suites shared by the unit tests and the acceptance run.

#include <cstdint>
#include <string>

namespace pgame::testing {

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok(std::size_t min_cases) const { return failures == 0 && cases >= min_cases; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
};

PropertyResult normalization_properties(std::uint64_t seed, std::size_t cases);
PropertyResult alpha_equivalence_laws(std::uint64_t seed, std::size_t cases);
/// U and A only grow, and the Player always has a move, along random plays.
PropertyResult play_monotonicity(std::uint64_t seed, std::size_t cases);
/// Every formula gets Valid or Invalid; propositional ones agree with truth tables.
PropertyResult solver_determinacy(std::uint64_t seed, std::size_t cases);
/// Certificates win against random and greedy adversaries.
PropertyResult certificate_replay(std::uint64_t seed, std::size_t cases);
/// Equal seeds give equal traces, and traces agree with the annotator.
PropertyResult simulation_determinism(std::uint64_t seed, std::size_t cases);

}  // namespace pgame::testing
