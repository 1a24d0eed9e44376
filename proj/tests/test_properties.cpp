#include <gtest/gtest.h>

#include "support/properties.hpp"

using namespace pgame::testing;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kCases = 200;

void expect_ok(const PropertyResult& r) {
  EXPECT_EQ(r.failures, 0u) << r.name << ": " << r.first_failure;
  EXPECT_GE(r.cases, kCases) << r.name;
}

}  // namespace

TEST(Properties, Normalization) { expect_ok(normalization_properties(kSeed, kCases)); }
TEST(Properties, AlphaEquivalence) { expect_ok(alpha_equivalence_laws(kSeed, kCases)); }
TEST(Properties, PlayMonotonicity) { expect_ok(play_monotonicity(kSeed, kCases)); }
TEST(Properties, SolverDeterminacy) { expect_ok(solver_determinacy(kSeed, kCases)); }
TEST(Properties, CertificateReplay) { expect_ok(certificate_replay(kSeed, kCases)); }
TEST(Properties, SimulationDeterminism) { expect_ok(simulation_determinism(kSeed, kCases)); }
