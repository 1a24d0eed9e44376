#include <gtest/gtest.h>

#include "pgame/compose.hpp"
#include "pgame/protocols.hpp"
#include "pgame/solver.hpp"
#include "pgame/syntax.hpp"
#include "support/tables.hpp"

using namespace pgame;

namespace {

const Signature& sig() {
  static const Signature s = parse_signature({"pred P : ack\npred Q : ack\npred P1 : ack\npred P2 : ack\npred P3 : ack\npred A : ()\n"});
  return s;
}

NormalFormula nf(const std::string& text) { return normalize(expand_sugar(parse_formula({text}, sig()), sig())); }

}  // namespace

TEST(FinalOccurrences, SinglePacket) {
  const NormalFormula f = nf("exists x. forall y. (P(x) -> P(y))");
  const auto fin = final_occurrences(f);
  ASSERT_EQ(fin.size(), 1u);
  EXPECT_EQ(print_formula(fin[0].atom), "P(x)");
}

TEST(FinalOccurrences, NoneOrSeveral) {
  EXPECT_TRUE(final_occurrences(nf("A")).empty());  // positive
  EXPECT_TRUE(final_occurrences(nf("(A -> A) -> A")).empty());  // has a hypothesis
  EXPECT_EQ(final_occurrences(nf("A -> A")).size(), 1u);
  EXPECT_EQ(final_occurrences(nf("A -> A -> A")).size(), 2u);
}

TEST(Compose, TwoPacketsFromOne) {
  const NormalFormula H = compose(NormalFormula(single_packet("P")), NormalFormula(single_packet("Q")));
  const NormalFormula G = nf("exists x. forall y. (Q(x) -> Q(y))");
  const Formula expected = parse_core_formula(
      "(forall x. ((forall y. (((" + print_formula(G.formula()) + ") -> P(x)) -> P(y))) -> false)) -> false", sig());
  EXPECT_TRUE(alpha_equal(H.formula(), expected)) << print_formula(H.formula());
  const Formula chain = rename_predicates(make_ack_chain(2, sig()), {{"P1", "Q"}, {"P2", "P"}});
  EXPECT_TRUE(alpha_equal(H.formula(), chain));
}

TEST(Compose, ChainsAgreeWithRepeatedComposition) {
  const NormalFormula p1(single_packet("P1")), p2(single_packet("P2")), p3(single_packet("P3"));
  EXPECT_TRUE(alpha_equal(compose(p3, compose(p2, p1)).formula(), make_ack_chain(3, sig())));
}

TEST(Compose, CopiesAreIndependent) {
  const NormalFormula f = nf("A -> A -> A");
  const NormalFormula g = nf("exists x. forall y. (Q(x) -> Q(y))");
  const NormalFormula h = compose(f, g);
  EXPECT_EQ(final_occurrences(h).size(), 2u);
  EXPECT_TRUE(is_closed(h.formula()));
  auto s = std::make_shared<const Signature>(sig());
  EXPECT_EQ(solve(h, s).kind, Verdict::Kind::Valid);
}

TEST(Compose, RejectsOpenFormulas) {
  const NormalFormula open(parse_formula({"P(z)"}, sig(), {.allow_free_variables = true}));
  EXPECT_THROW(compose(open, nf("A")), Error);
  EXPECT_THROW(compose(nf("A"), open), Error);
}

TEST(Compose, PreservesValidity) {
  auto s = std::make_shared<const Signature>(sig());
  const NormalFormula d1 = nf("exists x. forall y. (P(x) -> P(y))");
  const NormalFormula d2 = nf("exists x. forall y. (Q(x) -> Q(y))");
  EXPECT_EQ(solve(compose(d1, d2), s).kind, Verdict::Kind::Valid);
  EXPECT_EQ(solve(compose(d1, nf("((A -> A) -> A) -> A")), s).kind, Verdict::Kind::Valid);
}

TEST(MergeSignatures, UnionAndConflicts) {
  const Signature a = parse_signature({"pred P : ack\nconst c\n"});
  const Signature b = parse_signature({"pred Q : int\nconst c\n"});
  const Signature m = merge_signatures(a, b);
  EXPECT_NE(m.predicate("P"), nullptr);
  EXPECT_NE(m.predicate("Q"), nullptr);
  EXPECT_TRUE(m.has_constant("c"));
  EXPECT_THROW(merge_signatures(a, parse_signature({"pred P : int\n"})), Error);
  EXPECT_THROW(merge_signatures(a, parse_signature({"pred c : ()\n"})), Error);
}

TEST(AckChain, ShapeAndErrors) {
  EXPECT_TRUE(alpha_equal(make_ack_chain(1, sig()), single_packet("P1")));
  EXPECT_THROW(make_ack_chain(0, sig()), Error);
  EXPECT_THROW(make_ack_chain(2, sig(), {"P", "Missing"}), Error);
  EXPECT_TRUE(is_normal(make_ack_chain(3, sig())));
}

TEST(Compose, AssociativeOnCorpus) {
  const Document doc = load_document(pgame::testing::corpus_path("examples.lp"));
  std::vector<NormalFormula> fs;
  for (const auto& nf : doc.formulas) fs.push_back(normalize(expand_sugar(nf.formula)));
  for (const auto& f : fs)
    for (const auto& g : fs)
      for (const auto& k : fs)
        ASSERT_TRUE(alpha_equal(compose(compose(f, g), k).formula(), compose(f, compose(g, k)).formula()))
            << print_formula(f) << " ; " << print_formula(g) << " ; " << print_formula(k);
}
