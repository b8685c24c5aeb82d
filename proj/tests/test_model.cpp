#include <gtest/gtest.h>

#include "peec/error.hpp"
#include "peec/model.hpp"
#include "test_support.hpp"

namespace peec {
namespace {

ErrorCode code_of(const GameSpec& s) {
  try {
    validate_spec(s);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "validate_spec accepted an invalid spec";
  return ErrorCode::IoError;
}

TEST(Model, PursuitConfigValidatesAsPursuerDominant) {
  const GameSpec s = testing::pursuit_spec(900.0);
  const DominanceClass d = classify_dominance(s);
  EXPECT_EQ(d.kind, Dominance::PursuerDominant);
  Eigen::Vector4d expected(0.0, 0.125, 0.0, 0.125);
  EXPECT_LT((d.gap - Matrix(expected.asDiagonal())).norm(), 1e-14);
}

TEST(Model, RejectsSingularRp) {
  GameSpec s = testing::pursuit_spec(900.0);
  s.Rp(1, 1) = 0.0;
  try {
    validate_spec(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
    EXPECT_NE(e.detail().find("Rp"), std::string::npos);
  }
}

TEST(Model, RejectsShapeMismatch) {
  GameSpec s = testing::pursuit_spec(900.0);
  s.Rp = Matrix::Identity(3, 3);
  EXPECT_EQ(code_of(s), ErrorCode::DimensionMismatch);
}

TEST(Model, RejectsNonFiniteAndBadHorizon) {
  GameSpec s = testing::scalar_spec();
  s.A(0, 0) = std::nan("");
  EXPECT_EQ(code_of(s), ErrorCode::NonFiniteEntry);
  s = testing::scalar_spec();
  s.T = 0.0;
  EXPECT_EQ(code_of(s), ErrorCode::NonPositiveHorizon);
  s = testing::scalar_spec();
  s.Op = -1.0;
  EXPECT_EQ(code_of(s), ErrorCode::NegativePrice);
  s = testing::scalar_spec();
  s.Q(0, 0) = -1.0;
  EXPECT_EQ(code_of(s), ErrorCode::NotPositiveDefinite);
}

TEST(Model, InfinitePriceAccepted) {
  GameSpec s = testing::scalar_spec();
  s.Op = kInfinitePrice;
  s.Oe = kInfinitePrice;
  EXPECT_NO_THROW(validate_spec(s));
}

TEST(Model, EqualAndNotDominantClasses) {
  GameSpec s = testing::pursuit_spec(900.0);
  s.Rp = s.Re;
  DominanceClass d = classify_dominance(s);
  EXPECT_EQ(d.kind, Dominance::Equal);
  EXPECT_EQ(d.gap.norm(), 0.0);

  s.Rp = 2.0 * s.Re;
  EXPECT_EQ(classify_dominance(s).kind, Dominance::NotDominant);
}

TEST(Model, GapSymmetricAndScalesWithCommonWeight) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    GameSpec s = testing::random_dominant_spec(rng);
    const DominanceClass d = classify_dominance(s);
    EXPECT_LE((d.gap - d.gap.transpose()).norm(), 1e-12 * (1.0 + d.gap.norm()));
    const double lambda = 0.1 + 0.37 * trial;
    GameSpec scaled = s;
    scaled.Rp *= lambda;
    scaled.Re *= lambda;
    const DominanceClass ds = classify_dominance(scaled);
    EXPECT_EQ(ds.kind, d.kind);
    EXPECT_LE((ds.gap * lambda - d.gap).norm(), 1e-10 * (1.0 + d.gap.norm()));
  }
}

}  // namespace
}  // namespace peec
