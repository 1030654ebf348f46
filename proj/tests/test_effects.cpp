#include <gtest/gtest.h>

#include <map>

#include "cnma/effects.hpp"
#include "cnma/error.hpp"
#include "test_helpers.hpp"

using namespace cnma;
using cnma::test::code_of;

namespace {

// Table 3, network 1, anchor E: components A B C D E.
struct NetworkOne {
  ComponentDictionary dict{std::vector<std::string>{"A", "B", "C", "D", "E"}};
  Vector d = (Vector(5) << 1.2, 0.9, 0.8, 0.7, 0.0).finished();
  Treatment t(const std::string& label) const { return lookup_treatment(label, dict); }
};

// Cumulative-rank definition evaluated directly from per-draw ranks (no ties).
std::vector<double> sucra_by_definition(const Matrix& draws) {
  const auto T = draws.cols();
  std::vector<double> out(static_cast<std::size_t>(T), 0.0);
  for (Eigen::Index k = 0; k < T; ++k) {
    double area = 0.0;
    for (Eigen::Index j = 1; j < T; ++j) {
      double hits = 0.0;
      for (Eigen::Index r = 0; r < draws.rows(); ++r) {
        Eigen::Index rank = 1;
        for (Eigen::Index m = 0; m < T; ++m)
          if (draws(r, m) > draws(r, k)) ++rank;
        if (rank <= j) hits += 1.0;
      }
      area += hits / static_cast<double>(draws.rows());
    }
    out[static_cast<std::size_t>(k)] = area / static_cast<double>(T - 1);
  }
  return out;
}

}  // namespace

TEST(AdditiveEffect, TableValues) {
  const NetworkOne n;
  EXPECT_NEAR(additive_effect(n.d, n.t("A+C")), 2.0, 1e-15);
  EXPECT_NEAR(additive_effect(n.d, n.t("A+C+D")), 2.7, 1e-15);
  EXPECT_EQ(additive_effect(n.d, n.t("B")), 0.9);
  const Vector short_d = Vector::Zero(2);
  EXPECT_EQ(code_of([&] { additive_effect(short_d, n.t("A+C")); }), ErrorCode::UnknownComponent);
}

TEST(DeriveRelativeEffect, Examples) {
  const NetworkOne n;
  const auto bc = derive_relative_effect(n.d, Matrix::Identity(5, 5), n.t("B"), n.t("C"));
  EXPECT_NEAR(bc.point, -0.1, 1e-15);
  const auto same = derive_relative_effect(n.d, Matrix::Identity(5, 5), n.t("A+C"), n.t("A+C"));
  EXPECT_EQ(same.point, 0.0);
  EXPECT_EQ(same.se, 0.0);

  ComponentDictionary dict({"1", "2", "3"});
  const Vector d = (Vector(3) << 0.4, -0.3, 0.25).finished();
  const auto e = derive_relative_effect(d, Matrix::Identity(3, 3), lookup_treatment("3", dict),
                                        lookup_treatment("1+2", dict));
  EXPECT_NEAR(e.point, 0.4 - 0.3 - 0.25, 1e-15);
  EXPECT_NEAR(e.se, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(e.lower, e.point - 1.959963984540054 * e.se, 1e-9);
}

TEST(DeriveRelativeEffect, ConsistencyClosure) {
  RngStream rng(41, 0);
  const NetworkOne n;
  const std::vector<Treatment> ts{n.t("A"), n.t("B+C"), n.t("A+C+D"), n.t("E"), n.t("D")};
  for (int trial = 0; trial < 10; ++trial) {
    Vector d(5);
    for (int k = 0; k < 5; ++k) d[k] = rng.normal();
    const Matrix I = Matrix::Identity(5, 5);
    for (const auto& k : ts)
      for (const auto& l : ts)
        for (const auto& m : ts) {
          const double lhs = derive_relative_effect(d, I, k, l).point +
                             derive_relative_effect(d, I, l, m).point;
          EXPECT_NEAR(lhs, derive_relative_effect(d, I, k, m).point, 1e-12);
        }
  }
}

TEST(DeriveRelativeEffect, PerDrawEvaluation) {
  const NetworkOne n;
  Matrix draws(4, 5);
  draws << 1, 0, 0, 0, 0,
           2, 0, 1, 0, 0,
           3, 0, 2, 0, 0,
           4, 0, 3, 0, 0;
  const auto e = derive_relative_effect(draws, n.t("E"), n.t("A+C"), 0.5);
  EXPECT_DOUBLE_EQ(e.point, 4.0);  // values 1, 3, 5, 7
  EXPECT_DOUBLE_EQ(e.lower, 2.5);
  EXPECT_DOUBLE_EQ(e.upper, 5.5);
  EXPECT_EQ(e.source, EstimateSource::Posterior);
}

TEST(Sucra, DeterministicRanks) {
  const NetworkOne n;
  Matrix draws(100, 3);
  for (int r = 0; r < 100; ++r) draws.row(r) << 3.0, 2.0, 1.0;
  const auto rep = sucra(draws, {n.t("A"), n.t("B"), n.t("C")});
  EXPECT_DOUBLE_EQ(rep.scores[0], 1.0);
  EXPECT_DOUBLE_EQ(rep.scores[1], 0.5);
  EXPECT_DOUBLE_EQ(rep.scores[2], 0.0);
  const auto low = sucra(draws, {n.t("A"), n.t("B"), n.t("C")}, Direction::LowerBetter);
  EXPECT_DOUBLE_EQ(low.scores[0], 0.0);
  EXPECT_DOUBLE_EQ(low.scores[2], 1.0);
}

TEST(Sucra, HalfAndHalf) {
  const NetworkOne n;
  Matrix draws(100, 2);
  for (int r = 0; r < 100; ++r) draws.row(r) << (r % 2 ? 1.0 : 0.0), (r % 2 ? 0.0 : 1.0);
  const auto rep = sucra(draws, {n.t("A"), n.t("B")});
  EXPECT_DOUBLE_EQ(rep.scores[0], 0.5);
  EXPECT_DOUBLE_EQ(rep.scores[1], 0.5);
}

TEST(Sucra, MatchesCumulativeDefinitionAndAveragesHalf) {
  RngStream rng(42, 0);
  const NetworkOne n;
  const std::vector<Treatment> ts{n.t("A"), n.t("B"), n.t("C"), n.t("D"), n.t("E")};
  Matrix draws(400, 5);
  for (int r = 0; r < 400; ++r)
    for (int k = 0; k < 5; ++k) draws(r, k) = 0.3 * k + rng.normal();
  const auto rep = sucra(draws, ts);
  const auto want = sucra_by_definition(draws);
  double total = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(rep.scores[k], want[k], 1e-12);
    EXPECT_GE(rep.scores[k], 0.0);
    EXPECT_LE(rep.scores[k], 1.0);
    total += rep.scores[k];
  }
  EXPECT_NEAR(total / 5.0, 0.5, 1e-12);
}

TEST(Sucra, TiesGetAverageRanks) {
  const NetworkOne n;
  Matrix draws(10, 3);
  for (int r = 0; r < 10; ++r) draws.row(r) << 1.0, 1.0, 0.0;
  const auto rep = sucra(draws, {n.t("A"), n.t("B"), n.t("C")});
  EXPECT_DOUBLE_EQ(rep.scores[0], 0.75);
  EXPECT_DOUBLE_EQ(rep.scores[1], 0.75);
  EXPECT_DOUBLE_EQ(rep.scores[2], 0.0);
}

TEST(VerifyUniqueAnchor, TableExamples) {
  const NetworkOne n;
  std::map<Treatment, double> rel;
  for (const char* l : {"A", "B", "C", "D", "A+C", "A+D", "A+C+D"})
    rel[n.t(l)] = additive_effect(n.d, n.t(l));
  const auto check = verify_unique_anchor(rel, n.t("E"), n.t("B"), {n.t("A+C"), n.t("A+C+D")});
  ASSERT_EQ(check.residuals.size(), 2u);
  EXPECT_NEAR(check.residuals[0].residual, 0.9, 1e-12);
  EXPECT_NEAR(check.residuals[1].residual, 1.8, 1e-12);
  EXPECT_NEAR(check.max_residual, 1.8, 1e-12);
  EXPECT_TRUE(check.matches_identity);
}

TEST(VerifyUniqueAnchor, ZeroEffectAnchorGivesZeroResidual) {
  const NetworkOne n;
  Vector d = n.d;
  d[1] = 0.0;  // B has the same effect as E
  std::map<Treatment, double> rel;
  for (const char* l : {"A", "B", "C", "D", "A+C"}) rel[n.t(l)] = additive_effect(d, n.t(l));
  const auto check = verify_unique_anchor(rel, n.t("E"), n.t("B"), {n.t("A+C")});
  EXPECT_NEAR(check.max_residual, 0.0, 1e-15);
}

TEST(VerifyUniqueAnchor, Errors) {
  const NetworkOne n;
  std::map<Treatment, double> rel{{n.t("A"), 1.2}, {n.t("B"), 0.9}};
  EXPECT_EQ(code_of([&] { verify_unique_anchor(rel, n.t("E"), n.t("B"), {n.t("A")}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { verify_unique_anchor(rel, n.t("E"), n.t("B"), {n.t("A+C")}); }),
            ErrorCode::MissingTruth);
}

TEST(AnchorOrderings, WorkedOrderings) {
  const NetworkOne n;
  const Treatment C = n.t("C"), D = n.t("D"), CD = n.t("C+D");
  // anchor E
  EXPECT_GT(additive_effect(n.d, CD), std::max(additive_effect(n.d, C), additive_effect(n.d, D)));
  // anchor k: component effects relative to k, additivity applied there
  auto relative_to = [&](int k) {
    Vector r = n.d;
    r.array() -= n.d[k];
    return r;
  };
  const Vector b = relative_to(1);
  EXPECT_LT(additive_effect(b, CD), std::min(additive_effect(b, C), additive_effect(b, D)));
  const Vector dd = relative_to(3);
  EXPECT_DOUBLE_EQ(additive_effect(dd, CD), additive_effect(dd, C));
}
