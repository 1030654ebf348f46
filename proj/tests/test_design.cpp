#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "cnma/design.hpp"
#include "cnma/effects.hpp"
#include "cnma/error.hpp"
#include "test_helpers.hpp"

using namespace cnma;
using cnma::test::code_of;
using cnma::test::make_layout;

namespace {

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (const double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST(BuildV, MultiArmTrialOfCaseStudy) {
  ComponentDictionary dict({"Usual", "Edu", "Beh", "Cog", "Rel", "Sup"});
  const auto layout = make_layout(dict, "23", {"Edu+Cog+Rel", "Edu+Rel", "Usual"});
  const Network net = build_network(std::vector<StudyLayout>{layout}, dict);
  const Matrix want = rows_of({{0, 1, 0, 1, 1, 0}, {0, 1, 0, 0, 1, 0}, {1, 0, 0, 0, 0, 0}});
  EXPECT_EQ(build_V(net.studies[0], net), want);
  EXPECT_EQ(build_U(3, ContrastMode::Baseline), rows_of({{-1, 1, 0}, {-1, 0, 1}}));
}

TEST(BuildV, PlaceboVersusA) {
  ComponentDictionary dict({"Placebo", "A", "B"});
  const auto layout = make_layout(dict, "s", {"Placebo", "A"});
  const Network net = build_network(std::vector<StudyLayout>{layout}, dict);
  EXPECT_EQ(build_V(net.studies[0], net), rows_of({{1, 0, 0}, {0, 1, 0}}));
  const Treatment placebo = lookup_treatment("Placebo", dict);
  const Treatment a = lookup_treatment("A", dict);
  EXPECT_EQ(build_V_anchored(net.studies[0], net, placebo), rows_of({{0, 0}, {1, 0}}));
  EXPECT_EQ(build_V_anchored(net.studies[0], net, a), rows_of({{1, 0}, {0, 0}}));
  EXPECT_EQ(stack_X(net, ContrastMode::AllPairs), rows_of({{-1, 1, 0}}));
  EXPECT_EQ(stack_X(net, ContrastMode::Baseline), rows_of({{-1, 1, 0}}));
}

TEST(BuildV, AllComponentArmIsRowOfOnes) {
  ComponentDictionary dict({"A", "B", "C"});
  const std::vector<Treatment> arms{lookup_treatment("A+B+C", dict), lookup_treatment("A", dict)};
  const Matrix v = build_V(arms, 3);
  EXPECT_EQ(v.row(0).sum(), 3.0);
  EXPECT_EQ(v.row(1).sum(), 1.0);
}

TEST(BuildVAnchored, Errors) {
  ComponentDictionary dict({"A", "B", "C"});
  const auto layout = make_layout(dict, "s", {"A", "B"});
  const Network net = build_network(std::vector<StudyLayout>{layout}, dict);
  ComponentDictionary other({"A", "B", "C", "Z"});
  EXPECT_EQ(code_of([&] { build_V_anchored(net.studies[0], net, lookup_treatment("A+B", dict)); }),
            ErrorCode::MulticomponentAnchor);
  EXPECT_EQ(code_of([&] { build_V_anchored(net.studies[0], net, lookup_treatment("Z", other)); }),
            ErrorCode::UnknownAnchor);
}

TEST(BuildU, Shapes) {
  EXPECT_EQ(build_U(2, ContrastMode::AllPairs), rows_of({{-1, 1}}));
  EXPECT_EQ(build_U(3, ContrastMode::AllPairs), rows_of({{-1, 1, 0}, {-1, 0, 1}, {0, -1, 1}}));
  EXPECT_EQ(build_U(3, ContrastMode::Baseline, 1), rows_of({{1, -1, 0}, {0, -1, 1}}));
  EXPECT_EQ(code_of([] { build_U(3, ContrastMode::Baseline, 3); }), ErrorCode::InvalidArgument);
  for (std::size_t a = 2; a <= 6; ++a) {
    for (const auto mode : {ContrastMode::AllPairs, ContrastMode::Baseline}) {
      const Matrix u = build_U(a, mode);
      for (Eigen::Index r = 0; r < u.rows(); ++r) {
        EXPECT_EQ(u.row(r).sum(), 0.0);
        EXPECT_EQ((u.row(r).array() == 1.0).count(), 1);
        EXPECT_EQ((u.row(r).array() == -1.0).count(), 1);
      }
    }
    EXPECT_EQ(build_U(a, ContrastMode::AllPairs).rows(), static_cast<Eigen::Index>(a * (a - 1) / 2));
    EXPECT_TRUE((build_U(a, ContrastMode::Baseline).col(0).array() == -1.0).all());
  }
}

TEST(BuildSigma, Examples) {
  EXPECT_EQ(build_Sigma(3, false), rows_of({{1, .5, .5}, {.5, 1, .5}, {.5, .5, 1}}));
  EXPECT_EQ(build_Sigma(2, true), rows_of({{0, 0}, {0, 1}}));
  EXPECT_EQ(build_Sigma(2, false), rows_of({{1, .5}, {.5, 1}}));
  EXPECT_EQ(build_Sigma_star(3), rows_of({{1, .5}, {.5, 1}}));
  EXPECT_EQ(build_Sigma_star(2), rows_of({{1}}));
}

TEST(BuildSigma, ContrastsOfArmCovarianceGiveSigmaStar) {
  for (std::size_t a = 2; a <= 6; ++a) {
    const Matrix u = build_U(a, ContrastMode::Baseline);
    const Matrix got = u * build_Sigma(a, false) * u.transpose();
    EXPECT_LT((got - build_Sigma_star(a)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(BuildSigma, Eigenvalues) {
  for (std::size_t a = 2; a <= 7; ++a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(build_Sigma(a, false));
    const Vector ev = es.eigenvalues();
    for (Eigen::Index k = 0; k + 1 < ev.size(); ++k) EXPECT_NEAR(ev[k], 0.5, 1e-12);
    EXPECT_NEAR(ev[ev.size() - 1], (static_cast<double>(a) + 1.0) / 2.0, 1e-12);
  }
}

TEST(StackX, MulticomponentStudy) {
  ComponentDictionary dict({"A", "B", "C"});
  const auto layout = make_layout(dict, "s", {"C", "A+B"});
  const Network net = build_network(std::vector<StudyLayout>{layout}, dict);
  EXPECT_EQ(stack_X(net, ContrastMode::Baseline), rows_of({{1, 1, -1}}));
}

TEST(StackX, DuplicatedStudyDuplicatesRow) {
  ComponentDictionary dict({"A", "B", "C"});
  const auto s1 = make_layout(dict, "s1", {"C", "A+B"});
  const auto s2 = make_layout(dict, "s2", {"C", "A+B"});
  const Network net = build_network(std::vector<StudyLayout>{s1, s2}, dict);
  const Matrix x = stack_X(net, ContrastMode::AllPairs);
  ASSERT_EQ(x.rows(), 2);
  EXPECT_EQ(x.row(0), x.row(1));
}

TEST(Design, ContrastsMatchAdditiveEffects) {
  RngStream rng(21, 0);
  ComponentDictionary dict({"A", "B", "C", "D"});
  const auto s1 = make_layout(dict, "s1", {"A", "B+C", "A+D"});
  const auto s2 = make_layout(dict, "s2", {"D", "A+B+C+D"});
  const auto s3 = make_layout(dict, "s3", {"B", "C", "A+C", "D"});
  const Network net = build_network(std::vector<StudyLayout>{s1, s2, s3}, dict);
  for (int trial = 0; trial < 20; ++trial) {
    Vector d(4);
    for (int k = 0; k < 4; ++k) d[k] = rng.normal();
    for (const auto& study : net.studies) {
      const Vector got = build_U(study.treatments.size(), ContrastMode::Baseline) *
                         build_V(study, net) * d;
      for (std::size_t j = 1; j < study.treatments.size(); ++j) {
        const auto e = derive_relative_effect(d, Matrix::Identity(4, 4), study.treatments[0],
                                              study.treatments[j]);
        EXPECT_NEAR(got[static_cast<Eigen::Index>(j - 1)], e.point, 1e-12);
      }
    }
  }
}

TEST(Design, RowSumsCountComponentDifference) {
  ComponentDictionary dict({"A", "B", "C", "D"});
  const auto s = make_layout(dict, "s", {"A", "B+C", "A+C+D", "D"});
  const Network net = build_network(std::vector<StudyLayout>{s}, dict);
  const Matrix uv = build_U(4, ContrastMode::AllPairs) * build_V(net.studies[0], net);
  const Vector sums = uv.rowwise().sum();
  // pairs (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
  const Vector want = (Vector(6) << 1, 2, 0, 1, -1, -2).finished();
  EXPECT_EQ(sums, want);
}

TEST(Design, AnchoredAndUnanchoredAgree) {
  RngStream rng(22, 0);
  ComponentDictionary dict({"E", "A", "B", "C"});
  const auto s = make_layout(dict, "s", {"A", "B+C", "A+B+C"});
  const auto other = make_layout(dict, "t", {"E", "A"});
  const Network net = build_network(std::vector<StudyLayout>{s, other}, dict);
  const Treatment anchor = lookup_treatment("E", dict);
  const Matrix v = build_V(net.studies[0], net);
  const Matrix va = build_V_anchored(net.studies[0], net, anchor);
  for (int trial = 0; trial < 10; ++trial) {
    Vector d(4);
    for (int k = 0; k < 4; ++k) d[k] = rng.normal();
    Vector d1(3);
    for (int k = 0; k < 3; ++k) d1[k] = d[k + 1] - d[0];
    const Vector diff = v * d - (va * d1 + v.rowwise().sum() * d[0]);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DesignSet, AnchoredBlocksPresentOnlyWithAnchor) {
  ComponentDictionary dict({"E", "A"});
  const auto s = make_layout(dict, "s", {"E", "A"});
  const Network net = build_network(std::vector<StudyLayout>{s}, dict);
  EXPECT_FALSE(build_design_set(net).studies[0].V_anchored.has_value());
  const DesignSet ds = build_design_set(net, lookup_treatment("E", dict));
  ASSERT_TRUE(ds.studies[0].V_anchored.has_value());
  EXPECT_EQ(ds.studies[0].V_anchored->cols(), 1);
  EXPECT_EQ(ds.X, rows_of({{-1, 1}}));
}
