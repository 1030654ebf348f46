#include <gtest/gtest.h>

#include <cmath>

#include "cnma/error.hpp"
#include "cnma/network.hpp"
#include "cnma/sim.hpp"
#include "test_helpers.hpp"

using namespace cnma;
using cnma::test::code_of;
using cnma::test::make_layout;
using cnma::test::make_study;

TEST(ParseTreatment, MultiComponent) {
  ComponentDictionary dict;
  const Treatment t = parse_treatment("A+C+D", dict);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(dict.size(), 3u);
  EXPECT_EQ(format_treatment(t, dict), "A+C+D");
}

TEST(ParseTreatment, SingleComponentAndTrimming) {
  ComponentDictionary dict;
  EXPECT_EQ(parse_treatment("E", dict).size(), 1u);
  const Treatment t = parse_treatment(" B + E ", dict);
  EXPECT_EQ(format_treatment(t, dict), "E+B");
  EXPECT_EQ(t, parse_treatment("B+E", dict));
}

TEST(ParseTreatment, Errors) {
  ComponentDictionary dict;
  EXPECT_EQ(code_of([&] { parse_treatment("A+A", dict); }), ErrorCode::DuplicateComponent);
  EXPECT_EQ(code_of([&] { parse_treatment("A++B", dict); }), ErrorCode::EmptyToken);
  EXPECT_EQ(code_of([&] { parse_treatment("", dict); }), ErrorCode::EmptyToken);
  EXPECT_EQ(code_of([&] { lookup_treatment("Z", dict); }), ErrorCode::UnknownComponent);
}

TEST(ParseTreatment, FormatRoundTrip) {
  ComponentDictionary dict({"Usual", "Edu", "Beh", "Cog", "Rel", "Sup"});
  for (const char* label : {"Edu+Cog+Rel", "Usual", "Beh+Sup", "Edu+Beh+Cog+Rel+Sup"}) {
    const Treatment t = lookup_treatment(label, dict);
    EXPECT_EQ(format_treatment(t, dict), label);
    EXPECT_EQ(lookup_treatment(format_treatment(t, dict), dict), t);
  }
}

TEST(Treatment, EqualityIgnoresLabel) {
  ComponentDictionary dict;
  Treatment a = parse_treatment("A+B", dict);
  Treatment b = parse_treatment("B+A", dict);
  b.label = "something else";
  EXPECT_EQ(a, b);
}

TEST(BuildNetwork, SingleTwoArmStudy) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 10, 50}, {"A", 20, 50}});
  const Network net = build_network(std::vector<Study>{s}, dict);
  EXPECT_EQ(net.num_components(), 2u);
  EXPECT_EQ(net.num_studies(), 1u);
  EXPECT_TRUE(net.connected);
}

TEST(BuildNetwork, DefaultTopologyOfNetworkOne) {
  const ScenarioSpec spec = default_scenario(1, "E", "E");
  ComponentDictionary dict;
  std::vector<StudyLayout> layouts;
  int k = 0;
  for (const auto& edge : spec.topology) {
    layouts.push_back(make_layout(dict, "t" + std::to_string(++k),
                                  {format_treatment(edge.first, spec.components),
                                   format_treatment(edge.second, spec.components)}));
  }
  const Network net = build_network(layouts, dict);
  EXPECT_EQ(net.num_components(), 5u);
  EXPECT_EQ(net.treatments.size(), 8u);
  EXPECT_TRUE(net.connected);
}

TEST(BuildNetwork, DisjointStudiesAreDisconnected) {
  ComponentDictionary dict;
  const auto s1 = make_study(dict, "s1", {{"E", 1, 10}, {"A", 2, 10}});
  const auto s2 = make_study(dict, "s2", {{"C", 1, 10}, {"D", 2, 10}});
  const Network net = build_network(std::vector<Study>{s1, s2}, dict);
  EXPECT_FALSE(net.connected);
  EXPECT_EQ(check_connectivity(net).size(), 2u);
  EXPECT_EQ(code_of([&] { require_connected(net); }), ErrorCode::Disconnected);
}

TEST(BuildNetwork, ChainIsOneGroup) {
  ComponentDictionary dict;
  const auto s1 = make_study(dict, "s1", {{"E", 1, 10}, {"A", 2, 10}});
  const auto s2 = make_study(dict, "s2", {{"A", 1, 10}, {"B", 2, 10}});
  const Network net = build_network(std::vector<Study>{s1, s2}, dict);
  const auto groups = check_connectivity(net);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups.front().size(), 3u);
}

TEST(BuildNetwork, Errors) {
  ComponentDictionary dict;
  EXPECT_EQ(code_of([&] { build_network(std::vector<Study>{}, dict); }), ErrorCode::EmptyNetwork);
  const auto one_arm = make_study(dict, "s1", {{"E", 1, 10}});
  EXPECT_EQ(code_of([&] { build_network(std::vector<Study>{one_arm}, dict); }), ErrorCode::TooFewArms);
  const auto s = make_study(dict, "s1", {{"E", 1, 10}, {"A", 2, 10}});
  EXPECT_EQ(code_of([&] { build_network(std::vector<Study>{s, s}, dict); }), ErrorCode::DuplicateStudy);
  const auto dup = make_study(dict, "s2", {{"E", 1, 10}, {"E", 2, 10}});
  EXPECT_EQ(code_of([&] { build_network(std::vector<Study>{dup}, dict); }),
            ErrorCode::DuplicateTreatment);
  const auto over = make_study(dict, "s3", {{"E", 11, 10}, {"A", 2, 10}});
  EXPECT_EQ(code_of([&] { validate_study(over); }), ErrorCode::EventsExceedTotal);
}

TEST(ArmToContrast, WorkedExample) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 10, 50}, {"A", 20, 50}});
  const ContrastBlock b = arm_to_contrast(s);
  ASSERT_EQ(b.y_star.size(), 1);
  EXPECT_NEAR(b.y_star[0], std::log((20.0 / 30.0) / (10.0 / 40.0)), 1e-14);
  EXPECT_NEAR(b.y_star[0], 0.98083, 5e-6);
  EXPECT_NEAR(b.se[0], 0.45644, 5e-6);
  EXPECT_NEAR(b.se_baseline, std::sqrt(1.0 / 10 + 1.0 / 40), 1e-14);
  EXPECT_NEAR(b.se_baseline, 0.35355, 5e-6);
}

TEST(ArmToContrast, IdenticalArms) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 10, 50}, {"A", 10, 50}});
  const ContrastBlock b = arm_to_contrast(s);
  EXPECT_EQ(b.y_star[0], 0.0);
  EXPECT_NEAR(b.se[0], std::sqrt(2 * (1.0 / 10 + 1.0 / 40)), 1e-14);
  EXPECT_NEAR(b.se[0], 0.5, 1e-14);
}

TEST(ArmToContrast, ZeroCellPolicies) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 0, 50}, {"A", 5, 50}});
  EXPECT_EQ(code_of([&] { arm_to_contrast(s); }), ErrorCode::ZeroCell);
  const ContrastBlock b = arm_to_contrast(s, 0, ZeroCellPolicy::Continuity05);
  EXPECT_NEAR(b.y_star[0], std::log((5.5 / 45.5) / (0.5 / 50.5)), 1e-12);
  EXPECT_NEAR(b.se[0], std::sqrt(1 / 5.5 + 1 / 45.5 + 1 / 0.5 + 1 / 50.5), 1e-12);
}

TEST(ArmToContrast, SwapNegatesAndKeepsSe) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 13, 70}, {"A", 29, 64}});
  const ContrastBlock fwd = arm_to_contrast(s, 0);
  const ContrastBlock rev = arm_to_contrast(s, 1);
  EXPECT_NEAR(fwd.y_star[0], -rev.y_star[0], 1e-14);
  EXPECT_NEAR(fwd.se[0], rev.se[0], 1e-14);
}

TEST(ArmToContrast, ThreeArmConsistency) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 13, 70}, {"A", 29, 64}, {"B", 41, 80}});
  const ContrastBlock b = arm_to_contrast(s);
  Study pair;
  pair.id = "p";
  pair.arms = {s.arms[1], s.arms[2]};
  const ContrastBlock direct = arm_to_contrast(pair);
  EXPECT_NEAR(b.y_star[1] - b.y_star[0], direct.y_star[0], 1e-13);
}

TEST(ContrastBlock, CovarianceAndValidation) {
  ComponentDictionary dict;
  const auto s = make_study(dict, "s1", {{"E", 13, 70}, {"A", 29, 64}, {"B", 41, 80}});
  const ContrastBlock b = arm_to_contrast(s);
  const Matrix S = b.covariance();
  EXPECT_NEAR(S(0, 0), b.se[0] * b.se[0], 1e-15);
  EXPECT_NEAR(S(0, 1), b.se_baseline * b.se_baseline, 1e-15);
  ContrastBlock bad = b;
  bad.se_baseline = 10.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::NotPositiveDefinite);
  bad = b;
  bad.se[0] = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::ZeroStandardError);
}
