#include <gtest/gtest.h>

#include <cmath>

#include "cnma/error.hpp"
#include "cnma/sim.hpp"
#include "test_helpers.hpp"

using namespace cnma;
using cnma::test::code_of;

namespace {

std::size_t index_of(const std::vector<Treatment>& ts, const Treatment& t) {
  for (std::size_t j = 0; j < ts.size(); ++j)
    if (ts[j] == t) return j;
  throw std::runtime_error("treatment not found");
}

const Study* find_trial(const std::vector<Study>& data, const Treatment& a, const Treatment& b) {
  for (const auto& s : data) {
    const auto& t0 = s.arms[0].treatment;
    const auto& t1 = s.arms[1].treatment;
    if ((t0 == a && t1 == b) || (t0 == b && t1 == a)) return &s;
  }
  return nullptr;
}

double proportion(const ArmRecord& a) {
  return static_cast<double>(a.events) / static_cast<double>(a.total);
}

}  // namespace

TEST(DeriveScenario, AlphaUnderOtherAnchor) {
  const ScenarioSpec spec = default_scenario(1, "E", "B");
  const Truth truth = derive_scenario_parameters(spec);
  EXPECT_NEAR(truth.data.alpha, -0.85, 1e-15);
  EXPECT_NEAR(truth.analysis.alpha, 0.05, 1e-15);
}

TEST(DeriveScenario, MulticomponentTruthUnderAnchorB) {
  const ScenarioSpec spec = default_scenario(1, "B", "E");
  const Truth truth = derive_scenario_parameters(spec);
  const auto& ts = truth.treatments;
  const Treatment ac = lookup_treatment("A+C", spec.components);
  const Treatment acd = lookup_treatment("A+C+D", spec.components);
  EXPECT_NEAR(truth.data.vs_reference[index_of(ts, ac)], 1.1, 1e-12);
  // analysis-anchor (E) truth is the reference-scale additive value
  EXPECT_NEAR(truth.analysis.vs_reference[index_of(ts, ac)], 2.0, 1e-12);
  EXPECT_NEAR(truth.analysis.vs_reference[index_of(ts, acd)], 2.7, 1e-12);
  // d_{B,A+C} = d_{B,A} + d_{B,C} = 0.3 - 0.1
  const int a = spec.components.index_of("A");
  const int c = spec.components.index_of("C");
  EXPECT_NEAR(truth.data.component[static_cast<std::size_t>(a)] +
                  truth.data.component[static_cast<std::size_t>(c)],
              0.2, 1e-12);
  // single components are anchor independent
  for (const char* l : {"A", "B", "C", "D", "E"}) {
    const auto j = index_of(ts, lookup_treatment(l, spec.components));
    EXPECT_NEAR(truth.data.vs_reference[j], truth.analysis.vs_reference[j], 1e-12);
  }
}

TEST(DeriveScenario, SameAnchorGivesSameTruth) {
  const Truth truth = derive_scenario_parameters(default_scenario(2, "D", "D"));
  EXPECT_EQ(truth.data.vs_reference, truth.analysis.vs_reference);
  EXPECT_EQ(truth.data.alpha, truth.analysis.alpha);
}

TEST(DeriveScenario, Involution) {
  const ScenarioSpec spec = default_scenario(1, "B", "E");
  const Truth truth = derive_scenario_parameters(spec);
  // Re-express the scenario relative to B and derive the E-anchored truth back.
  ScenarioSpec rebased = spec;
  rebased.reference = spec.data_anchor;
  rebased.reference_effects = truth.data.component;
  rebased.alpha = truth.data.alpha;
  const AnchorTruth back = anchor_truth(rebased, spec.analysis_anchor);
  for (std::size_t k = 0; k < back.component.size(); ++k) {
    EXPECT_EQ(back.component[k], truth.analysis.component[k]);
  }
  EXPECT_EQ(back.alpha, truth.analysis.alpha);
}

TEST(DeriveScenario, Errors) {
  EXPECT_EQ(code_of([] { default_scenario(3, "E", "E"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { default_scenario(1, "Q", "E"); }), ErrorCode::UnknownComponent);
  ScenarioSpec spec = default_scenario(1, "E", "E");
  spec.data_anchor = lookup_treatment("A+C", spec.components);
  EXPECT_EQ(code_of([&] { derive_scenario_parameters(spec); }), ErrorCode::MulticomponentAnchor);
  spec = default_scenario(1, "E", "E");
  spec.replicates = 0;
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::InvalidArgument);
  spec = default_scenario(1, "E", "E");
  spec.reference_effects.pop_back();
  EXPECT_EQ(code_of([&] { spec.validate(); }), ErrorCode::MissingTruth);
}

TEST(DefaultScenario, Shape) {
  for (const int net : {1, 2}) {
    const ScenarioSpec spec = default_scenario(net, net == 1 ? "E" : "C", net == 1 ? "E" : "C");
    EXPECT_EQ(spec.components.size(), 5u);
    EXPECT_EQ(spec.treatments().size(), 8u);
    for (const auto& e : spec.topology) EXPECT_EQ(e.trials, 2u);
  }
}

TEST(GenerateDataset, ExpectedProportions) {
  ScenarioSpec spec = default_scenario(1, "E", "E", 200000);
  spec.sigma = 0.0;
  const Truth truth = derive_scenario_parameters(spec);
  RngStream rng(spec.seed, 0);
  const auto data = generate_dataset(spec, truth, rng);
  const Treatment e = lookup_treatment("E", spec.components);
  const Treatment a = lookup_treatment("A", spec.components);
  const Study* s = find_trial(data, e, a);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->arms[0].treatment, e);
  EXPECT_NEAR(inv_logit(-0.85), 0.2994, 5e-5);
  EXPECT_NEAR(inv_logit(0.35), 0.5866, 5e-5);
  EXPECT_NEAR(proportion(s->arms[0]), 0.2994, 0.005);
  EXPECT_NEAR(proportion(s->arms[1]), 0.5866, 0.005);
}

TEST(GenerateDataset, NullScenarioGivesHalf) {
  ScenarioSpec spec = default_scenario(1, "E", "E", 100000);
  spec.sigma = 0.0;
  spec.alpha = 0.0;
  for (auto& d : spec.reference_effects) d = 0.0;
  const Truth truth = derive_scenario_parameters(spec);
  RngStream rng(3, 0);
  for (const auto& s : generate_dataset(spec, truth, rng))
    for (const auto& a : s.arms) EXPECT_NEAR(proportion(a), 0.5, 0.01);
}

TEST(GenerateDataset, DeterministicPerStream) {
  const ScenarioSpec spec = default_scenario(2, "B", "C", 50);
  const Truth truth = derive_scenario_parameters(spec);
  RngStream r1(9, 4);
  RngStream r2(9, 4);
  RngStream r3(9, 5);
  const auto a = generate_dataset(spec, truth, r1);
  const auto b = generate_dataset(spec, truth, r2);
  const auto c = generate_dataset(spec, truth, r3);
  ASSERT_EQ(a.size(), 20u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(a[i].arms[j].events, b[i].arms[j].events);
      if (a[i].arms[j].events != c[i].arms[j].events) differs = true;
    }
  }
  EXPECT_TRUE(differs);
}

TEST(GenerateDataset, LogOddsRatiosConvergeToTruth) {
  ScenarioSpec spec = default_scenario(1, "B", "E", 100000);
  spec.sigma = 0.0;
  const Truth truth = derive_scenario_parameters(spec);
  RngStream rng(4, 0);
  const auto data = generate_dataset(spec, truth, rng);
  for (const auto& s : data) {
    const ContrastBlock b = arm_to_contrast(s);
    const double want = truth.data.vs_reference[index_of(truth.treatments, s.arms[1].treatment)] -
                        truth.data.vs_reference[index_of(truth.treatments, s.arms[0].treatment)];
    EXPECT_NEAR(b.y_star[0], want, 0.05) << s.id;
  }
}

TEST(ComputeMetrics, ExactEstimatesAndFixedIntervals) {
  const ScenarioSpec spec = default_scenario(1, "E", "E");
  const Truth truth = derive_scenario_parameters(spec);
  const auto targets = truth.target_indices();
  std::vector<ReplicateRecord> records;
  for (std::size_t r = 0; r < 3; ++r) {
    ReplicateRecord rec;
    rec.replicate = r;
    ModelRecord exact{SimModel::FreqContrast};
    ModelRecord wide{SimModel::BayesArm};
    for (const auto t : targets) {
      const double v = truth.data.vs_reference[t];
      exact.point.push_back(v);
      exact.lower.push_back(v);
      exact.upper.push_back(v);
      wide.point.push_back(v + 0.5);
      wide.lower.push_back(v - 1.0);
      wide.upper.push_back(v + 1.0);
    }
    exact.ranking.assign(truth.treatments.size(), 0.5);
    wide.ranking.assign(truth.treatments.size(), r == 0 ? 1.0 : 0.0);
    wide.max_rhat = r == 2 ? 1.2 : 1.0;
    rec.models = {exact, wide};
    rec.delta_dic = r == 0 ? -3.0 : 1.0;
    records.push_back(rec);
  }
  ModelRecord failed{SimModel::BayesArm};
  failed.failed = true;
  failed.error = "boom";
  records[0].models.push_back(failed);

  const SimReport rep = compute_metrics(records, truth);
  const Treatment a = lookup_treatment("A", spec.components);
  EXPECT_EQ(rep.param(SimModel::FreqContrast, a).bias, 0.0);
  EXPECT_EQ(rep.param(SimModel::FreqContrast, a).coverage, 1.0);
  EXPECT_NEAR(rep.param(SimModel::BayesArm, a).bias, 0.5, 1e-12);
  EXPECT_EQ(rep.param(SimModel::BayesArm, a).coverage, 1.0);
  EXPECT_NEAR(rep.param(SimModel::BayesArm, a).mean_length, 2.0, 1e-12);
  EXPECT_NEAR(rep.mean_score(SimModel::BayesArm, a), 1.0 / 3.0, 1e-12);
  const auto& h = rep.model_health(SimModel::BayesArm);
  EXPECT_EQ(h.attempted, 4u);
  EXPECT_EQ(h.failed, 1u);
  EXPECT_EQ(h.healthy, 2u);
  ASSERT_EQ(rep.failures.size(), 1u);
  ASSERT_TRUE(rep.delta_dic.has_value());
  EXPECT_EQ(rep.delta_dic->below, 1u);
  EXPECT_EQ(rep.delta_dic->within, 2u);
  EXPECT_EQ(rep.delta_dic->above, 0u);
  EXPECT_EQ(code_of([&] { rep.param(SimModel::AnchoredArm, a); }), ErrorCode::MissingTruth);
  EXPECT_EQ(code_of([&] { compute_metrics({}, truth); }), ErrorCode::InvalidArgument);
}

TEST(ComputeMetrics, DeltaBins) {
  const DicBins b = bin_delta_dic({-3.0, 1.0});
  EXPECT_EQ(b.below, 1u);
  EXPECT_EQ(b.within, 1u);
  EXPECT_EQ(b.above, 0u);
  const DicBins edges = bin_delta_dic({-2.0, 2.0, 2.5});
  EXPECT_EQ(edges.within, 2u);
  EXPECT_EQ(edges.above, 1u);
}

TEST(SimModelNames, RoundTrip) {
  for (const auto m : all_sim_models()) EXPECT_EQ(parse_sim_model(to_string(m)), m);
  EXPECT_EQ(code_of([] { parse_sim_model("nope"); }), ErrorCode::InvalidArgument);
}

TEST(RunStudy, IndependentOfWorkerCount) {
  const ScenarioSpec spec = default_scenario(1, "B", "E", 500, 3, 11);
  SimOptions opt;
  opt.models = {SimModel::FreqContrast, SimModel::BayesContrast};
  opt.mcmc.burn_in = 300;
  opt.mcmc.keep = 300;
  opt.workers = 1;
  const SimResult one = run_study(spec, opt);
  opt.workers = 3;
  const SimResult three = run_study(spec, opt);
  ASSERT_EQ(one.records.size(), 3u);
  ASSERT_EQ(three.records.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(one.records[r].replicate, r);
    for (std::size_t m = 0; m < 2; ++m) {
      EXPECT_EQ(one.records[r].models[m].point, three.records[r].models[m].point);
      EXPECT_EQ(one.records[r].models[m].upper, three.records[r].models[m].upper);
    }
  }
  EXPECT_FALSE(one.report.delta_dic.has_value());
}

TEST(RunStudy, ReplicateWithDic) {
  const ScenarioSpec spec = default_scenario(1, "E", "E", 500, 1, 12);
  const Truth truth = derive_scenario_parameters(spec);
  SimOptions opt;
  opt.models = {SimModel::AnchoredArm, SimModel::BayesArm};
  opt.mcmc.burn_in = 500;
  opt.mcmc.keep = 500;
  const ReplicateRecord rec = run_replicate(spec, truth, 0, opt);
  ASSERT_EQ(rec.models.size(), 2u);
  ASSERT_TRUE(rec.delta_dic.has_value());
  EXPECT_NEAR(*rec.delta_dic, *rec.models[1].dic - *rec.models[0].dic, 1e-12);
  EXPECT_GT(rec.models[0].sigma, 0.0);
}
