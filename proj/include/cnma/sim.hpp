#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnma/bayes.hpp"
#include "cnma/effects.hpp"
#include "cnma/mcmc.hpp"
#include "cnma/network.hpp"

namespace cnma {

struct TopologyEdge {
  Treatment first;
  Treatment second;
  std::size_t trials = 1;
};

/// One simulation scenario. Single-component effects and alpha are given
/// relative to `reference` (the comparator every reported contrast uses);
/// data are generated with additivity holding under `data_anchor`.
struct ScenarioSpec {
  int network_id = 1;
  ComponentDictionary components;
  std::vector<TopologyEdge> topology;
  Treatment reference;
  std::vector<double> reference_effects;  // d_{reference,c} per component index
  double alpha = 0.0;                     // baseline logit of the reference
  double sigma = 0.0;
  Treatment data_anchor;
  Treatment analysis_anchor;
  long n_per_arm = 500;
  std::size_t replicates = 200;
  std::uint64_t seed = 1;

  void validate() const;
  /// Distinct treatments of the topology in first-appearance order.
  std::vector<Treatment> treatments() const;
};

/// Shipped scenarios: network 1 (reference E) or network 2 (reference C).
/// Anchor labels must name single components of the network.
ScenarioSpec default_scenario(int network_id, std::string_view data_anchor,
                              std::string_view analysis_anchor, long n_per_arm = 500,
                              std::size_t replicates = 200, std::uint64_t seed = 1);

/// Truth under one anchor: additivity holds for effects relative to it.
struct AnchorTruth {
  Treatment anchor;
  double alpha = 0.0;                 // baseline logit of the anchor
  std::vector<double> component;      // d_{anchor,c} per component index
  std::vector<double> vs_reference;   // d_{reference,j} per scenario treatment
};

struct Truth {
  Treatment reference;
  std::vector<Treatment> treatments;  // scenario treatments
  AnchorTruth data;                   // generates the data
  AnchorTruth analysis;               // what the anchored model assumes

  /// Targets of the reported contrasts: every treatment except the reference.
  std::vector<std::size_t> target_indices() const;
};

AnchorTruth anchor_truth(const ScenarioSpec& spec, const Treatment& anchor);
Truth derive_scenario_parameters(const ScenarioSpec& spec);

/// One replicate's trials. The data anchor sits in arm 1 whenever a trial
/// includes it.
std::vector<Study> generate_dataset(const ScenarioSpec& spec, const Truth& truth, RngStream& rng);

enum class SimModel { AnchoredArm, FreqContrast, BayesContrast, BayesArm };

std::string to_string(SimModel model);
SimModel parse_sim_model(std::string_view name);
inline const std::vector<SimModel>& all_sim_models() {
  static const std::vector<SimModel> models{SimModel::AnchoredArm, SimModel::FreqContrast,
                                            SimModel::BayesContrast, SimModel::BayesArm};
  return models;
}

struct ModelRecord {
  SimModel model = SimModel::FreqContrast;
  bool failed = false;
  std::string error;
  // aligned with Truth::target_indices()
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> ranking;  // SUCRA or P-score per scenario treatment
  double sigma = 0.0;           // posterior mean of sigma, or sqrt(tau^2)
  double max_rhat = 0.0;        // over effects and sigma; 0 for the frequentist fit
  std::optional<double> dic;
};

struct ReplicateRecord {
  std::size_t replicate = 0;
  std::vector<ModelRecord> models;
  std::optional<double> delta_dic;  // DIC(unanchored arm) - DIC(anchored arm)
};

struct ParamMetrics {
  SimModel model = SimModel::FreqContrast;
  Treatment target;
  double truth = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  double mean_length = 0.0;
  std::size_t n = 0;
};

struct RankMetrics {
  SimModel model = SimModel::FreqContrast;
  Treatment treatment;
  double mean_score = 0.0;
};

struct ModelHealth {
  SimModel model = SimModel::FreqContrast;
  std::size_t attempted = 0;
  std::size_t failed = 0;
  std::size_t healthy = 0;  // successful fits with max rhat < 1.05
  double mean_sigma = 0.0;
};

struct DicBins {
  std::size_t below = 0;   // < -2
  std::size_t within = 0;  // [-2, 2]
  std::size_t above = 0;   // > 2
};

struct SimReport {
  std::size_t replicates = 0;
  std::vector<ParamMetrics> params;
  std::vector<RankMetrics> rankings;
  std::vector<ModelHealth> health;
  std::optional<DicBins> delta_dic;
  std::vector<std::string> failures;

  const ParamMetrics& param(SimModel model, const Treatment& target) const;
  double mean_score(SimModel model, const Treatment& treatment) const;
  const ModelHealth& model_health(SimModel model) const;
};

inline constexpr double kRhatThreshold = 1.05;

DicBins bin_delta_dic(const std::vector<double>& deltas);

SimReport compute_metrics(const std::vector<ReplicateRecord>& records, const Truth& truth);

struct SimOptions {
  std::vector<SimModel> models = all_sim_models();
  McmcConfig mcmc;
  std::size_t workers = 1;
  double level = 0.95;
  Priors priors;
};

struct SimResult {
  Truth truth;
  std::vector<ReplicateRecord> records;
  SimReport report;
};

/// Fits the selected models to one generated replicate.
ReplicateRecord run_replicate(const ScenarioSpec& spec, const Truth& truth, std::size_t replicate,
                              const SimOptions& options);

SimResult run_study(const ScenarioSpec& spec, const SimOptions& options);

}  // namespace cnma
