#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnma/freq.hpp"
#include "cnma/mcmc.hpp"
#include "cnma/network.hpp"
#include "cnma/numerics.hpp"

namespace cnma {

enum class ModelKind { AnchoredArm, UnanchoredArm, UnanchoredContrast };

struct Priors {
  double d_var = 1000.0;
  double alpha_var = 1000.0;
  double sigma_upper = 2.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::UnanchoredArm;
  EffectsModel effects = EffectsModel::Random;
  std::optional<Treatment> anchor;  // required iff kind == AnchoredArm
  Priors priors;

  void validate() const;
  bool arm_level() const { return kind != ModelKind::UnanchoredContrast; }
  bool random() const { return effects == EffectsModel::Random; }
};

/// Natural parameter layout shared by the arm-level models:
///   [effects (d or d^(1))] [sigma, random only] [alpha_i per study]
///   [epsilon latents, random only].
/// A study whose first arm holds the reference treatment (always, for the
/// unanchored model) carries a_i - 1 latents with epsilon_1 = 0 and
/// covariance sigma^2 Sigma*; otherwise it carries a_i latents with
/// covariance sigma^2 Sigma.
class ArmLevelModel {
 public:
  ArmLevelModel(const ModelSpec& spec, const std::vector<Study>& studies, const Network& network);

  std::size_t num_effects() const { return num_effects_; }
  std::size_t num_studies() const { return studies_.size(); }
  std::size_t dim() const { return dim_; }
  bool random() const { return spec_.random(); }
  std::size_t sigma_index() const { return num_effects_; }
  std::size_t alpha_index(std::size_t study) const { return alpha_offset_ + study; }
  std::size_t latent_index(std::size_t study) const { return latent_offset_[study]; }
  std::size_t num_latents(std::size_t study) const;
  const std::vector<std::string>& names() const { return names_; }
  /// Component index each effect coordinate refers to.
  const std::vector<int>& effect_components() const { return effect_components_; }
  const std::vector<Study>& studies() const { return studies_; }

  double log_prior(std::span<const double> params) const;
  double log_likelihood(std::span<const double> params) const;
  double log_posterior(std::span<const double> params) const;
  /// -2 x binomial log-likelihood (normalizing constants included).
  double deviance(std::span<const double> params) const;
  /// Arm logits of one study under the given parameters.
  Vector logits(std::span<const double> params, std::size_t study) const;

  /// Sampler-side reparameterization: study i is driven by its arm-1 logit
  /// and standardized latents (epsilon_i = sigma L_i z_i); sigma and effects
  /// are shared. The posterior is unchanged (unit Jacobian for the shift,
  /// sigma^k L for the scaling is absorbed into the N(0, I) density of z).
  /// Random-effects models add two interweaving blocks that update effects
  /// and sigma in the centered parameterization.
  Target sampler_target() const;
  std::vector<Block> sampler_blocks() const;
  std::vector<double> sampler_init(RngStream& rng) const;

 private:
  struct StudyData {
    std::vector<long> events;
    std::vector<long> totals;
    Matrix design;        // a_i x num_effects
    bool baseline_zero;   // reference treatment in arm 1
    Matrix latent_chol;   // factor of Sigma* or Sigma
    Matrix latent_chol_inv;
    double log_binom = 0.0;
    std::size_t arms = 0;
  };

  double study_loglik(const StudyData& s, const Vector& eta) const;
  double sampler_study_terms(std::size_t i, std::span<const double> x) const;
  void sampler_to_natural(std::span<const double> x, std::span<double> out) const;
  // Moves that keep every arm logit (effects) or every latent (sigma) fixed.
  double shift_latents_with_effects(std::span<const double> from, std::span<double> to) const;
  double rescale_latents_with_sigma(std::span<const double> from, std::span<double> to) const;

  ModelSpec spec_;
  std::vector<Study> studies_;  // arms reordered for the anchored model
  std::vector<StudyData> data_;
  std::size_t num_effects_ = 0;
  std::size_t alpha_offset_ = 0;
  std::vector<std::size_t> latent_offset_;
  std::size_t dim_ = 0;
  std::vector<int> effect_components_;
  std::vector<std::string> names_;
  // sampler layout: [effects][sigma?][per study: arm-1 logit, z...]
  std::vector<std::size_t> sampler_study_offset_;
  std::size_t sampler_dim_ = 0;
  double alpha_log_norm_ = 0.0;
};

/// Contrast-level unanchored model with the heterogeneity integrated out:
/// y*_i ~ N(U*_i V_i d, S*_i + sigma^2 Sigma*_i). Layout [d (c)] [sigma].
class ContrastModel {
 public:
  ContrastModel(const ModelSpec& spec, const std::vector<ContrastBlock>& blocks,
                const Network& network);

  std::size_t dim() const { return dim_; }
  std::size_t num_effects() const { return num_effects_; }
  bool random() const { return spec_.random(); }
  const std::vector<std::string>& names() const { return names_; }

  double log_prior(std::span<const double> params) const;
  double log_likelihood(std::span<const double> params) const;
  double log_posterior(std::span<const double> params) const;
  /// Marginal covariance of study i's contrasts at the given sigma.
  Matrix marginal_covariance(std::size_t study, double sigma) const;

  Target sampler_target() const;
  std::vector<Block> sampler_blocks() const;
  std::vector<double> sampler_init(RngStream& rng) const;

 private:
  struct BlockData {
    Vector y;
    Matrix design;  // (a_i - 1) x c
    Matrix S;
    Matrix Sigma_star;
  };
  ModelSpec spec_;
  std::vector<BlockData> blocks_;
  std::size_t num_effects_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::string> names_;
};

double logpost_anchored_arm(std::span<const double> params, const std::vector<Study>& studies,
                            const ModelSpec& spec, const Network& network);
double logpost_unanchored_arm(std::span<const double> params, const std::vector<Study>& studies,
                              const ModelSpec& spec, const Network& network);
double logpost_unanchored_contrast(std::span<const double> params,
                                   const std::vector<ContrastBlock>& blocks, const ModelSpec& spec,
                                   const Network& network);

struct DicResult {
  double deviance_bar = 0.0;
  double deviance_at_mean = 0.0;
  double pD = 0.0;
  double dic = 0.0;
};

struct BayesFit {
  ModelSpec spec;
  PosteriorSample sample;
  std::size_t num_components = 0;
  std::vector<int> effect_components;  // component of each effect coordinate
  std::optional<std::size_t> sigma_dim;
  std::optional<DicResult> dic;

  /// Pooled draws of all c component effects; for the anchored model the
  /// anchor's column is identically zero.
  Matrix component_draws() const;
  std::optional<ParamSummary> sigma_summary(double level = 0.95) const;
};

BayesFit fit(const ModelSpec& spec, const std::vector<Study>& studies, const Network& network,
             const McmcConfig& config, bool with_dic = false);
BayesFit fit(const ModelSpec& spec, const std::vector<ContrastBlock>& blocks,
             const Network& network, const McmcConfig& config);

/// Conditional DIC of an arm-level fit.
DicResult dic(const BayesFit& fit, const std::vector<Study>& studies, const Network& network);

}  // namespace cnma
