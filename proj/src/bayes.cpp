#include "cnma/bayes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cnma/design.hpp"
#include "cnma/error.hpp"

namespace cnma {

namespace {

constexpr std::size_t kMaxArms = 64;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double normal_logpdf(double x, double var) {
  return -0.5 * (kLog2Pi + std::log(var) + x * x / var);
}

double sigma_log_prior(double sigma, double upper) {
  if (!(sigma > 0.0 && sigma < upper)) return kNegInf;
  return -std::log(upper);
}

double log_binomial_coefficient(long n, long r) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(r) + 1.0) -
         std::lgamma(static_cast<double>(n - r) + 1.0);
}

std::string effect_name(int component, const Network& network) {
  return "d[" + network.components.name(component) + "]";
}

}  // namespace

void ModelSpec::validate() const {
  if (kind == ModelKind::AnchoredArm && !anchor) {
    throw Error(ErrorCode::UnknownAnchor, "anchored model requires an anchor treatment");
  }
  if (kind != ModelKind::AnchoredArm && anchor) {
    throw Error(ErrorCode::InvalidArgument, "unanchored models take no anchor");
  }
  if (!(priors.sigma_upper > 0.0) || !(priors.d_var > 0.0) || !(priors.alpha_var > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "prior scales must be positive");
  }
}

// ---------------------------------------------------------------------------
// Arm-level models

ArmLevelModel::ArmLevelModel(const ModelSpec& spec, const std::vector<Study>& studies,
                             const Network& network)
    : spec_(spec) {
  spec_.validate();
  if (!spec_.arm_level()) {
    throw Error(ErrorCode::InvalidArgument, "ArmLevelModel needs an arm-level model kind");
  }
  if (studies.empty()) {
    throw Error(ErrorCode::EmptyNetwork, "no studies to fit");
  }
  require_connected(network);
  const auto c = network.num_components();
  std::optional<int> anchor_comp;
  if (spec_.kind == ModelKind::AnchoredArm) anchor_comp = anchor_component(*spec_.anchor, network);
  for (std::size_t k = 0; k < c; ++k) {
    if (anchor_comp && static_cast<int>(k) == *anchor_comp) continue;
    effect_components_.push_back(static_cast<int>(k));
    names_.push_back(effect_name(static_cast<int>(k), network));
  }
  num_effects_ = effect_components_.size();
  if (spec_.random()) names_.push_back("sigma");
  alpha_offset_ = names_.size();

  for (const auto& s : studies) {
    validate_study(s);
    if (s.arms.size() > kMaxArms) {
      throw Error(ErrorCode::InvalidArgument, "study '" + s.id + "' has too many arms");
    }
    Study study = s;
    if (anchor_comp) {
      const auto it = std::find_if(study.arms.begin(), study.arms.end(),
                                   [&](const ArmRecord& a) { return a.treatment == *spec_.anchor; });
      if (it != study.arms.end()) std::rotate(study.arms.begin(), it, it + 1);
    }
    std::vector<Treatment> arms;
    for (const auto& a : study.arms) arms.push_back(a.treatment);
    StudyData d;
    d.arms = arms.size();
    d.design = anchor_comp ? build_V_anchored(arms, network, *spec_.anchor) : build_V(arms, c);
    d.baseline_zero = !anchor_comp || arms.front() == *spec_.anchor;
    d.latent_chol = d.baseline_zero ? chol(build_Sigma_star(d.arms)) : chol(build_Sigma(d.arms, false));
    d.latent_chol_inv = d.latent_chol.triangularView<Eigen::Lower>().solve(
        Matrix::Identity(d.latent_chol.rows(), d.latent_chol.cols()));
    for (const auto& a : study.arms) {
      d.events.push_back(a.events);
      d.totals.push_back(a.total);
      d.log_binom += log_binomial_coefficient(a.total, a.events);
    }
    studies_.push_back(std::move(study));
    data_.push_back(std::move(d));
  }
  for (const auto& s : studies_) names_.push_back("alpha[" + s.id + "]");
  std::size_t offset = names_.size();
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    latent_offset_.push_back(offset);
    const std::size_t k = num_latents(i);
    const std::size_t first_arm = data_[i].baseline_zero ? 2 : 1;
    for (std::size_t j = 0; j < k; ++j) {
      names_.push_back("eps[" + studies_[i].id + "," + std::to_string(first_arm + j) + "]");
    }
    offset += k;
  }
  dim_ = names_.size();

  alpha_log_norm_ = -0.5 * (kLog2Pi + std::log(spec_.priors.alpha_var));
  sampler_dim_ = num_effects_ + (spec_.random() ? 1 : 0);
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    sampler_study_offset_.push_back(sampler_dim_);
    sampler_dim_ += 1 + num_latents(i);
  }
}

std::size_t ArmLevelModel::num_latents(std::size_t study) const {
  if (!spec_.random()) return 0;
  const auto& d = data_.at(study);
  return d.baseline_zero ? d.arms - 1 : d.arms;
}

double ArmLevelModel::study_loglik(const StudyData& s, const Vector& eta) const {
  double ll = s.log_binom;
  for (std::size_t j = 0; j < s.arms; ++j) {
    const double e = eta(static_cast<Eigen::Index>(j));
    ll += static_cast<double>(s.events[j]) * e - static_cast<double>(s.totals[j]) * softplus(e);
  }
  return ll;
}

Vector ArmLevelModel::logits(std::span<const double> params, std::size_t study) const {
  if (params.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match the model layout");
  }
  const auto& s = data_.at(study);
  const Eigen::Map<const Vector> theta(params.data(), static_cast<Eigen::Index>(num_effects_));
  Vector eta = s.design * theta;
  eta.array() += params[alpha_index(study)];
  const std::size_t k = num_latents(study);
  const std::size_t first = s.baseline_zero ? 1 : 0;
  for (std::size_t j = 0; j < k; ++j) {
    eta(static_cast<Eigen::Index>(first + j)) += params[latent_index(study) + j];
  }
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    if (!std::isfinite(eta(j))) {
      throw Error(ErrorCode::NonFiniteDensity, "non-finite logit in study '" + studies_[study].id + "'");
    }
  }
  return eta;
}

double ArmLevelModel::log_prior(std::span<const double> params) const {
  if (params.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match the model layout");
  }
  double lp = 0.0;
  for (std::size_t k = 0; k < num_effects_; ++k) lp += normal_logpdf(params[k], spec_.priors.d_var);
  double sigma = 0.0;
  if (spec_.random()) {
    sigma = params[sigma_index()];
    lp += sigma_log_prior(sigma, spec_.priors.sigma_upper);
    if (lp == kNegInf) return lp;
  }
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    lp += normal_logpdf(params[alpha_index(i)], spec_.priors.alpha_var);
    const std::size_t k = num_latents(i);
    if (k == 0) continue;
    const Eigen::Map<const Vector> eps(params.data() + latent_index(i), static_cast<Eigen::Index>(k));
    lp += mvn_logpdf_chol(eps, Vector::Zero(static_cast<Eigen::Index>(k)), sigma * data_[i].latent_chol);
  }
  return lp;
}

double ArmLevelModel::log_likelihood(std::span<const double> params) const {
  double ll = 0.0;
  for (std::size_t i = 0; i < studies_.size(); ++i) ll += study_loglik(data_[i], logits(params, i));
  return ll;
}

double ArmLevelModel::log_posterior(std::span<const double> params) const {
  const double lp = log_prior(params);
  if (lp == kNegInf) return lp;
  return lp + log_likelihood(params);
}

double ArmLevelModel::deviance(std::span<const double> params) const {
  return -2.0 * log_likelihood(params);
}

double ArmLevelModel::sampler_study_terms(std::size_t i, std::span<const double> x) const {
  const auto& s = data_[i];
  const std::size_t off = sampler_study_offset_[i];
  const std::size_t k = num_latents(i);
  const double sigma = spec_.random() ? x[num_effects_] : 0.0;

  std::array<double, kMaxArms> eps{};
  double log_z = 0.0;
  if (k > 0) {
    const std::size_t first = s.baseline_zero ? 1 : 0;
    for (std::size_t r = 0; r < k; ++r) {
      double v = 0.0;
      for (std::size_t q = 0; q <= r; ++q) {
        v += s.latent_chol(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) * x[off + 1 + q];
      }
      eps[first + r] = sigma * v;
      log_z -= 0.5 * (kLog2Pi + x[off + 1 + r] * x[off + 1 + r]);
    }
  }
  std::array<double, kMaxArms> lin{};
  for (std::size_t j = 0; j < s.arms; ++j) {
    double v = 0.0;
    for (std::size_t q = 0; q < num_effects_; ++q) {
      v += s.design(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) * x[q];
    }
    lin[j] = v;
  }
  const double base_logit = x[off];
  const double alpha = base_logit - lin[0] - eps[0];
  double ll = s.log_binom;
  for (std::size_t j = 0; j < s.arms; ++j) {
    const double eta = base_logit + (lin[j] - lin[0]) + (eps[j] - eps[0]);
    ll += static_cast<double>(s.events[j]) * eta - static_cast<double>(s.totals[j]) * softplus(eta);
  }
  return ll + alpha_log_norm_ - 0.5 * alpha * alpha / spec_.priors.alpha_var + log_z;
}

void ArmLevelModel::sampler_to_natural(std::span<const double> x, std::span<double> out) const {
  for (std::size_t q = 0; q < num_effects_; ++q) out[q] = x[q];
  const double sigma = spec_.random() ? x[num_effects_] : 0.0;
  if (spec_.random()) out[sigma_index()] = sigma;
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    const auto& s = data_[i];
    const std::size_t off = sampler_study_offset_[i];
    const std::size_t k = num_latents(i);
    double eps0 = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      double v = 0.0;
      for (std::size_t q = 0; q <= r; ++q) {
        v += s.latent_chol(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) * x[off + 1 + q];
      }
      out[latent_index(i) + r] = sigma * v;
      if (r == 0 && !s.baseline_zero) eps0 = sigma * v;
    }
    double lin0 = 0.0;
    for (std::size_t q = 0; q < num_effects_; ++q) lin0 += s.design(0, static_cast<Eigen::Index>(q)) * x[q];
    out[alpha_index(i)] = x[off] - lin0 - eps0;
  }
}

double ArmLevelModel::shift_latents_with_effects(std::span<const double> from,
                                                 std::span<double> to) const {
  const double sigma = from[num_effects_];
  std::array<double, kMaxArms> dlin{};
  std::array<double, kMaxArms> shift{};
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const auto& s = data_[i];
    const std::size_t k = num_latents(i);
    if (k == 0) continue;
    for (std::size_t j = 0; j < s.arms; ++j) {
      double v = 0.0;
      for (std::size_t q = 0; q < num_effects_; ++q) {
        v += s.design(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) * (to[q] - from[q]);
      }
      dlin[j] = v;
    }
    const std::size_t first = s.baseline_zero ? 1 : 0;
    for (std::size_t r = 0; r < k; ++r) shift[r] = first + r == 0 ? 0.0 : dlin[first + r] - dlin[0];
    const std::size_t off = sampler_study_offset_[i] + 1;
    for (std::size_t r = 0; r < k; ++r) {
      double v = 0.0;
      for (std::size_t q = 0; q <= r; ++q) {
        v += s.latent_chol_inv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) * shift[q];
      }
      to[off + r] = from[off + r] - v / sigma;
    }
  }
  return 0.0;
}

double ArmLevelModel::rescale_latents_with_sigma(std::span<const double> from,
                                                 std::span<double> to) const {
  const double ratio = from[num_effects_] / to[num_effects_];
  std::size_t total = 0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const std::size_t k = num_latents(i);
    const std::size_t off = sampler_study_offset_[i] + 1;
    for (std::size_t r = 0; r < k; ++r) to[off + r] = from[off + r] * ratio;
    total += k;
  }
  return static_cast<double>(total) * std::log(ratio);
}

Target ArmLevelModel::sampler_target() const {
  Target t;
  t.dim = sampler_dim_;
  t.names = names_;
  const std::size_t shared_blocks = spec_.random() ? 4 : 1;
  auto shared = [this](std::span<const double> x) {
    double lp = 0.0;
    for (std::size_t q = 0; q < num_effects_; ++q) lp += normal_logpdf(x[q], spec_.priors.d_var);
    if (spec_.random()) {
      lp += sigma_log_prior(x[num_effects_], spec_.priors.sigma_upper);
      if (lp == kNegInf) return lp;
    }
    return lp;
  };
  t.log_density = [this, shared](std::span<const double> x) {
    double lp = shared(x);
    if (lp == kNegInf) return lp;
    for (std::size_t i = 0; i < data_.size(); ++i) lp += sampler_study_terms(i, x);
    return lp;
  };
  t.block_log_density = [this, shared, shared_blocks](std::size_t block, std::span<const double> x) {
    if (block >= shared_blocks) return sampler_study_terms(block - shared_blocks, x);
    double lp = shared(x);
    if (lp == kNegInf) return lp;
    for (std::size_t i = 0; i < data_.size(); ++i) lp += sampler_study_terms(i, x);
    return lp;
  };
  t.report = [this](std::span<const double> x, std::span<double> out) { sampler_to_natural(x, out); };
  return t;
}

std::vector<Block> ArmLevelModel::sampler_blocks() const {
  std::vector<Block> blocks;
  Block effects;
  for (std::size_t q = 0; q < num_effects_; ++q) effects.dims.push_back(q);
  effects.initial_step = 0.1;
  blocks.push_back(effects);
  if (spec_.random()) {
    blocks.push_back(Block{{num_effects_}, BlockScale::Log, 0.2, {}});
    Block centered_effects = effects;
    centered_effects.transform = [this](std::span<const double> from, std::span<double> to) {
      return shift_latents_with_effects(from, to);
    };
    blocks.push_back(centered_effects);
    blocks.push_back(Block{{num_effects_}, BlockScale::Log, 0.2,
                           [this](std::span<const double> from, std::span<double> to) {
                             return rescale_latents_with_sigma(from, to);
                           }});
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    Block b;
    b.initial_step = 0.1;
    b.local = true;
    for (std::size_t r = 0; r <= num_latents(i); ++r) b.dims.push_back(sampler_study_offset_[i] + r);
    blocks.push_back(b);
  }
  return blocks;
}

std::vector<double> ArmLevelModel::sampler_init(RngStream& rng) const {
  std::vector<double> x(sampler_dim_, 0.0);
  for (std::size_t q = 0; q < num_effects_; ++q) x[q] = rng.uniform() - 0.5;
  if (spec_.random()) {
    x[num_effects_] = 0.5 * spec_.priors.sigma_upper * (1.0 + 0.5 * (rng.uniform() - 0.5));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double alpha = rng.uniform() - 0.5;
    double lin0 = 0.0;
    for (std::size_t q = 0; q < num_effects_; ++q) lin0 += data_[i].design(0, static_cast<Eigen::Index>(q)) * x[q];
    x[sampler_study_offset_[i]] = alpha + lin0;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Contrast-level model

ContrastModel::ContrastModel(const ModelSpec& spec, const std::vector<ContrastBlock>& blocks,
                             const Network& network)
    : spec_(spec) {
  spec_.validate();
  if (spec_.kind != ModelKind::UnanchoredContrast) {
    throw Error(ErrorCode::InvalidArgument, "ContrastModel needs the contrast model kind");
  }
  if (blocks.empty()) {
    throw Error(ErrorCode::EmptyNetwork, "no contrast blocks to fit");
  }
  require_connected(network);
  num_effects_ = network.num_components();
  for (std::size_t k = 0; k < num_effects_; ++k) names_.push_back(effect_name(static_cast<int>(k), network));
  if (spec_.random()) names_.push_back("sigma");
  dim_ = names_.size();
  for (const auto& b : blocks) {
    b.validate();
    BlockData d{b.y_star, contrast_design(b, num_effects_), b.covariance(),
                build_Sigma_star(b.num_arms())};
    chol(d.S);  // positive definiteness of S*_i
    blocks_.push_back(std::move(d));
  }
}

Matrix ContrastModel::marginal_covariance(std::size_t study, double sigma) const {
  const auto& b = blocks_.at(study);
  return b.S + sigma * sigma * b.Sigma_star;
}

double ContrastModel::log_prior(std::span<const double> params) const {
  if (params.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match the model layout");
  }
  double lp = 0.0;
  for (std::size_t k = 0; k < num_effects_; ++k) lp += normal_logpdf(params[k], spec_.priors.d_var);
  if (spec_.random()) lp += sigma_log_prior(params[num_effects_], spec_.priors.sigma_upper);
  return lp;
}

double ContrastModel::log_likelihood(std::span<const double> params) const {
  if (params.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match the model layout");
  }
  const double sigma = spec_.random() ? params[num_effects_] : 0.0;
  const double s2 = sigma * sigma;
  double ll = 0.0;
  for (const auto& b : blocks_) {
    const auto m = b.y.size();
    if (m == 1) {
      double mu = 0.0;
      for (std::size_t k = 0; k < num_effects_; ++k) mu += b.design(0, static_cast<Eigen::Index>(k)) * params[k];
      ll += normal_logpdf(b.y(0) - mu, b.S(0, 0) + s2);
      continue;
    }
    const Eigen::Map<const Vector> d(params.data(), static_cast<Eigen::Index>(num_effects_));
    ll += mvn_logpdf_chol(b.y, b.design * d, chol(b.S + s2 * b.Sigma_star));
  }
  return ll;
}

double ContrastModel::log_posterior(std::span<const double> params) const {
  const double lp = log_prior(params);
  if (lp == kNegInf) return lp;
  return lp + log_likelihood(params);
}

Target ContrastModel::sampler_target() const {
  Target t;
  t.dim = dim_;
  t.names = names_;
  t.log_density = [this](std::span<const double> x) { return log_posterior(x); };
  return t;
}

std::vector<Block> ContrastModel::sampler_blocks() const {
  std::vector<Block> blocks;
  Block effects;
  for (std::size_t q = 0; q < num_effects_; ++q) effects.dims.push_back(q);
  effects.initial_step = 0.1;
  blocks.push_back(effects);
  if (spec_.random()) blocks.push_back(Block{{num_effects_}, BlockScale::Log, 0.2, {}});
  return blocks;
}

std::vector<double> ContrastModel::sampler_init(RngStream& rng) const {
  std::vector<double> x(dim_, 0.0);
  for (std::size_t q = 0; q < num_effects_; ++q) x[q] = rng.uniform() - 0.5;
  if (spec_.random()) {
    x[num_effects_] = 0.5 * spec_.priors.sigma_upper * (1.0 + 0.5 * (rng.uniform() - 0.5));
  }
  return x;
}

// ---------------------------------------------------------------------------

double logpost_anchored_arm(std::span<const double> params, const std::vector<Study>& studies,
                            const ModelSpec& spec, const Network& network) {
  if (spec.kind != ModelKind::AnchoredArm) {
    throw Error(ErrorCode::InvalidArgument, "spec is not the anchored arm-level model");
  }
  return ArmLevelModel(spec, studies, network).log_posterior(params);
}

double logpost_unanchored_arm(std::span<const double> params, const std::vector<Study>& studies,
                              const ModelSpec& spec, const Network& network) {
  if (spec.kind != ModelKind::UnanchoredArm) {
    throw Error(ErrorCode::InvalidArgument, "spec is not the unanchored arm-level model");
  }
  return ArmLevelModel(spec, studies, network).log_posterior(params);
}

double logpost_unanchored_contrast(std::span<const double> params,
                                   const std::vector<ContrastBlock>& blocks, const ModelSpec& spec,
                                   const Network& network) {
  return ContrastModel(spec, blocks, network).log_posterior(params);
}

Matrix BayesFit::component_draws() const {
  const Matrix pooled = sample.pooled();
  Matrix out = Matrix::Zero(pooled.rows(), static_cast<Eigen::Index>(num_components));
  for (std::size_t q = 0; q < effect_components.size(); ++q) {
    out.col(effect_components[q]) = pooled.col(static_cast<Eigen::Index>(q));
  }
  return out;
}

std::optional<ParamSummary> BayesFit::sigma_summary(double level) const {
  if (!sigma_dim) return std::nullopt;
  const Vector col = sample.pooled_column(*sigma_dim);
  return summarize_draws(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                         level, "sigma");
}

namespace {

std::vector<std::vector<double>> chain_inits(const McmcConfig& config, auto&& make) {
  std::vector<std::vector<double>> inits;
  for (std::size_t c = 0; c < config.n_chains; ++c) {
    RngStream rng(config.seed, 1000 + c);
    inits.push_back(make(rng));
  }
  return inits;
}

}  // namespace

BayesFit fit(const ModelSpec& spec, const std::vector<Study>& studies, const Network& network,
             const McmcConfig& config, bool with_dic) {
  if (!spec.arm_level()) {
    throw Error(ErrorCode::InvalidArgument, "arm-level data given to the contrast-level model");
  }
  const ArmLevelModel model(spec, studies, network);
  BayesFit out;
  out.spec = spec;
  out.num_components = network.num_components();
  out.effect_components = model.effect_components();
  if (model.random()) out.sigma_dim = model.sigma_index();
  const auto inits = chain_inits(config, [&](RngStream& rng) { return model.sampler_init(rng); });
  out.sample = run_chains(model.sampler_target(), inits, model.sampler_blocks(), config);
  if (with_dic) out.dic = dic(out, studies, network);
  return out;
}

BayesFit fit(const ModelSpec& spec, const std::vector<ContrastBlock>& blocks,
             const Network& network, const McmcConfig& config) {
  const ContrastModel model(spec, blocks, network);
  BayesFit out;
  out.spec = spec;
  out.num_components = network.num_components();
  for (std::size_t k = 0; k < network.num_components(); ++k) out.effect_components.push_back(static_cast<int>(k));
  if (model.random()) out.sigma_dim = model.num_effects();
  const auto inits = chain_inits(config, [&](RngStream& rng) { return model.sampler_init(rng); });
  out.sample = run_chains(model.sampler_target(), inits, model.sampler_blocks(), config);
  return out;
}

DicResult dic(const BayesFit& fit, const std::vector<Study>& studies, const Network& network) {
  if (!fit.spec.arm_level()) {
    throw Error(ErrorCode::InvalidArgument, "DIC is defined for the arm-level models only");
  }
  const ArmLevelModel model(fit.spec, studies, network);
  if (model.dim() != fit.sample.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "fit layout does not match the data");
  }
  const Matrix draws = fit.sample.pooled();
  std::vector<double> row(model.dim());
  double dbar = 0.0;
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    for (std::size_t d = 0; d < model.dim(); ++d) row[d] = draws(r, static_cast<Eigen::Index>(d));
    dbar += model.deviance(row);
  }
  dbar /= static_cast<double>(draws.rows());
  const Vector means = draws.colwise().mean().transpose();
  const double dhat = model.deviance(std::span<const double>(means.data(), model.dim()));
  DicResult res;
  res.deviance_bar = dbar;
  res.deviance_at_mean = dhat;
  res.pD = dbar - dhat;
  res.dic = dbar + res.pD;
  return res;
}

}  // namespace cnma
