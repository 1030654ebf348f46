#include "cnma/effects.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "cnma/error.hpp"

namespace cnma {

namespace {

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

void require_covered(std::size_t size, const Treatment& t) {
  for (int c : t.components) {
    if (c < 0 || static_cast<std::size_t>(c) >= size) {
      throw Error(ErrorCode::UnknownComponent,
                  "component effects do not cover treatment '" + t.label + "'");
    }
  }
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "interval level must lie in (0, 1)");
  }
}

}  // namespace

double additive_effect(std::span<const double> d, const Treatment& treatment) {
  require_covered(d.size(), treatment);
  double sum = 0.0;
  for (int c : treatment.components) sum += d[static_cast<std::size_t>(c)];
  return sum;
}

double additive_effect(const Vector& d, const Treatment& treatment) {
  return additive_effect(std::span<const double>(d.data(), static_cast<std::size_t>(d.size())),
                         treatment);
}

Vector incidence(const Treatment& treatment, std::size_t num_components) {
  require_covered(num_components, treatment);
  Vector a = Vector::Zero(static_cast<Eigen::Index>(num_components));
  for (int c : treatment.components) a(c) = 1.0;
  return a;
}

EffectEstimate derive_relative_effect(const Vector& d, const Matrix& cov,
                                      const Treatment& comparator, const Treatment& target,
                                      double level) {
  require_level(level);
  const auto c = static_cast<std::size_t>(d.size());
  if (cov.rows() != d.size() || cov.cols() != d.size()) {
    throw Error(ErrorCode::DimensionMismatch, "covariance does not match effect vector");
  }
  EffectEstimate e{comparator, target};
  e.level = level;
  e.source = EstimateSource::Frequentist;
  if (comparator == target) {
    require_covered(c, target);
    return e;
  }
  const Vector w = incidence(target, c) - incidence(comparator, c);
  e.point = w.dot(d);
  e.se = std::sqrt(std::max(0.0, w.dot(cov * w)));
  const double z = normal_quantile(0.5 + level / 2.0);
  e.lower = e.point - z * e.se;
  e.upper = e.point + z * e.se;
  return e;
}

EffectEstimate derive_relative_effect(const Matrix& component_draws, const Treatment& comparator,
                                      const Treatment& target, double level) {
  require_level(level);
  if (component_draws.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "no posterior draws");
  }
  const auto c = static_cast<std::size_t>(component_draws.cols());
  EffectEstimate e{comparator, target};
  e.level = level;
  e.source = EstimateSource::Posterior;
  if (comparator == target) {
    require_covered(c, target);
    return e;
  }
  const Vector w = incidence(target, c) - incidence(comparator, c);
  const Vector values = component_draws * w;
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  e.point = values.mean();
  const double n = static_cast<double>(values.size());
  e.se = n > 1 ? std::sqrt((values.array() - e.point).square().sum() / (n - 1.0)) : 0.0;
  e.lower = quantile(sorted, 0.5 - level / 2.0);
  e.upper = quantile(sorted, 0.5 + level / 2.0);
  return e;
}

Matrix treatment_draws(const Matrix& component_draws, const std::vector<Treatment>& treatments) {
  const auto c = static_cast<std::size_t>(component_draws.cols());
  Matrix a(component_draws.cols(), static_cast<Eigen::Index>(treatments.size()));
  for (std::size_t t = 0; t < treatments.size(); ++t) {
    a.col(static_cast<Eigen::Index>(t)) = incidence(treatments[t], c);
  }
  return component_draws * a;
}

RankingReport sucra(const Matrix& draws, const std::vector<Treatment>& treatments,
                    Direction direction) {
  const auto n_treat = static_cast<std::size_t>(draws.cols());
  if (n_treat < 2 || treatments.size() != n_treat) {
    throw Error(ErrorCode::InvalidArgument, "sucra needs at least 2 treatments matching the draws");
  }
  if (draws.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "sucra needs posterior draws");
  }
  // SUCRA_k = (T - mean rank_k) / (T - 1), which equals the cumulative-rank
  // area (1/(T-1)) sum_{j<T} Pr(rank_k <= j) and extends to average ranks.
  const double sign = direction == Direction::HigherBetter ? -1.0 : 1.0;
  std::vector<double> rank_sum(n_treat, 0.0);
  std::vector<std::size_t> order(n_treat);
  std::vector<double> value(n_treat);
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    for (std::size_t t = 0; t < n_treat; ++t) value[t] = sign * draws(r, static_cast<Eigen::Index>(t));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    std::size_t i = 0;
    while (i < n_treat) {
      std::size_t j = i;
      while (j + 1 < n_treat && value[order[j + 1]] == value[order[i]]) ++j;
      const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank_sum[order[k]] += avg_rank;
      i = j + 1;
    }
  }
  RankingReport report{treatments, {}, RankingMethod::Sucra, direction};
  const double T = static_cast<double>(n_treat);
  const double n = static_cast<double>(draws.rows());
  for (std::size_t t = 0; t < n_treat; ++t) {
    report.scores.push_back((T - rank_sum[t] / n) / (T - 1.0));
  }
  return report;
}

AnchorCheck verify_unique_anchor(const std::map<Treatment, double>& d_relative_to_Y,
                                 const Treatment& Y, const Treatment& Z,
                                 const std::vector<Treatment>& multis, double tol) {
  if (Y == Z) {
    throw Error(ErrorCode::InvalidArgument, "verify_unique_anchor: Z must differ from Y");
  }
  auto effect_vs_Y = [&](const Treatment& t) {
    if (t == Y) return 0.0;
    const auto it = d_relative_to_Y.find(t);
    if (it == d_relative_to_Y.end()) {
      throw Error(ErrorCode::MissingTruth, "no effect relative to Y for '" + t.label + "'");
    }
    return it->second;
  };
  const double d_YZ = effect_vs_Y(Z);
  AnchorCheck check;
  for (const auto& x : multis) {
    if (x.size() < 2) {
      throw Error(ErrorCode::InvalidArgument, "'" + x.label + "' is not multicomponent");
    }
    // Consistency: d_{Z,t} = d_{Y,t} - d_{Y,Z}.
    const double d_ZX = effect_vs_Y(x) - d_YZ;
    double sum = 0.0;
    for (int c : x.components) {
      sum += effect_vs_Y(Treatment{"", {c}}) - d_YZ;
    }
    AnchorResidual r{x, std::abs(d_ZX - sum),
                     (static_cast<double>(x.size()) - 1.0) * std::abs(d_YZ)};
    check.max_residual = std::max(check.max_residual, r.residual);
    if (std::abs(r.residual - r.expected) > tol) check.matches_identity = false;
    check.residuals.push_back(std::move(r));
  }
  return check;
}

}  // namespace cnma
