#pragma once

#include <map>
#include <span>
#include <vector>

#include "cnma/network.hpp"
#include "cnma/numerics.hpp"

namespace cnma {

enum class Direction { HigherBetter, LowerBetter };
enum class EstimateSource { Frequentist, Posterior };
enum class RankingMethod { Sucra, PScore };

/// d_{comparator,target} with an interval at `level`.
struct EffectEstimate {
  Treatment comparator;
  Treatment target;
  double point = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  EstimateSource source = EstimateSource::Frequentist;
};

struct RankingReport {
  std::vector<Treatment> treatments;
  std::vector<double> scores;
  RankingMethod method = RankingMethod::Sucra;
  Direction direction = Direction::HigherBetter;
};

/// Sum of the component entries of d belonging to the treatment.
double additive_effect(std::span<const double> d, const Treatment& treatment);
double additive_effect(const Vector& d, const Treatment& treatment);

/// 0/1 indicator of the treatment's components.
Vector incidence(const Treatment& treatment, std::size_t num_components);

/// Point estimate from d, uncertainty by propagating cov; normal interval.
EffectEstimate derive_relative_effect(const Vector& d, const Matrix& cov,
                                      const Treatment& comparator, const Treatment& target,
                                      double level = 0.95);

/// Per-draw evaluation over component draws (rows = draws, cols = components).
/// Point is the posterior mean; interval is equal-tailed.
EffectEstimate derive_relative_effect(const Matrix& component_draws, const Treatment& comparator,
                                      const Treatment& target, double level = 0.95);

/// Treatment-level draws (rows = draws, cols = treatments).
Matrix treatment_draws(const Matrix& component_draws, const std::vector<Treatment>& treatments);

/// SUCRA from per-draw ranks; ties within a draw get average ranks.
RankingReport sucra(const Matrix& draws, const std::vector<Treatment>& treatments,
                    Direction direction = Direction::HigherBetter);

struct AnchorResidual {
  Treatment multi;
  double residual = 0.0;  // |d_{Z,X} - sum_{c in X} d_{Z,c}|
  double expected = 0.0;  // (|X| - 1) |d_{Y,Z}|
};

struct AnchorCheck {
  std::vector<AnchorResidual> residuals;
  double max_residual = 0.0;
  bool matches_identity = true;
};

/// Given effects relative to Y (which satisfy Y-anchored additivity), tests
/// whether Z-anchored additivity could also hold. Every single component of
/// each multi, Z, and each multi must be present in d_relative_to_Y.
AnchorCheck verify_unique_anchor(const std::map<Treatment, double>& d_relative_to_Y,
                                 const Treatment& Y, const Treatment& Z,
                                 const std::vector<Treatment>& multis, double tol = 1e-12);

}  // namespace cnma
