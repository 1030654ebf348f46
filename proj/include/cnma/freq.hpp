#pragma once

#include <map>
#include <string>
#include <vector>

#include "cnma/effects.hpp"
#include "cnma/network.hpp"
#include "cnma/numerics.hpp"

namespace cnma {

enum class EffectsModel { Fixed, Random };

struct Heterogeneity {
  double tau2 = 0.0;
  double Q = 0.0;
  int df = 0;
  double trace_p = 0.0;
  bool undefined = false;  // df <= 0: tau2 reported as 0
};

struct FreqFit {
  Vector d_hat;  // one entry per component, relative to the data-selected anchor
  Matrix cov_d;
  double tau2 = 0.0;
  double Q = 0.0;
  int df = 0;
  int rank_X = 0;
  bool tau2_undefined = false;
  EffectsModel effects = EffectsModel::Fixed;
};

/// Generalized DerSimonian-Laird moment estimate of the between-study
/// variance, from the fixed-effect GLS residuals. The random-effect
/// structure is tau^2 Sigma*_i per block, so the moment equation uses
/// trace(P B) with B = blockdiag(Sigma*_i).
Heterogeneity estimate_tau2(const std::vector<ContrastBlock>& blocks, const Network& network);

/// GLS with a pseudoinverse: d = (X' W X)^+ X' W y, cov = (X' W X)^+,
/// W = blockdiag(S*_i + tau^2 Sigma*_i)^-1. tau^2 is estimated first and
/// then held fixed under random effects.
FreqFit gls_fit(const std::vector<ContrastBlock>& blocks, const Network& network,
                EffectsModel effects);

/// P-scores of the listed treatments.
std::vector<double> p_scores(const FreqFit& fit, const std::vector<Treatment>& treatments,
                             Direction direction = Direction::HigherBetter);

}  // namespace cnma
