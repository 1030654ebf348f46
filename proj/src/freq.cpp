#include "cnma/freq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cnma/design.hpp"
#include "cnma/error.hpp"

namespace cnma {

namespace {

struct Stacked {
  Matrix X;
  Vector y;
  Matrix S;      // blockdiag(S*_i)
  Matrix B;      // blockdiag(Sigma*_i)
};

Stacked stack_blocks(const std::vector<ContrastBlock>& blocks, const Network& network) {
  if (blocks.empty()) {
    throw Error(ErrorCode::EmptyNetwork, "no contrast blocks");
  }
  require_connected(network);
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    b.validate();
    rows += b.y_star.size();
  }
  const auto c = static_cast<Eigen::Index>(network.num_components());
  Stacked s{Matrix::Zero(rows, c), Vector::Zero(rows), Matrix::Zero(rows, rows),
            Matrix::Zero(rows, rows)};
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    const auto m = b.y_star.size();
    s.X.middleRows(r, m) = contrast_design(b, network.num_components());
    s.y.segment(r, m) = b.y_star;
    s.S.block(r, r, m, m) = b.covariance();
    s.B.block(r, r, m, m) = build_Sigma_star(b.num_arms());
    r += m;
  }
  return s;
}

Matrix block_inverse(const Matrix& blockdiag, const std::vector<ContrastBlock>& blocks) {
  Matrix w = Matrix::Zero(blockdiag.rows(), blockdiag.cols());
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    const auto m = b.y_star.size();
    const Matrix block = blockdiag.block(r, r, m, m);
    const Matrix l = chol(block);
    const Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(m, m));
    w.block(r, r, m, m) = l_inv.transpose() * l_inv;
    r += m;
  }
  return w;
}

}  // namespace

Heterogeneity estimate_tau2(const std::vector<ContrastBlock>& blocks, const Network& network) {
  const Stacked s = stack_blocks(blocks, network);
  const Matrix W = block_inverse(s.S, blocks);
  const Matrix XtW = s.X.transpose() * W;
  const Matrix info_inv = pinv(XtW * s.X);
  const Vector d = info_inv * (XtW * s.y);
  const Vector resid = s.y - s.X * d;

  Heterogeneity h;
  h.Q = resid.dot(W * resid);
  h.df = static_cast<int>(s.X.rows()) - matrix_rank(s.X);
  const Matrix P = W - XtW.transpose() * info_inv * XtW;
  h.trace_p = (P * s.B).trace();
  if (h.df <= 0) {
    h.undefined = true;
    return h;
  }
  if (h.trace_p > 0.0) h.tau2 = std::max(0.0, (h.Q - h.df) / h.trace_p);
  return h;
}

FreqFit gls_fit(const std::vector<ContrastBlock>& blocks, const Network& network,
                EffectsModel effects) {
  const Stacked s = stack_blocks(blocks, network);
  const Heterogeneity h = estimate_tau2(blocks, network);

  FreqFit fit;
  fit.effects = effects;
  fit.Q = h.Q;
  fit.df = h.df;
  fit.tau2_undefined = h.undefined;
  fit.tau2 = effects == EffectsModel::Random ? h.tau2 : 0.0;

  const Matrix omega = s.S + fit.tau2 * s.B;
  const Matrix W = block_inverse(omega, blocks);
  const Matrix XtW = s.X.transpose() * W;
  fit.cov_d = pinv(XtW * s.X);
  fit.cov_d = 0.5 * (fit.cov_d + fit.cov_d.transpose());
  fit.d_hat = fit.cov_d * (XtW * s.y);
  fit.rank_X = matrix_rank(s.X);
  return fit;
}

std::vector<double> p_scores(const FreqFit& fit, const std::vector<Treatment>& treatments,
                             Direction direction) {
  const auto T = treatments.size();
  if (T < 2) {
    throw Error(ErrorCode::InvalidArgument, "p_scores needs at least 2 treatments");
  }
  std::vector<double> scores(T, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    for (std::size_t l = 0; l < T; ++l) {
      if (k == l) continue;
      // d_{l,k} = theta_k - theta_l
      const auto e = derive_relative_effect(fit.d_hat, fit.cov_d, treatments[l], treatments[k]);
      if (!(e.se > 0.0)) {
        throw Error(ErrorCode::ZeroStandardError,
                    "zero standard error between '" + treatments[k].label + "' and '" +
                        treatments[l].label + "'");
      }
      const double z = e.point / e.se;
      scores[k] += normal_cdf(direction == Direction::HigherBetter ? z : -z);
    }
    scores[k] /= static_cast<double>(T - 1);
  }
  return scores;
}

}  // namespace cnma
