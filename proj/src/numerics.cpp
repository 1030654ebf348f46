#include "cnma/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cnma/error.hpp"

namespace cnma {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": non-finite entries");
  }
}

}  // namespace

Matrix pinv(const Matrix& m, double rel_tol) {
  require_finite(m, "pinv");
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "pinv: SVD did not converge");
  }
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  Vector s_inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) s_inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

int matrix_rank(const Matrix& m, double rel_tol) {
  require_finite(m, "matrix_rank");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) ++rank;
  }
  return rank;
}

Matrix chol(const Matrix& m, double pivot_floor) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "chol: matrix is not square");
  }
  require_finite(m, "chol");
  const Eigen::Index n = m.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > pivot_floor)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "chol: pivot " + std::to_string(pivot) + " at row " + std::to_string(j));
    }
    l(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

double mvn_logpdf_chol(const Vector& x, const Vector& mean, const Matrix& lower) {
  if (x.size() != mean.size() || lower.rows() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mvn_logpdf: dimensions disagree");
  }
  const Vector z = lower.triangularView<Eigen::Lower>().solve(x - mean);
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  const double k = static_cast<double>(x.size());
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

double mvn_logpdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  if (cov.rows() != x.size() || cov.cols() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mvn_logpdf: covariance shape");
  }
  return mvn_logpdf_chol(x, mean, chol(cov));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double quantile(std::span<const double> sorted_draws, double p) {
  if (sorted_draws.empty()) {
    throw Error(ErrorCode::InvalidArgument, "quantile: empty input");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile: p outside [0, 1]");
  }
  const double h = (static_cast<double>(sorted_draws.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted_draws.size() - 1);
  return sorted_draws[lo] + (h - static_cast<double>(lo)) * (sorted_draws[hi] - sorted_draws[lo]);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  engine_.seed(seq);
}

double RngStream::uniform() { return uniform_(engine_); }

double RngStream::normal() { return normal_(engine_); }

long RngStream::binomial(long n, double p) {
  std::binomial_distribution<long> dist(n, p);
  return dist(engine_);
}

}  // namespace cnma
