#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cnma {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultPinvTol = 1e-12;

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero.
Matrix pinv(const Matrix& m, double rel_tol = kDefaultPinvTol);

/// Numerical rank using the same cutoff as pinv.
int matrix_rank(const Matrix& m, double rel_tol = kDefaultPinvTol);

/// Lower Cholesky factor of a symmetric matrix. Throws NotPositiveDefinite
/// when a pivot falls at or below the floor.
Matrix chol(const Matrix& m, double pivot_floor = 0.0);

/// Gaussian log-density computed through the Cholesky factor of cov.
double mvn_logpdf(const Vector& x, const Vector& mean, const Matrix& cov);

/// log N(x; mean, L L') for a precomputed lower factor.
double mvn_logpdf_chol(const Vector& x, const Vector& mean, const Matrix& lower);

double normal_cdf(double z);

/// Linear-interpolation (type 7) quantile of already sorted draws.
double quantile(std::span<const double> sorted_draws, double p);

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double inv_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Reproducible random stream keyed by (seed, stream id). Two streams with the
/// same key produce identical draws; distinct stream ids are independent.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform();
  double normal();
  long binomial(long n, double p);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace cnma
