#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cnma/numerics.hpp"

namespace cnma {

struct McmcConfig {
  std::size_t n_chains = 2;
  std::size_t burn_in = 2000;
  std::size_t keep = 5000;
  std::size_t thin = 1;
  double target_accept_block = 0.234;
  double target_accept_scalar = 0.44;
  std::size_t adapt_window = 100;
  std::uint64_t seed = 20240101;
  bool parallel_chains = true;

  void validate() const;
};

enum class BlockScale { Linear, Log };

/// A group of coordinates updated together by one random-walk proposal.
/// Log blocks propose on the log scale (coordinates must stay positive).
/// transform, when set, moves the remaining coordinates along with the
/// block: it receives the current state and the proposal (block dims
/// already moved), edits other coordinates of the proposal in place and
/// returns the log Jacobian of the move. The move must be its own inverse
/// under a negated step. Blocks without a transform must partition the
/// coordinates; transform blocks may revisit them.
struct Block {
  std::vector<std::size_t> dims;
  BlockScale scale = BlockScale::Linear;
  double initial_step = 0.1;
  std::function<double(std::span<const double>, std::span<double>)> transform;
  /// Evaluate this block with Target::block_log_density instead of the
  /// cached full density.
  bool local = false;
};

/// Log density over the sampler's coordinates. block_log_density, when set,
/// returns only the terms that change with the given block; it is consulted
/// for blocks marked local and lets their updates skip unrelated work. report maps a state to the recorded
/// parameters (identity when unset).
struct Target {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> log_density;
  std::function<double(std::size_t, std::span<const double>)> block_log_density;
  std::vector<std::string> names;
  std::function<void(std::span<const double>, std::span<double>)> report;
};

struct PosteriorSample {
  std::vector<std::string> names;
  std::vector<Matrix> chains;  // kept draws x recorded dims, one per chain
  std::vector<std::vector<double>> acceptance;  // chain x block
  std::vector<double> rhat;
  std::vector<double> ess;
  std::vector<std::vector<double>> scales_after_burn_in;  // chain x block
  std::vector<std::vector<double>> scales_final;

  std::size_t dim() const { return names.size(); }
  std::size_t draws_per_chain() const {
    return chains.empty() ? 0 : static_cast<std::size_t>(chains.front().rows());
  }
  std::size_t index_of(const std::string& name) const;
  /// All chains stacked (chain 1 first).
  Matrix pooled() const;
  Vector pooled_column(std::size_t dim) const;
  /// Largest finite-or-infinite rhat across recorded dims; NaN dims ignored.
  double max_rhat() const;
};

/// Adaptive blockwise random-walk Metropolis. Proposal scales (and, for
/// multi-dimensional blocks, proposal covariances learned from burn-in
/// draws) adapt during burn-in only and are frozen for the kept iterations.
PosteriorSample run_chains(const Target& target, const std::vector<std::vector<double>>& inits,
                           const std::vector<Block>& blocks, const McmcConfig& config);

/// Split-chain potential scale reduction. Throws ZeroVariance when every
/// chain is constant at the same value; returns +inf for constant chains at
/// different values.
double rhat(const std::vector<std::span<const double>>& chains);

/// Multi-chain effective sample size (initial positive sequence estimator).
double ess(const std::vector<std::span<const double>>& chains);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

ParamSummary summarize_draws(std::span<const double> draws, double level, std::string name = {});
std::vector<ParamSummary> summarize(const PosteriorSample& sample, double level = 0.95);

}  // namespace cnma
