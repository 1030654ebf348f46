#include "cnma/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "cnma/error.hpp"

namespace cnma {

namespace {

constexpr double kOptimalScale = 2.38;

struct BlockState {
  Matrix lower;          // proposal shape (Cholesky factor)
  double log_scale = 0.0;
  double initial_step = 0.1;
  bool learned = false;  // shape has been replaced by an empirical covariance
  double target = 0.234;
  std::size_t accepted_total = 0;
  std::size_t accepted_window = 0;
  std::size_t tries_total = 0;
};

struct ChainResult {
  Matrix draws;
  std::vector<double> acceptance;
  std::vector<double> scales_after_burn_in;
  std::vector<double> scales_final;
};

double evaluate(const Target& t, const Block& blk, std::size_t block, std::span<const double> x) {
  const double v = blk.local && t.block_log_density ? t.block_log_density(block, x) : t.log_density(x);
  if (std::isnan(v)) {
    throw Error(ErrorCode::NonFiniteDensity, "log density returned NaN");
  }
  return v;
}

std::vector<double> to_block_coords(const Block& b, std::span<const double> x) {
  std::vector<double> v(b.dims.size());
  for (std::size_t i = 0; i < b.dims.size(); ++i) {
    v[i] = b.scale == BlockScale::Log ? std::log(x[b.dims[i]]) : x[b.dims[i]];
  }
  return v;
}

// Re-learn the proposal shape from the second half of the burn-in trace.
void learn_shape(const Block& b, BlockState& s, const std::vector<std::vector<double>>& trace) {
  const std::size_t n = trace.size();
  const std::size_t start = n / 2;
  const std::size_t m = n - start;
  const auto k = static_cast<Eigen::Index>(b.dims.size());
  if (m < static_cast<std::size_t>(2 * k + 10)) return;
  Vector mean = Vector::Zero(k);
  for (std::size_t r = start; r < n; ++r) {
    for (Eigen::Index i = 0; i < k; ++i) mean(i) += trace[r][static_cast<std::size_t>(i)];
  }
  mean /= static_cast<double>(m);
  Matrix cov = Matrix::Zero(k, k);
  for (std::size_t r = start; r < n; ++r) {
    Vector dv(k);
    for (Eigen::Index i = 0; i < k; ++i) dv(i) = trace[r][static_cast<std::size_t>(i)] - mean(i);
    cov.noalias() += dv * dv.transpose();
  }
  cov /= static_cast<double>(m - 1);
  if (!cov.allFinite() || cov.diagonal().maxCoeff() <= 0.0) return;
  const double ridge = 1e-10 * std::max(1.0, cov.diagonal().maxCoeff());
  cov.diagonal().array() += ridge;
  try {
    s.lower = chol(cov * (kOptimalScale * kOptimalScale / static_cast<double>(k)));
  } catch (const Error&) {
    return;
  }
  if (!s.learned) s.log_scale = 0.0;
  s.learned = true;
}

ChainResult run_one_chain(const Target& target, std::vector<double> x,
                          const std::vector<Block>& blocks, const McmcConfig& cfg,
                          std::size_t chain_id) {
  RngStream rng(cfg.seed, chain_id);
  const std::size_t out_dim = target.names.size();
  std::vector<BlockState> states(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto k = static_cast<Eigen::Index>(blocks[b].dims.size());
    states[b].initial_step = blocks[b].initial_step;
    states[b].lower = Matrix::Identity(k, k) * blocks[b].initial_step;
    states[b].target = k > 1 ? cfg.target_accept_block : cfg.target_accept_scalar;
  }
  std::vector<std::vector<std::vector<double>>> burn_trace(blocks.size());

  double lp_full = target.log_density(x);
  {
    const double lp0 = lp_full;
    if (!std::isfinite(lp0)) {
      throw Error(ErrorCode::NonFiniteDensity,
                  "log density not finite at the initial state of chain " + std::to_string(chain_id));
    }
  }

  ChainResult out;
  out.draws.resize(static_cast<Eigen::Index>(cfg.keep), static_cast<Eigen::Index>(out_dim));
  std::vector<double> proposal(x.size());
  std::vector<double> reported(out_dim);
  const std::size_t total = cfg.burn_in + cfg.keep * cfg.thin;
  std::size_t kept = 0;

  for (std::size_t iter = 0; iter < total; ++iter) {
    const bool burning = iter < cfg.burn_in;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Block& blk = blocks[b];
      BlockState& st = states[b];
      const auto k = static_cast<Eigen::Index>(blk.dims.size());
      Vector z(k);
      for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
      const Vector step = std::exp(st.log_scale) * (st.lower * z);

      proposal = x;
      double log_hastings = 0.0;
      bool in_support = true;
      for (Eigen::Index i = 0; i < k; ++i) {
        const std::size_t d = blk.dims[static_cast<std::size_t>(i)];
        if (blk.scale == BlockScale::Log) {
          proposal[d] = x[d] * std::exp(step(i));
          log_hastings += step(i);
          if (!(proposal[d] > 0.0) || !std::isfinite(proposal[d])) in_support = false;
        } else {
          proposal[d] = x[d] + step(i);
        }
      }
      if (in_support && blk.transform) log_hastings += blk.transform(x, proposal);
      const bool local = blk.local && target.block_log_density;
      double log_ratio = -std::numeric_limits<double>::infinity();
      double lp_new = 0.0;
      double lp_old = lp_full;
      if (in_support) {
        lp_new = evaluate(target, blk, b, proposal);
        if (lp_new > -std::numeric_limits<double>::infinity()) {
          if (local) lp_old = evaluate(target, blk, b, x);
          log_ratio = lp_new - lp_old + log_hastings;
        }
      }
      const double accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
      ++st.tries_total;
      if (rng.uniform() < accept_prob) {
        if (blk.transform) {
          x = proposal;
        } else {
          for (std::size_t d : blk.dims) x[d] = proposal[d];
        }
        lp_full = local ? lp_full + (lp_new - lp_old) : lp_new;
        ++st.accepted_total;
        ++st.accepted_window;
      }
      if (burning) {
        const double gamma = 1.0 / std::pow(static_cast<double>(iter) + 1.0, 0.6);
        st.log_scale += gamma * (accept_prob - st.target);
        burn_trace[b].push_back(to_block_coords(blk, x));
      }
    }

    if ((iter + 1) % cfg.adapt_window == 0) {
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        BlockState& st = states[b];
        if (st.accepted_window == 0 && !blocks[b].transform) {
          const bool collapsed = !burning || std::exp(st.log_scale) < 1e-6;
          if (collapsed) {
            throw Error(ErrorCode::ScaleCollapse,
                        "block " + std::to_string(b) + " rejected every proposal for a window");
          }
        }
        st.accepted_window = 0;
        if (burning && iter + 1 >= 2 * cfg.adapt_window) {
          learn_shape(blocks[b], st, burn_trace[b]);
        }
      }
    }

    if (iter + 1 == cfg.burn_in) {
      for (const auto& st : states) out.scales_after_burn_in.push_back(std::exp(st.log_scale));
      for (auto& st : states) st.accepted_total = st.tries_total = 0;
      burn_trace.clear();
      burn_trace.resize(blocks.size());
    }

    if (!burning && (iter - cfg.burn_in + 1) % cfg.thin == 0) {
      if (target.report) {
        target.report(x, reported);
      } else {
        std::copy(x.begin(), x.end(), reported.begin());
      }
      for (std::size_t d = 0; d < out_dim; ++d) {
        out.draws(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(d)) = reported[d];
      }
      ++kept;
    }
  }
  for (const auto& st : states) {
    out.scales_final.push_back(std::exp(st.log_scale));
    out.acceptance.push_back(st.tries_total > 0 ? static_cast<double>(st.accepted_total) /
                                                      static_cast<double>(st.tries_total)
                                                : 0.0);
  }
  return out;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (static_cast<double>(v.size()) - 1.0);
}

}  // namespace

void McmcConfig::validate() const {
  if (n_chains < 1 || burn_in == 0 || keep == 0 || thin == 0 || adapt_window == 0) {
    throw Error(ErrorCode::InvalidArgument, "MCMC config: chains, burn_in, keep, thin, window must be positive");
  }
  if (!(target_accept_block > 0.0 && target_accept_block < 1.0) ||
      !(target_accept_scalar > 0.0 && target_accept_scalar < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "MCMC config: target acceptance must lie in (0, 1)");
  }
}

std::size_t PosteriorSample::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorCode::InvalidArgument, "no parameter named '" + name + "'");
  }
  return static_cast<std::size_t>(it - names.begin());
}

Matrix PosteriorSample::pooled() const {
  Eigen::Index rows = 0;
  for (const auto& c : chains) rows += c.rows();
  Matrix out(rows, static_cast<Eigen::Index>(dim()));
  Eigen::Index r = 0;
  for (const auto& c : chains) {
    out.middleRows(r, c.rows()) = c;
    r += c.rows();
  }
  return out;
}

Vector PosteriorSample::pooled_column(std::size_t d) const {
  Eigen::Index rows = 0;
  for (const auto& c : chains) rows += c.rows();
  Vector out(rows);
  Eigen::Index r = 0;
  for (const auto& c : chains) {
    out.segment(r, c.rows()) = c.col(static_cast<Eigen::Index>(d));
    r += c.rows();
  }
  return out;
}

double PosteriorSample::max_rhat() const {
  double m = 0.0;
  for (double r : rhat) {
    if (!std::isnan(r)) m = std::max(m, r);
  }
  return m;
}

PosteriorSample run_chains(const Target& target, const std::vector<std::vector<double>>& inits,
                           const std::vector<Block>& blocks, const McmcConfig& config) {
  config.validate();
  if (!target.log_density || target.dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "target has no log density");
  }
  if (inits.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no initial values");
  }
  for (const auto& init : inits) {
    if (init.size() != target.dim) {
      throw Error(ErrorCode::DimensionMismatch, "initial value has the wrong dimension");
    }
  }
  std::vector<bool> covered(target.dim, false);
  for (const auto& b : blocks) {
    if (b.dims.empty()) throw Error(ErrorCode::InvalidArgument, "empty block");
    for (std::size_t d : b.dims) {
      if (d >= target.dim) throw Error(ErrorCode::InvalidArgument, "block dimension out of range");
      if (b.transform) continue;
      if (covered[d]) {
        throw Error(ErrorCode::InvalidArgument, "blocks must partition the coordinates");
      }
      covered[d] = true;
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw Error(ErrorCode::InvalidArgument, "blocks must partition the coordinates");
  }

  Target t = target;
  if (t.names.empty()) {
    for (std::size_t d = 0; d < t.dim; ++d) t.names.push_back("x" + std::to_string(d + 1));
  }
  if (!t.report && t.names.size() != t.dim) {
    throw Error(ErrorCode::DimensionMismatch, "names do not match the target dimension");
  }

  std::vector<ChainResult> results(config.n_chains);
  auto init_for = [&](std::size_t c) { return inits[std::min(c, inits.size() - 1)]; };
  if (config.parallel_chains && config.n_chains > 1) {
    std::vector<std::exception_ptr> errors(config.n_chains);
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < config.n_chains; ++c) {
      threads.emplace_back([&, c] {
        try {
          results[c] = run_one_chain(t, init_for(c), blocks, config, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t c = 0; c < config.n_chains; ++c) {
      results[c] = run_one_chain(t, init_for(c), blocks, config, c);
    }
  }

  PosteriorSample sample;
  sample.names = t.names;
  for (auto& r : results) {
    sample.chains.push_back(std::move(r.draws));
    sample.acceptance.push_back(std::move(r.acceptance));
    sample.scales_after_burn_in.push_back(std::move(r.scales_after_burn_in));
    sample.scales_final.push_back(std::move(r.scales_final));
  }
  for (std::size_t d = 0; d < sample.dim(); ++d) {
    std::vector<Vector> cols;
    std::vector<std::span<const double>> spans;
    for (const auto& c : sample.chains) cols.push_back(c.col(static_cast<Eigen::Index>(d)));
    for (const auto& c : cols) spans.emplace_back(c.data(), static_cast<std::size_t>(c.size()));
    double r = std::numeric_limits<double>::quiet_NaN();
    double e = std::numeric_limits<double>::quiet_NaN();
    if (spans.size() >= 2 && sample.draws_per_chain() >= 4) {
      try {
        r = rhat(spans);
        e = ess(spans);
      } catch (const Error&) {
      }
    }
    sample.rhat.push_back(r);
    sample.ess.push_back(e);
  }
  return sample;
}

double rhat(const std::vector<std::span<const double>>& chains) {
  if (chains.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "rhat needs at least 2 chains");
  }
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 4) {
    throw Error(ErrorCode::InvalidArgument, "rhat needs at least 4 draws per chain");
  }
  const std::size_t half = n / 2;
  std::vector<std::span<const double>> split;
  for (const auto& c : chains) {
    split.push_back(c.subspan(n - 2 * half, half));
    split.push_back(c.subspan(n - half, half));
  }
  const double m = static_cast<double>(split.size());
  const double len = static_cast<double>(half);
  std::vector<double> means;
  double W = 0.0;
  for (const auto& s : split) {
    means.push_back(mean_of(s));
    W += var_of(s, means.back());
  }
  W /= m;
  const double grand = mean_of(means);
  double B = 0.0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= len / (m - 1.0);
  if (W <= 0.0) {
    if (B <= 0.0) {
      throw Error(ErrorCode::ZeroVariance, "rhat: every chain is constant");
    }
    return std::numeric_limits<double>::infinity();
  }
  const double var_plus = (len - 1.0) / len * W + B / len;
  return std::sqrt(var_plus / W);
}

double ess(const std::vector<std::span<const double>>& chains) {
  if (chains.empty()) {
    throw Error(ErrorCode::InvalidArgument, "ess needs at least one chain");
  }
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 4) {
    throw Error(ErrorCode::InvalidArgument, "ess needs at least 4 draws per chain");
  }
  const double m = static_cast<double>(chains.size());
  const double len = static_cast<double>(n);
  std::vector<double> means;
  double W = 0.0;
  for (const auto& c : chains) {
    const auto s = c.first(n);
    means.push_back(mean_of(s));
    W += var_of(s, means.back());
  }
  W /= m;
  const double grand = mean_of(means);
  double B = 0.0;
  if (chains.size() > 1) {
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= len / (m - 1.0);
  }
  const double var_plus = (len - 1.0) / len * W + B / len;
  if (!(var_plus > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "ess: zero variance");
  }
  auto autocov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
      const auto s = chains[c];
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) acc += (s[i] - means[c]) * (s[i + lag] - means[c]);
      total += acc / len;
    }
    return total / m;
  };
  auto rho = [&](std::size_t lag) { return 1.0 - (W - autocov(lag)) / var_plus; };

  // Geyer initial monotone positive sequence over lag pairs.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(m * len));
  return m * len / tau;
}

ParamSummary summarize_draws(std::span<const double> draws, double level, std::string name) {
  if (draws.empty()) {
    throw Error(ErrorCode::InvalidArgument, "summarize: no draws");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "summarize: level must lie in (0, 1)");
  }
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  ParamSummary s;
  s.name = std::move(name);
  s.mean = mean_of(draws);
  s.sd = draws.size() > 1 ? std::sqrt(var_of(draws, s.mean)) : 0.0;
  s.median = quantile(sorted, 0.5);
  s.lower = quantile(sorted, 0.5 - level / 2.0);
  s.upper = quantile(sorted, 0.5 + level / 2.0);
  return s;
}

std::vector<ParamSummary> summarize(const PosteriorSample& sample, double level) {
  std::vector<ParamSummary> out;
  for (std::size_t d = 0; d < sample.dim(); ++d) {
    const Vector col = sample.pooled_column(d);
    out.push_back(summarize_draws(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                  level, sample.names[d]));
  }
  return out;
}

}  // namespace cnma
