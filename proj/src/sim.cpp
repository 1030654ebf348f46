#include "cnma/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "cnma/design.hpp"
#include "cnma/error.hpp"
#include "cnma/freq.hpp"

namespace cnma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_single(const Treatment& t, const ComponentDictionary& dict, const char* role) {
  if (t.size() != 1) {
    throw Error(ErrorCode::MulticomponentAnchor,
                std::string(role) + " '" + t.label + "' is not a single component");
  }
  if (t.components.front() < 0 || static_cast<std::size_t>(t.components.front()) >= dict.size()) {
    throw Error(ErrorCode::UnknownAnchor, std::string(role) + " '" + t.label + "' is not in the network");
  }
}

struct EdgeSpec {
  const char* first;
  const char* second;
};

ScenarioSpec make_default(int network_id, const std::vector<EdgeSpec>& edges, const char* reference,
                          std::vector<double> effects, double alpha, double sigma) {
  ScenarioSpec spec;
  spec.network_id = network_id;
  spec.components = ComponentDictionary({"A", "B", "C", "D", "E"});
  for (const auto& e : edges) {
    spec.topology.push_back(TopologyEdge{lookup_treatment(e.first, spec.components),
                                         lookup_treatment(e.second, spec.components), 2});
  }
  spec.reference = lookup_treatment(reference, spec.components);
  spec.reference_effects = std::move(effects);
  spec.alpha = alpha;
  spec.sigma = sigma;
  return spec;
}

std::uint64_t mcmc_seed(std::uint64_t seed, std::size_t replicate, SimModel model) {
  RngStream rng(seed, 0x100000000ull + 8 * static_cast<std::uint64_t>(replicate) +
                          static_cast<std::uint64_t>(model));
  return rng();
}

double max_rhat_of(const BayesFit& fit) {
  double worst = 0.0;
  auto take = [&](std::size_t d) {
    const double r = fit.sample.rhat.at(d);
    if (!std::isnan(r)) worst = std::max(worst, r);
  };
  for (std::size_t q = 0; q < fit.effect_components.size(); ++q) take(q);
  if (fit.sigma_dim) take(*fit.sigma_dim);
  return worst;
}

void record_bayes(ModelRecord& rec, const BayesFit& fit, const Truth& truth, double level) {
  const Matrix draws = fit.component_draws();
  for (const auto j : truth.target_indices()) {
    const auto e = derive_relative_effect(draws, truth.reference, truth.treatments[j], level);
    rec.point.push_back(e.point);
    rec.lower.push_back(e.lower);
    rec.upper.push_back(e.upper);
  }
  rec.ranking = sucra(treatment_draws(draws, truth.treatments), truth.treatments).scores;
  if (const auto s = fit.sigma_summary(level)) rec.sigma = s->mean;
  rec.max_rhat = max_rhat_of(fit);
  if (fit.dic) rec.dic = fit.dic->dic;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (network_id < 1) {
    throw Error(ErrorCode::InvalidArgument, "network id must be positive");
  }
  if (topology.empty()) {
    throw Error(ErrorCode::EmptyNetwork, "scenario topology is empty");
  }
  if (reference_effects.size() != components.size()) {
    throw Error(ErrorCode::MissingTruth, "single-component effects must cover every component");
  }
  require_single(reference, components, "reference");
  require_single(data_anchor, components, "data anchor");
  require_single(analysis_anchor, components, "analysis anchor");
  if (reference_effects[static_cast<std::size_t>(reference.components.front())] != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "the reference's own effect must be 0");
  }
  for (const double d : reference_effects) {
    if (!std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "non-finite effect");
  }
  if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "non-finite alpha");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be finite and >= 0");
  }
  if (n_per_arm < 1) throw Error(ErrorCode::InvalidArgument, "n_per_arm must be >= 1");
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
  for (const auto& e : topology) {
    if (e.trials < 1) throw Error(ErrorCode::InvalidArgument, "an edge needs at least one trial");
    if (e.first == e.second) {
      throw Error(ErrorCode::DuplicateTreatment, "edge compares '" + e.first.label + "' with itself");
    }
    for (const auto* t : {&e.first, &e.second}) {
      if (t->components.empty()) throw Error(ErrorCode::EmptyToken, "edge treatment without components");
      for (const int c : t->components) {
        if (c < 0 || static_cast<std::size_t>(c) >= components.size()) {
          throw Error(ErrorCode::UnknownComponent, "treatment '" + t->label + "' uses an unknown component");
        }
      }
    }
  }
  const auto ts = treatments();
  if (std::find(ts.begin(), ts.end(), reference) == ts.end()) {
    throw Error(ErrorCode::UnknownAnchor, "reference '" + reference.label + "' is not in the topology");
  }
}

std::vector<Treatment> ScenarioSpec::treatments() const {
  std::vector<Treatment> out;
  for (const auto& e : topology) {
    for (const auto* t : {&e.first, &e.second}) {
      if (std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(*t);
    }
  }
  return out;
}

ScenarioSpec default_scenario(int network_id, std::string_view data_anchor,
                              std::string_view analysis_anchor, long n_per_arm,
                              std::size_t replicates, std::uint64_t seed) {
  ScenarioSpec spec;
  if (network_id == 1) {
    spec = make_default(1,
                        {{"E", "A"}, {"E", "B"}, {"E", "C"}, {"E", "D"}, {"B", "C"},
                         {"A", "A+C"}, {"E", "A+C"}, {"A", "A+D"}, {"E", "A+C+D"}, {"D", "A+D"}},
                        "E", {1.2, 0.9, 0.8, 0.7, 0.0}, -0.85, 0.1);
  } else if (network_id == 2) {
    spec = make_default(2,
                        {{"C", "A"}, {"C", "B"}, {"C", "D"}, {"C", "E"}, {"D", "E"},
                         {"A", "A+B"}, {"C", "A+B"}, {"B", "B+D"}, {"C", "A+B+D"}, {"D", "B+D"}},
                        "C", {0.70, 0.35, 0.0, -0.20, -0.50}, -0.60, 0.40);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown network id " + std::to_string(network_id));
  }
  spec.data_anchor = lookup_treatment(data_anchor, spec.components);
  spec.analysis_anchor = lookup_treatment(analysis_anchor, spec.components);
  spec.n_per_arm = n_per_arm;
  spec.replicates = replicates;
  spec.seed = seed;
  spec.validate();
  return spec;
}

std::vector<std::size_t> Truth::target_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < treatments.size(); ++j) {
    if (!(treatments[j] == reference)) out.push_back(j);
  }
  return out;
}

AnchorTruth anchor_truth(const ScenarioSpec& spec, const Treatment& anchor) {
  require_single(anchor, spec.components, "anchor");
  if (spec.reference_effects.size() != spec.components.size()) {
    throw Error(ErrorCode::MissingTruth, "single-component effects must cover every component");
  }
  const auto k = static_cast<std::size_t>(anchor.components.front());
  const double d_ref_anchor = spec.reference_effects[k];
  AnchorTruth t;
  t.anchor = anchor;
  t.alpha = spec.alpha + d_ref_anchor;
  for (const double d : spec.reference_effects) t.component.push_back(d - d_ref_anchor);
  for (const auto& treatment : spec.treatments()) {
    t.vs_reference.push_back(additive_effect(t.component, treatment) + d_ref_anchor);
  }
  return t;
}

Truth derive_scenario_parameters(const ScenarioSpec& spec) {
  spec.validate();
  Truth truth;
  truth.reference = spec.reference;
  truth.treatments = spec.treatments();
  truth.data = anchor_truth(spec, spec.data_anchor);
  truth.analysis = anchor_truth(spec, spec.analysis_anchor);
  return truth;
}

std::vector<Study> generate_dataset(const ScenarioSpec& spec, const Truth& truth, RngStream& rng) {
  const auto& gen = truth.data;
  if (gen.component.size() != spec.components.size()) {
    throw Error(ErrorCode::MissingTruth, "truth does not cover every component");
  }
  std::vector<Study> studies;
  std::size_t trial = 0;
  for (const auto& edge : spec.topology) {
    for (std::size_t r = 0; r < edge.trials; ++r) {
      ++trial;
      std::vector<Treatment> arms{edge.first, edge.second};
      if (arms[1] == gen.anchor) std::swap(arms[0], arms[1]);
      const bool anchor_first = arms[0] == gen.anchor;
      const std::size_t a = arms.size();

      Vector eps = Vector::Zero(static_cast<Eigen::Index>(a));
      if (spec.sigma > 0.0) {
        const std::size_t k = anchor_first ? a - 1 : a;
        const Matrix L = anchor_first ? chol(build_Sigma_star(a)) : chol(build_Sigma(a, false));
        Vector z(static_cast<Eigen::Index>(k));
        for (Eigen::Index q = 0; q < z.size(); ++q) z(q) = rng.normal();
        eps.tail(static_cast<Eigen::Index>(k)) = spec.sigma * (L * z);
      }

      Study study;
      char id[32];
      std::snprintf(id, sizeof id, "t%03zu", trial);
      study.id = id;
      for (std::size_t j = 0; j < a; ++j) {
        const double eta = gen.alpha + additive_effect(gen.component, arms[j]) +
                           eps(static_cast<Eigen::Index>(j));
        const long events = rng.binomial(spec.n_per_arm, inv_logit(eta));
        study.arms.push_back(ArmRecord{arms[j], events, spec.n_per_arm});
      }
      studies.push_back(std::move(study));
    }
  }
  return studies;
}

std::string to_string(SimModel model) {
  switch (model) {
    case SimModel::AnchoredArm: return "anchored-arm";
    case SimModel::FreqContrast: return "freq-contrast";
    case SimModel::BayesContrast: return "bayes-contrast";
    case SimModel::BayesArm: return "bayes-arm";
  }
  return "unknown";
}

SimModel parse_sim_model(std::string_view name) {
  for (const auto m : all_sim_models()) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

const ParamMetrics& SimReport::param(SimModel model, const Treatment& target) const {
  for (const auto& p : params) {
    if (p.model == model && p.target == target) return p;
  }
  throw Error(ErrorCode::MissingTruth, "no metrics for " + to_string(model) + " / " + target.label);
}

double SimReport::mean_score(SimModel model, const Treatment& treatment) const {
  for (const auto& r : rankings) {
    if (r.model == model && r.treatment == treatment) return r.mean_score;
  }
  throw Error(ErrorCode::MissingTruth, "no ranking for " + to_string(model) + " / " + treatment.label);
}

const ModelHealth& SimReport::model_health(SimModel model) const {
  for (const auto& h : health) {
    if (h.model == model) return h;
  }
  throw Error(ErrorCode::MissingTruth, "no health record for " + to_string(model));
}

DicBins bin_delta_dic(const std::vector<double>& deltas) {
  DicBins bins;
  for (const double d : deltas) {
    if (d < -2.0) {
      ++bins.below;
    } else if (d > 2.0) {
      ++bins.above;
    } else {
      ++bins.within;
    }
  }
  return bins;
}

SimReport compute_metrics(const std::vector<ReplicateRecord>& records, const Truth& truth) {
  if (records.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no replicate records");
  }
  const auto targets = truth.target_indices();
  if (truth.data.vs_reference.size() != truth.treatments.size()) {
    throw Error(ErrorCode::MissingTruth, "truth does not cover every treatment");
  }
  SimReport report;
  report.replicates = records.size();

  std::vector<double> deltas;
  for (const auto& rec : records) {
    if (rec.delta_dic) deltas.push_back(*rec.delta_dic);
  }
  if (!deltas.empty()) report.delta_dic = bin_delta_dic(deltas);

  for (const auto model : all_sim_models()) {
    std::vector<const ModelRecord*> ok;
    ModelHealth health;
    health.model = model;
    for (const auto& rec : records) {
      for (const auto& m : rec.models) {
        if (m.model != model) continue;
        ++health.attempted;
        if (m.failed) {
          ++health.failed;
          report.failures.push_back("replicate " + std::to_string(rec.replicate) + ", " +
                                    to_string(model) + ": " + m.error);
          continue;
        }
        if (m.point.size() != targets.size() || m.lower.size() != targets.size() ||
            m.upper.size() != targets.size() || m.ranking.size() != truth.treatments.size()) {
          throw Error(ErrorCode::MissingTruth, "record does not match the truth targets");
        }
        ok.push_back(&m);
        if (m.max_rhat < kRhatThreshold) ++health.healthy;
        health.mean_sigma += m.sigma;
      }
    }
    if (health.attempted == 0) continue;
    const double n = static_cast<double>(ok.size());
    health.mean_sigma = ok.empty() ? kNaN : health.mean_sigma / n;
    report.health.push_back(health);

    for (std::size_t t = 0; t < targets.size(); ++t) {
      ParamMetrics p;
      p.model = model;
      p.target = truth.treatments[targets[t]];
      p.truth = truth.data.vs_reference[targets[t]];
      p.n = ok.size();
      if (ok.empty()) {
        p.bias = p.mse = p.coverage = p.mean_length = kNaN;
      } else {
        for (const auto* m : ok) {
          const double err = m->point[t] - p.truth;
          p.bias += err;
          p.mse += err * err;
          p.coverage += (m->lower[t] <= p.truth && p.truth <= m->upper[t]) ? 1.0 : 0.0;
          p.mean_length += m->upper[t] - m->lower[t];
        }
        p.bias /= n;
        p.mse /= n;
        p.coverage /= n;
        p.mean_length /= n;
      }
      report.params.push_back(p);
    }
    for (std::size_t j = 0; j < truth.treatments.size(); ++j) {
      RankMetrics r;
      r.model = model;
      r.treatment = truth.treatments[j];
      if (ok.empty()) {
        r.mean_score = kNaN;
      } else {
        for (const auto* m : ok) r.mean_score += m->ranking[j];
        r.mean_score /= n;
      }
      report.rankings.push_back(r);
    }
  }
  return report;
}

ReplicateRecord run_replicate(const ScenarioSpec& spec, const Truth& truth, std::size_t replicate,
                              const SimOptions& options) {
  RngStream rng(spec.seed, replicate);
  const auto studies = generate_dataset(spec, truth, rng);
  const Network network = build_network(studies, spec.components);
  const auto blocks = arm_to_contrast(studies, ZeroCellPolicy::Continuity05);
  const bool both_arm = std::count(options.models.begin(), options.models.end(), SimModel::AnchoredArm) &&
                        std::count(options.models.begin(), options.models.end(), SimModel::BayesArm);

  ReplicateRecord out;
  out.replicate = replicate;
  for (const auto model : options.models) {
    ModelRecord rec;
    rec.model = model;
    try {
      McmcConfig cfg = options.mcmc;
      cfg.seed = mcmc_seed(spec.seed, replicate, model);
      ModelSpec ms;
      ms.effects = EffectsModel::Random;
      ms.priors = options.priors;
      switch (model) {
        case SimModel::FreqContrast: {
          const FreqFit f = gls_fit(blocks, network, EffectsModel::Random);
          for (const auto j : truth.target_indices()) {
            const auto e = derive_relative_effect(f.d_hat, f.cov_d, truth.reference,
                                                  truth.treatments[j], options.level);
            rec.point.push_back(e.point);
            rec.lower.push_back(e.lower);
            rec.upper.push_back(e.upper);
          }
          rec.ranking = p_scores(f, truth.treatments);
          rec.sigma = std::sqrt(f.tau2);
          break;
        }
        case SimModel::BayesContrast:
          ms.kind = ModelKind::UnanchoredContrast;
          record_bayes(rec, fit(ms, blocks, network, cfg), truth, options.level);
          break;
        case SimModel::AnchoredArm:
          ms.kind = ModelKind::AnchoredArm;
          ms.anchor = spec.analysis_anchor;
          record_bayes(rec, fit(ms, studies, network, cfg, both_arm), truth, options.level);
          break;
        case SimModel::BayesArm:
          ms.kind = ModelKind::UnanchoredArm;
          record_bayes(rec, fit(ms, studies, network, cfg, both_arm), truth, options.level);
          break;
      }
    } catch (const Error& e) {
      rec = ModelRecord{};
      rec.model = model;
      rec.failed = true;
      rec.error = e.what();
    }
    out.models.push_back(std::move(rec));
  }

  const ModelRecord* anchored = nullptr;
  const ModelRecord* unanchored = nullptr;
  for (const auto& m : out.models) {
    if (m.failed || !m.dic) continue;
    if (m.model == SimModel::AnchoredArm) anchored = &m;
    if (m.model == SimModel::BayesArm) unanchored = &m;
  }
  if (anchored && unanchored) out.delta_dic = *unanchored->dic - *anchored->dic;
  return out;
}

SimResult run_study(const ScenarioSpec& spec, const SimOptions& options) {
  spec.validate();
  options.mcmc.validate();
  if (options.models.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no models selected");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "interval level must lie in (0, 1)");
  }
  SimResult result;
  result.truth = derive_scenario_parameters(spec);
  result.records.resize(spec.replicates);

  SimOptions opts = options;
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, spec.replicates);
  if (workers > 1) opts.mcmc.parallel_chains = false;

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t r = next.fetch_add(1);
      if (r >= spec.replicates) return;
      try {
        result.records[r] = run_replicate(spec, result.truth, r, opts);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(spec.replicates);
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  result.report = compute_metrics(result.records, result.truth);
  return result;
}

}  // namespace cnma
