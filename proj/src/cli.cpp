#include "cnma/cli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "cnma/effects.hpp"
#include "cnma/error.hpp"
#include "cnma/freq.hpp"
#include "cnma/io.hpp"
#include "cnma/sim.hpp"
#include "cnma/svg.hpp"

namespace cnma {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// config

template <typename T>
void get_if(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

json config_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"data", c.data},
              {"out", c.out},
              {"model", c.model},
              {"anchor", c.anchor},
              {"comparator", c.comparator},
              {"effects", c.effects},
              {"zero_cell", c.zero_cell},
              {"direction", c.direction},
              {"separator", c.separator},
              {"level", c.level},
              {"seed", c.seed},
              {"dic", c.dic},
              {"priors", {{"d_var", c.prior_d_var},
                          {"alpha_var", c.prior_alpha_var},
                          {"sigma_upper", c.prior_sigma_upper}}},
              {"mcmc", {{"chains", c.chains},
                        {"burn_in", c.burn_in},
                        {"iterations", c.iterations},
                        {"thin", c.thin}}},
              {"simulate", {{"network", c.network},
                            {"data_anchor", c.data_anchor},
                            {"analysis_anchor", c.analysis_anchor},
                            {"n_per_arm", c.n_per_arm},
                            {"replicates", c.replicates},
                            {"workers", c.workers},
                            {"models", c.models},
                            {"records", c.records}}}};
}

// ---------------------------------------------------------------------------
// data and models

struct Loaded {
  ComponentDictionary components;
  std::optional<std::vector<Study>> studies;
  std::vector<ContrastBlock> blocks;
  Network network;
};

ZeroCellPolicy zero_cell_policy(const std::string& name) {
  if (name == "error") return ZeroCellPolicy::Error;
  if (name == "cc05") return ZeroCellPolicy::Continuity05;
  throw Error(ErrorCode::InvalidArgument, "--zero-cell must be error or cc05");
}

EffectsModel effects_model(const std::string& name) {
  if (name == "fixed") return EffectsModel::Fixed;
  if (name == "random") return EffectsModel::Random;
  throw Error(ErrorCode::InvalidArgument, "--effects must be fixed or random");
}

Direction direction_of(const std::string& name) {
  if (name == "higher") return Direction::HigherBetter;
  if (name == "lower") return Direction::LowerBetter;
  throw Error(ErrorCode::InvalidArgument, "--direction must be higher or lower");
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "--level must lie in (0, 1)");
  }
}

Loaded load_data(const RunConfig& c, bool need_contrasts) {
  if (c.data.empty()) throw Error(ErrorCode::InvalidArgument, "--data is required");
  const std::string text = read_text_file(c.data);
  Loaded d;
  if (detect_table_kind(text) == TableKind::Arm) {
    d.studies = parse_arm_table(text, d.components, c.separator);
    if (need_contrasts) d.blocks = arm_to_contrast(*d.studies, zero_cell_policy(c.zero_cell));
    d.network = build_network(*d.studies, d.components);
  } else {
    d.blocks = parse_contrast_table(text, d.components, c.separator);
    d.network = build_network(d.blocks, d.components);
  }
  require_connected(d.network);
  return d;
}

struct Outcome {
  SimModel model = SimModel::BayesArm;
  Loaded data;
  Treatment comparator;
  std::optional<Treatment> anchor;
  std::optional<BayesFit> bayes;
  std::optional<FreqFit> freq;
};

Outcome run_model(const RunConfig& c) {
  check_level(c.level);
  Outcome o;
  o.model = parse_sim_model(c.model);
  const bool contrast_model = o.model == SimModel::FreqContrast || o.model == SimModel::BayesContrast;
  o.data = load_data(c, contrast_model);
  if (!contrast_model && !o.data.studies) {
    throw Error(ErrorCode::InvalidArgument, "model " + c.model + " needs an arm-level table");
  }
  if (!c.anchor.empty()) o.anchor = lookup_treatment(c.anchor, o.data.components, c.separator);
  if (!c.comparator.empty()) {
    o.comparator = lookup_treatment(c.comparator, o.data.components, c.separator);
  } else if (o.anchor) {
    o.comparator = *o.anchor;
  } else {
    o.comparator = o.data.network.studies.front().treatments.front();
  }

  const EffectsModel effects = effects_model(c.effects);
  ModelSpec spec;
  spec.effects = effects;
  spec.priors = c.priors();
  switch (o.model) {
    case SimModel::FreqContrast:
      o.freq = gls_fit(o.data.blocks, o.data.network, effects);
      break;
    case SimModel::BayesContrast:
      spec.kind = ModelKind::UnanchoredContrast;
      o.bayes = fit(spec, o.data.blocks, o.data.network, c.mcmc());
      break;
    case SimModel::AnchoredArm:
      if (!o.anchor) throw Error(ErrorCode::UnknownAnchor, "anchored-arm needs --anchor");
      spec.kind = ModelKind::AnchoredArm;
      spec.anchor = o.anchor;
      o.bayes = fit(spec, *o.data.studies, o.data.network, c.mcmc(), c.dic);
      break;
    case SimModel::BayesArm:
      spec.kind = ModelKind::UnanchoredArm;
      o.bayes = fit(spec, *o.data.studies, o.data.network, c.mcmc(), c.dic);
      break;
  }
  return o;
}

EffectEstimate estimate(const Outcome& o, const Treatment& target, double level,
                        const std::optional<Matrix>& draws) {
  if (o.freq) return derive_relative_effect(o.freq->d_hat, o.freq->cov_d, o.comparator, target, level);
  return derive_relative_effect(*draws, o.comparator, target, level);
}

json estimate_json(const std::string& label, const EffectEstimate& e) {
  return json{{"target", label}, {"point", e.point}, {"se", e.se}, {"lower", e.lower}, {"upper", e.upper}};
}

std::string estimates_csv(const std::vector<std::pair<std::string, EffectEstimate>>& rows,
                          const std::string& comparator) {
  std::string out = "comparator,target,point,se,lower,upper\n";
  for (const auto& [label, e] : rows) {
    out += csv_field(comparator) + "," + csv_field(label) + "," + format_double(e.point) + "," +
           format_double(e.se) + "," + format_double(e.lower) + "," + format_double(e.upper) + "\n";
  }
  return out;
}

json diagnostics_json(const BayesFit& f) {
  double max_rhat = 0.0;
  double min_ess = std::numeric_limits<double>::infinity();
  auto take = [&](std::size_t d) {
    if (!std::isnan(f.sample.rhat[d])) max_rhat = std::max(max_rhat, f.sample.rhat[d]);
    if (!std::isnan(f.sample.ess[d])) min_ess = std::min(min_ess, f.sample.ess[d]);
  };
  for (std::size_t q = 0; q < f.effect_components.size(); ++q) take(q);
  if (f.sigma_dim) take(*f.sigma_dim);
  json acc = json::array();
  for (const auto& chain : f.sample.acceptance) acc.push_back(chain);
  json d{{"max_rhat", max_rhat},
         {"min_ess", std::isfinite(min_ess) ? json(min_ess) : json(nullptr)},
         {"overall_max_rhat", f.sample.max_rhat()},
         {"rhat_ok", max_rhat < kRhatThreshold},
         {"acceptance", acc},
         {"chains", f.sample.chains.size()},
         {"draws_per_chain", f.sample.draws_per_chain()}};
  if (!(max_rhat < kRhatThreshold)) {
    d["warning"] = "rhat >= 1.05 for an effect or sigma: chains may not have converged";
  }
  return d;
}

std::string treatment_label(const Treatment& t, const ComponentDictionary& dict, const RunConfig& c) {
  return t.label.empty() ? format_treatment(t, dict, c.separator) : t.label;
}

json base_report(const RunConfig& c, const Outcome& o) {
  return json{{"version", kVersion},
              {"model", c.model},
              {"effects", c.effects},
              {"anchor", o.anchor ? json(treatment_label(*o.anchor, o.data.components, c)) : json(nullptr)},
              {"comparator", treatment_label(o.comparator, o.data.components, c)},
              {"level", c.level},
              {"seed", c.seed},
              {"num_studies", o.data.network.num_studies()},
              {"num_components", o.data.network.num_components()},
              {"components", o.data.components.names()}};
}

std::filesystem::path out_path(const RunConfig& c, const char* name) {
  return std::filesystem::path(c.out) / name;
}

}  // namespace

// ---------------------------------------------------------------------------

McmcConfig RunConfig::mcmc() const {
  McmcConfig m;
  m.n_chains = chains;
  m.burn_in = burn_in;
  m.keep = iterations;
  m.thin = thin;
  m.seed = seed;
  m.validate();
  return m;
}

Priors RunConfig::priors() const {
  return Priors{prior_d_var, prior_alpha_var, prior_sigma_upper};
}

std::string config_to_json(const RunConfig& config) { return config_json(config).dump(2) + "\n"; }

RunConfig config_from_json(std::string_view text) {
  RunConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    get_if(j, "command", c.command);
    get_if(j, "data", c.data);
    get_if(j, "out", c.out);
    get_if(j, "model", c.model);
    get_if(j, "anchor", c.anchor);
    get_if(j, "comparator", c.comparator);
    get_if(j, "effects", c.effects);
    get_if(j, "zero_cell", c.zero_cell);
    get_if(j, "direction", c.direction);
    get_if(j, "separator", c.separator);
    get_if(j, "level", c.level);
    get_if(j, "seed", c.seed);
    get_if(j, "dic", c.dic);
    if (j.contains("priors")) {
      const auto& p = j.at("priors");
      get_if(p, "d_var", c.prior_d_var);
      get_if(p, "alpha_var", c.prior_alpha_var);
      get_if(p, "sigma_upper", c.prior_sigma_upper);
    }
    if (j.contains("mcmc")) {
      const auto& m = j.at("mcmc");
      get_if(m, "chains", c.chains);
      get_if(m, "burn_in", c.burn_in);
      get_if(m, "iterations", c.iterations);
      get_if(m, "thin", c.thin);
    }
    if (j.contains("simulate")) {
      const auto& s = j.at("simulate");
      get_if(s, "network", c.network);
      get_if(s, "data_anchor", c.data_anchor);
      get_if(s, "analysis_anchor", c.analysis_anchor);
      get_if(s, "n_per_arm", c.n_per_arm);
      get_if(s, "replicates", c.replicates);
      get_if(s, "workers", c.workers);
      get_if(s, "models", c.models);
      get_if(s, "records", c.records);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  write_file_atomic(path, config_to_json(config));
}

RunConfig load_config(const std::filesystem::path& path) { return config_from_json(read_text_file(path)); }

void cmd_convert(const RunConfig& c, std::ostream& log) {
  if (c.data.empty()) throw Error(ErrorCode::InvalidArgument, "--data is required");
  ComponentDictionary components;
  const auto studies = read_arm_table(c.data, components, c.separator);
  const auto blocks = arm_to_contrast(studies, zero_cell_policy(c.zero_cell));
  const auto path = out_path(c, "contrasts.csv");
  write_contrast_table(path, blocks, components, c.separator);
  log << "wrote " << blocks.size() << " contrast blocks to " << path.string() << "\n";
}

void cmd_fit(const RunConfig& c, std::ostream& log) {
  const Outcome o = run_model(c);
  std::optional<Matrix> draws;
  if (o.bayes) draws = o.bayes->component_draws();
  const auto& dict = o.data.components;
  const std::string comparator = treatment_label(o.comparator, dict, c);

  std::vector<std::pair<std::string, EffectEstimate>> component_rows;
  for (std::size_t k = 0; k < dict.size(); ++k) {
    const Treatment t = single_component(static_cast<int>(k), dict);
    if (t == o.comparator) continue;
    component_rows.emplace_back(dict.name(static_cast<int>(k)), estimate(o, t, c.level, draws));
  }
  std::vector<std::pair<std::string, EffectEstimate>> treatment_rows;
  for (const auto& t : o.data.network.treatments) {
    if (t == o.comparator) continue;
    treatment_rows.emplace_back(treatment_label(t, dict, c), estimate(o, t, c.level, draws));
  }

  json report = base_report(c, o);
  report["command"] = "fit";
  report["component_effects"] = json::array();
  for (const auto& [label, e] : component_rows) report["component_effects"].push_back(estimate_json(label, e));
  report["treatment_effects"] = json::array();
  for (const auto& [label, e] : treatment_rows) report["treatment_effects"].push_back(estimate_json(label, e));
  if (o.freq) {
    report["heterogeneity"] = {{"tau2", o.freq->tau2},
                               {"Q", o.freq->Q},
                               {"df", o.freq->df},
                               {"tau2_undefined", o.freq->tau2_undefined},
                               {"rank_X", o.freq->rank_X}};
  }
  if (o.bayes) {
    if (const auto s = o.bayes->sigma_summary(c.level)) {
      report["sigma"] = {{"mean", s->mean}, {"sd", s->sd}, {"median", s->median},
                         {"lower", s->lower}, {"upper", s->upper}};
    }
    report["diagnostics"] = diagnostics_json(*o.bayes);
    if (o.bayes->dic) {
      report["dic"] = {{"dic", o.bayes->dic->dic}, {"pD", o.bayes->dic->pD},
                       {"deviance_bar", o.bayes->dic->deviance_bar},
                       {"deviance_at_mean", o.bayes->dic->deviance_at_mean}};
    }
  }

  std::vector<ForestRow> forest;
  for (const auto& [label, e] : component_rows) forest.push_back(ForestRow{label, e.point, e.lower, e.upper});

  write_file_atomic(out_path(c, "results.json"), report.dump(2) + "\n");
  write_file_atomic(out_path(c, "components.csv"), estimates_csv(component_rows, comparator));
  write_file_atomic(out_path(c, "treatments.csv"), estimates_csv(treatment_rows, comparator));
  if (!forest.empty()) {
    write_file_atomic(out_path(c, "forest.svg"),
                      forest_svg(forest, "Component effects versus " + comparator, "log odds ratio"));
  }

  log << c.model << ": " << o.data.network.num_studies() << " studies, " << dict.size()
      << " components, comparator " << comparator << "\n";
  for (const auto& [label, e] : component_rows) {
    log << "  " << label << "  " << format_3dp(e.point) << " [" << format_3dp(e.lower) << ", "
        << format_3dp(e.upper) << "]\n";
  }
  if (report.contains("diagnostics") && report["diagnostics"].contains("warning")) {
    log << "warning: " << report["diagnostics"]["warning"].get<std::string>() << "\n";
  }
}

void cmd_rank(const RunConfig& c, std::ostream& log) {
  const Outcome o = run_model(c);
  const Direction dir = direction_of(c.direction);
  const auto& treatments = o.data.network.treatments;
  RankingReport ranking;
  if (o.freq) {
    ranking.treatments = treatments;
    ranking.scores = p_scores(*o.freq, treatments, dir);
    ranking.method = RankingMethod::PScore;
    ranking.direction = dir;
  } else {
    ranking = sucra(treatment_draws(o.bayes->component_draws(), treatments), treatments, dir);
  }
  const char* method = ranking.method == RankingMethod::PScore ? "p-score" : "sucra";

  std::vector<std::size_t> order(treatments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranking.scores[a] > ranking.scores[b]; });

  std::string csv = "treatment,score,method\n";
  json rows = json::array();
  for (const auto i : order) {
    const std::string label = treatment_label(treatments[i], o.data.components, c);
    csv += csv_field(label) + "," + format_double(ranking.scores[i]) + "," + method + "\n";
    rows.push_back({{"treatment", label}, {"score", ranking.scores[i]}});
  }
  json report = base_report(c, o);
  report["command"] = "rank";
  report["method"] = method;
  report["direction"] = c.direction;
  report["ranking"] = rows;
  if (o.bayes) report["diagnostics"] = diagnostics_json(*o.bayes);

  write_file_atomic(out_path(c, "rankings.csv"), csv);
  write_file_atomic(out_path(c, "ranking.json"), report.dump(2) + "\n");
  log << method << " ranking (" << c.model << "):\n";
  for (const auto i : order) {
    log << "  " << treatment_label(treatments[i], o.data.components, c) << "  "
        << format_3dp(ranking.scores[i]) << "\n";
  }
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  check_level(c.level);
  if (c.network != 1 && c.network != 2) {
    throw Error(ErrorCode::InvalidArgument, "--network must be 1 or 2");
  }
  const std::string reference = c.network == 1 ? "E" : "C";
  const ScenarioSpec spec =
      default_scenario(c.network, c.data_anchor.empty() ? reference : c.data_anchor,
                       c.analysis_anchor.empty() ? reference : c.analysis_anchor, c.n_per_arm,
                       c.replicates, c.seed);
  SimOptions options;
  options.models.clear();
  for (const auto& m : c.models) options.models.push_back(parse_sim_model(m));
  options.mcmc = c.mcmc();
  options.workers = c.workers;
  options.level = c.level;
  options.priors = c.priors();
  const SimResult res = run_study(spec, options);
  const auto& r = res.report;

  std::string params = "model,target,truth,bias,mse,coverage,mean_length,n\n";
  json jp = json::array();
  for (const auto& p : r.params) {
    params += to_string(p.model) + "," + csv_field(p.target.label) + "," + format_double(p.truth) + "," +
              format_double(p.bias) + "," + format_double(p.mse) + "," + format_double(p.coverage) + "," +
              format_double(p.mean_length) + "," + std::to_string(p.n) + "\n";
    jp.push_back({{"model", to_string(p.model)}, {"target", p.target.label}, {"truth", p.truth},
                  {"bias", p.bias}, {"mse", p.mse}, {"coverage", p.coverage},
                  {"mean_length", p.mean_length}, {"n", p.n}});
  }
  std::string rankings = "model,treatment,mean_score\n";
  json jr = json::array();
  for (const auto& k : r.rankings) {
    rankings += to_string(k.model) + "," + csv_field(k.treatment.label) + "," + format_double(k.mean_score) + "\n";
    jr.push_back({{"model", to_string(k.model)}, {"treatment", k.treatment.label}, {"mean_score", k.mean_score}});
  }
  json jh = json::array();
  for (const auto& h : r.health) {
    jh.push_back({{"model", to_string(h.model)}, {"attempted", h.attempted}, {"failed", h.failed},
                  {"healthy", h.healthy}, {"mean_sigma", h.mean_sigma}});
  }
  json report{{"version", kVersion},
              {"command", "simulate"},
              {"network", c.network},
              {"reference", spec.reference.label},
              {"data_anchor", spec.data_anchor.label},
              {"analysis_anchor", spec.analysis_anchor.label},
              {"n_per_arm", spec.n_per_arm},
              {"replicates", r.replicates},
              {"seed", spec.seed},
              {"level", c.level},
              {"params", jp},
              {"rankings", jr},
              {"health", jh},
              {"failures", r.failures}};
  if (r.delta_dic) {
    report["delta_dic_bins"] = {{"below_-2", r.delta_dic->below},
                                {"within_2", r.delta_dic->within},
                                {"above_2", r.delta_dic->above}};
  }
  write_file_atomic(out_path(c, "sim_report.json"), report.dump(2) + "\n");
  write_file_atomic(out_path(c, "sim_params.csv"), params);
  write_file_atomic(out_path(c, "sim_rankings.csv"), rankings);

  if (c.records) {
    std::string rec = "replicate,model,failed,target,point,lower,upper,sigma,max_rhat,dic,delta_dic\n";
    const auto targets = res.truth.target_indices();
    for (const auto& rr : res.records) {
      const std::string delta = rr.delta_dic ? format_double(*rr.delta_dic) : "";
      for (const auto& m : rr.models) {
        const std::string dic = m.dic ? format_double(*m.dic) : "";
        if (m.failed) {
          rec += std::to_string(rr.replicate) + "," + to_string(m.model) + ",1,,,,,,,," + delta + "\n";
          continue;
        }
        for (std::size_t t = 0; t < targets.size(); ++t) {
          rec += std::to_string(rr.replicate) + "," + to_string(m.model) + ",0," +
                 csv_field(res.truth.treatments[targets[t]].label) + "," + format_double(m.point[t]) + "," +
                 format_double(m.lower[t]) + "," + format_double(m.upper[t]) + "," +
                 format_double(m.sigma) + "," + format_double(m.max_rhat) + "," + dic + "," + delta + "\n";
        }
      }
    }
    write_file_atomic(out_path(c, "sim_records.csv"), rec);
  }

  log << "simulated " << r.replicates << " replicates of network " << c.network << " (data anchor "
      << spec.data_anchor.label << ", analysis anchor " << spec.analysis_anchor.label << ")\n";
  for (const auto& h : r.health) {
    log << "  " << to_string(h.model) << ": " << h.attempted - h.failed << " fits, " << h.failed
        << " failed, " << h.healthy << " with rhat < 1.05\n";
  }
  if (r.delta_dic) {
    log << "  delta DIC bins (<-2, [-2,2], >2): " << r.delta_dic->below << ", " << r.delta_dic->within
        << ", " << r.delta_dic->above << "\n";
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Component network meta-analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  RunConfig flags;
  std::string config_file;
  std::string save_file;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
  auto bind = [&](CLI::App* sub, const std::string& name, auto member, const std::string& help) {
    auto* opt = sub->add_option(name, flags.*member, help);
    overrides.emplace_back(opt, [member, &flags](RunConfig& c) { c.*member = flags.*member; });
    return opt;
  };
  auto bind_flag = [&](CLI::App* sub, const std::string& name, bool RunConfig::*member,
                       const std::string& help) {
    auto* opt = sub->add_flag(name, flags.*member, help);
    overrides.emplace_back(opt, [member, &flags](RunConfig& c) { c.*member = flags.*member; });
  };

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON run configuration; flags override it");
    sub->add_option("--save-config", save_file, "write the effective configuration here");
    bind(sub, "--out", &RunConfig::out, "output directory");
    bind(sub, "--seed", &RunConfig::seed, "random seed");
    bind(sub, "--level", &RunConfig::level, "interval level");
    bind(sub, "--separator", &RunConfig::separator, "component separator in treatment labels");
  };
  auto model_opts = [&](CLI::App* sub) {
    bind(sub, "--data", &RunConfig::data, "arm or contrast table (CSV)");
    bind(sub, "--model", &RunConfig::model, "anchored-arm|freq-contrast|bayes-contrast|bayes-arm")
        ->check(CLI::IsMember({"anchored-arm", "freq-contrast", "bayes-contrast", "bayes-arm"}));
    bind(sub, "--anchor", &RunConfig::anchor, "anchor treatment (single component)");
    bind(sub, "--comparator", &RunConfig::comparator, "treatment the effects are reported against");
    bind(sub, "--effects", &RunConfig::effects, "fixed|random")->check(CLI::IsMember({"fixed", "random"}));
    bind(sub, "--zero-cell", &RunConfig::zero_cell, "error|cc05")->check(CLI::IsMember({"error", "cc05"}));
    bind(sub, "--chains", &RunConfig::chains, "MCMC chains");
    bind(sub, "--burn-in", &RunConfig::burn_in, "MCMC burn-in iterations");
    bind(sub, "--iterations", &RunConfig::iterations, "MCMC kept iterations per chain");
    bind(sub, "--thin", &RunConfig::thin, "MCMC thinning");
    bind(sub, "--prior-sigma-upper", &RunConfig::prior_sigma_upper, "upper bound of the sigma prior");
  };

  auto* convert = app.add_subcommand("convert", "arm table to contrast table");
  common(convert);
  bind(convert, "--data", &RunConfig::data, "arm table (CSV)");
  bind(convert, "--zero-cell", &RunConfig::zero_cell, "error|cc05")->check(CLI::IsMember({"error", "cc05"}));

  auto* fit_cmd = app.add_subcommand("fit", "fit a model and report component effects");
  common(fit_cmd);
  model_opts(fit_cmd);
  bind_flag(fit_cmd, "--dic", &RunConfig::dic, "compute DIC (arm-level models)");

  auto* rank = app.add_subcommand("rank", "rank treatments by SUCRA or P-score");
  common(rank);
  model_opts(rank);
  bind(rank, "--direction", &RunConfig::direction, "higher|lower")->check(CLI::IsMember({"higher", "lower"}));

  auto* simulate = app.add_subcommand("simulate", "run the simulation study");
  common(simulate);
  bind(simulate, "--network", &RunConfig::network, "1 or 2");
  bind(simulate, "--data-anchor", &RunConfig::data_anchor, "anchor that generates the data");
  bind(simulate, "--analysis-anchor", &RunConfig::analysis_anchor, "anchor assumed by the anchored model");
  bind(simulate, "--n-per-arm", &RunConfig::n_per_arm, "patients per arm");
  bind(simulate, "--replicates", &RunConfig::replicates, "number of datasets");
  bind(simulate, "--workers", &RunConfig::workers, "worker threads");
  bind(simulate, "--models", &RunConfig::models, "subset of the four models");
  bind(simulate, "--chains", &RunConfig::chains, "MCMC chains");
  bind(simulate, "--burn-in", &RunConfig::burn_in, "MCMC burn-in iterations");
  bind(simulate, "--iterations", &RunConfig::iterations, "MCMC kept iterations per chain");
  bind_flag(simulate, "--records", &RunConfig::records, "also write per-replicate records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
    for (auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(cfg);
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    if (!save_file.empty()) save_config(save_file, cfg);
    if (cfg.command == "convert") {
      cmd_convert(cfg, out);
    } else if (cfg.command == "fit") {
      cmd_fit(cfg, out);
    } else if (cfg.command == "rank") {
      cmd_rank(cfg, out);
    } else {
      cmd_simulate(cfg, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cnma
