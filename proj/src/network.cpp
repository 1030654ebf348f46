#include "cnma/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cnma/error.hpp"

namespace cnma {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_tokens(std::string_view label, std::string_view separator) {
  if (separator.empty()) {
    throw Error(ErrorCode::InvalidArgument, "component separator is empty");
  }
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  while (true) {
    const auto pos = label.find(separator, start);
    const auto token = trim(label.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (token.empty()) {
      throw Error(ErrorCode::EmptyToken, "empty component in treatment '" + std::string(label) + "'");
    }
    tokens.push_back(token);
    if (pos == std::string_view::npos) break;
    start = pos + separator.size();
  }
  return tokens;
}

template <typename Resolve>
Treatment make_treatment(std::string_view label, std::string_view separator, Resolve resolve) {
  const auto trimmed = trim(label);
  if (trimmed.empty()) {
    throw Error(ErrorCode::EmptyToken, "empty treatment label");
  }
  Treatment t;
  t.label = std::string(trimmed);
  for (const auto token : split_tokens(trimmed, separator)) {
    const int index = resolve(token);
    if (std::find(t.components.begin(), t.components.end(), index) != t.components.end()) {
      throw Error(ErrorCode::DuplicateComponent,
                  "component '" + std::string(token) + "' repeated in '" + t.label + "'");
    }
    t.components.push_back(index);
  }
  std::sort(t.components.begin(), t.components.end());
  return t;
}

// Union-find over treatment indices.
struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

ComponentDictionary::ComponentDictionary(const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (find(n)) {
      throw Error(ErrorCode::DuplicateComponent, "component '" + n + "' listed twice");
    }
    intern(n);
  }
}

int ComponentDictionary::intern(std::string_view name) {
  if (auto existing = find(name)) return *existing;
  const int index = static_cast<int>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), index);
  return index;
}

std::optional<int> ComponentDictionary::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int ComponentDictionary::index_of(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw Error(ErrorCode::UnknownComponent, "unknown component '" + std::string(name) + "'");
}

bool Treatment::contains(int component) const {
  return std::binary_search(components.begin(), components.end(), component);
}

Treatment parse_treatment(std::string_view label, ComponentDictionary& dict,
                          std::string_view separator) {
  return make_treatment(label, separator, [&](std::string_view token) { return dict.intern(token); });
}

Treatment lookup_treatment(std::string_view label, const ComponentDictionary& dict,
                           std::string_view separator) {
  return make_treatment(label, separator,
                        [&](std::string_view token) { return dict.index_of(token); });
}

std::string format_treatment(const Treatment& treatment, const ComponentDictionary& dict,
                             std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < treatment.components.size(); ++i) {
    if (i > 0) out += separator;
    out += dict.name(treatment.components[i]);
  }
  return out;
}

Treatment single_component(int component, const ComponentDictionary& dict) {
  return Treatment{dict.name(component), {component}};
}

void validate_study(const Study& study) {
  if (study.arms.size() < 2) {
    throw Error(ErrorCode::TooFewArms, "study '" + study.id + "' has fewer than 2 arms");
  }
  for (std::size_t j = 0; j < study.arms.size(); ++j) {
    const auto& arm = study.arms[j];
    if (arm.treatment.components.empty()) {
      throw Error(ErrorCode::EmptyToken, "study '" + study.id + "' has an arm without components");
    }
    if (arm.total < 1 || arm.events < 0) {
      throw Error(ErrorCode::MalformedInput, "study '" + study.id + "' has invalid counts");
    }
    if (arm.events > arm.total) {
      throw Error(ErrorCode::EventsExceedTotal,
                  "study '" + study.id + "' arm " + std::to_string(j + 1) + " events > total");
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (study.arms[k].treatment == arm.treatment) {
        throw Error(ErrorCode::DuplicateTreatment,
                    "study '" + study.id + "' repeats treatment '" + arm.treatment.label + "'");
      }
    }
  }
}

std::optional<std::size_t> Network::treatment_index(const Treatment& treatment) const {
  const auto it = std::find(treatments.begin(), treatments.end(), treatment);
  if (it == treatments.end()) return std::nullopt;
  return static_cast<std::size_t>(it - treatments.begin());
}

Network build_network(std::vector<StudyLayout> layouts, ComponentDictionary components) {
  if (layouts.empty()) {
    throw Error(ErrorCode::EmptyNetwork, "network has no studies");
  }
  Network net;
  net.components = std::move(components);
  std::set<std::string> ids;
  for (const auto& layout : layouts) {
    if (!ids.insert(layout.id).second) {
      throw Error(ErrorCode::DuplicateStudy, "duplicate study id '" + layout.id + "'");
    }
    if (layout.treatments.size() < 2) {
      throw Error(ErrorCode::TooFewArms, "study '" + layout.id + "' has fewer than 2 arms");
    }
    for (std::size_t j = 0; j < layout.treatments.size(); ++j) {
      const auto& t = layout.treatments[j];
      if (t.components.empty()) {
        throw Error(ErrorCode::EmptyToken, "study '" + layout.id + "' has an empty treatment");
      }
      for (int c : t.components) {
        if (c < 0 || static_cast<std::size_t>(c) >= net.components.size()) {
          throw Error(ErrorCode::UnknownComponent,
                      "study '" + layout.id + "' references component index " + std::to_string(c));
        }
      }
      for (std::size_t k = 0; k < j; ++k) {
        if (layout.treatments[k] == t) {
          throw Error(ErrorCode::DuplicateTreatment,
                      "study '" + layout.id + "' repeats treatment '" + t.label + "'");
        }
      }
      if (!net.treatment_index(t)) net.treatments.push_back(t);
    }
  }
  net.studies = std::move(layouts);
  net.connected = check_connectivity(net).size() == 1;
  return net;
}

Network build_network(const std::vector<Study>& studies, ComponentDictionary components) {
  std::vector<StudyLayout> layouts;
  layouts.reserve(studies.size());
  for (const auto& s : studies) {
    validate_study(s);
    StudyLayout layout{s.id, {}};
    for (const auto& arm : s.arms) layout.treatments.push_back(arm.treatment);
    layouts.push_back(std::move(layout));
  }
  return build_network(std::move(layouts), std::move(components));
}

Network build_network(const std::vector<ContrastBlock>& blocks, ComponentDictionary components) {
  std::vector<StudyLayout> layouts;
  layouts.reserve(blocks.size());
  for (const auto& b : blocks) {
    b.validate();
    layouts.push_back(StudyLayout{b.study_id, b.treatments});
  }
  return build_network(std::move(layouts), std::move(components));
}

std::vector<std::vector<Treatment>> check_connectivity(const Network& network) {
  if (network.treatments.empty()) {
    throw Error(ErrorCode::EmptyNetwork, "network has no treatments");
  }
  DisjointSets sets(network.treatments.size());
  for (const auto& study : network.studies) {
    std::optional<std::size_t> first;
    for (const auto& t : study.treatments) {
      const auto idx = network.treatment_index(t);
      if (!idx) continue;
      if (first) sets.unite(*first, *idx);
      else first = idx;
    }
  }
  std::vector<std::vector<Treatment>> groups;
  std::vector<std::ptrdiff_t> group_of_root(network.treatments.size(), -1);
  for (std::size_t i = 0; i < network.treatments.size(); ++i) {
    const auto root = sets.find(i);
    if (group_of_root[root] < 0) {
      group_of_root[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of_root[root])].push_back(network.treatments[i]);
  }
  return groups;
}

void require_connected(const Network& network) {
  if (!network.connected) {
    throw Error(ErrorCode::Disconnected, "network is not connected");
  }
}

std::vector<Treatment> ContrastBlock::contrast_treatments() const {
  std::vector<Treatment> out;
  for (std::size_t j = 0; j < treatments.size(); ++j) {
    if (j != baseline_arm) out.push_back(treatments[j]);
  }
  return out;
}

Matrix ContrastBlock::covariance() const {
  const auto m = se.size();
  Matrix s = Matrix::Constant(m, m, se_baseline * se_baseline);
  for (Eigen::Index j = 0; j < m; ++j) s(j, j) = se(j) * se(j);
  return s;
}

void ContrastBlock::validate() const {
  if (treatments.size() < 2) {
    throw Error(ErrorCode::TooFewArms, "contrast block '" + study_id + "' has fewer than 2 arms");
  }
  if (baseline_arm >= treatments.size()) {
    throw Error(ErrorCode::InvalidArgument, "contrast block '" + study_id + "' baseline out of range");
  }
  const auto m = static_cast<Eigen::Index>(treatments.size() - 1);
  if (y_star.size() != m || se.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "contrast block '" + study_id + "' sizes disagree");
  }
  if (!y_star.allFinite() || !se.allFinite() || !std::isfinite(se_baseline)) {
    throw Error(ErrorCode::MalformedInput, "contrast block '" + study_id + "' has non-finite values");
  }
  if ((se.array() <= 0.0).any()) {
    throw Error(ErrorCode::ZeroStandardError, "contrast block '" + study_id + "' has se <= 0");
  }
  if (se_baseline < 0.0) {
    throw Error(ErrorCode::MalformedInput, "contrast block '" + study_id + "' has se_baseline < 0");
  }
  if (m > 1 && !(se_baseline * se_baseline < se.array().square().minCoeff())) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "contrast block '" + study_id + "': se_baseline^2 must be below every se^2");
  }
}

ContrastBlock arm_to_contrast(const Study& study, std::size_t baseline_arm, ZeroCellPolicy policy) {
  validate_study(study);
  if (baseline_arm >= study.arms.size()) {
    throw Error(ErrorCode::InvalidArgument, "baseline arm out of range for '" + study.id + "'");
  }
  const auto& base = study.arms[baseline_arm];
  const auto m = static_cast<Eigen::Index>(study.arms.size() - 1);

  ContrastBlock block;
  block.study_id = study.id;
  block.baseline_arm = baseline_arm;
  block.y_star.resize(m);
  block.se.resize(m);
  for (const auto& arm : study.arms) block.treatments.push_back(arm.treatment);

  auto has_zero = [](const ArmRecord& a) { return a.events == 0 || a.events == a.total; };
  const bool zero_cell = std::any_of(study.arms.begin(), study.arms.end(), has_zero);
  if (zero_cell && policy == ZeroCellPolicy::Error) {
    throw Error(ErrorCode::ZeroCell, "study '" + study.id + "' has a zero cell");
  }
  // the correction is applied to every arm of an affected study
  const double add = zero_cell ? 0.5 : 0.0;
  const double r0 = static_cast<double>(base.events) + add;
  const double f0 = static_cast<double>(base.total - base.events) + add;
  Eigen::Index row = 0;
  for (std::size_t j = 0; j < study.arms.size(); ++j) {
    if (j == baseline_arm) continue;
    const auto& arm = study.arms[j];
    const double r1 = static_cast<double>(arm.events) + add;
    const double f1 = static_cast<double>(arm.total - arm.events) + add;
    block.y_star(row) = std::log((r1 / f1) / (r0 / f0));
    block.se(row) = std::sqrt(1.0 / r1 + 1.0 / f1 + 1.0 / r0 + 1.0 / f0);
    ++row;
  }
  block.se_baseline = std::sqrt(1.0 / r0 + 1.0 / f0);
  block.validate();
  return block;
}

std::vector<ContrastBlock> arm_to_contrast(const std::vector<Study>& studies, ZeroCellPolicy policy) {
  std::vector<ContrastBlock> blocks;
  blocks.reserve(studies.size());
  for (const auto& s : studies) blocks.push_back(arm_to_contrast(s, 0, policy));
  return blocks;
}

}  // namespace cnma
