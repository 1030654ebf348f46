#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cnma/numerics.hpp"

namespace cnma {

inline constexpr std::string_view kDefaultSeparator = "+";

/// Component names indexed in first-registration order. Indices are frozen
/// once assigned; every design matrix column refers to them.
class ComponentDictionary {
 public:
  ComponentDictionary() = default;
  explicit ComponentDictionary(const std::vector<std::string>& names);

  int intern(std::string_view name);
  std::optional<int> find(std::string_view name) const;
  int index_of(std::string_view name) const;

  const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

/// A treatment is a set of components. Equality and ordering look at the
/// component set only; the label is kept for display.
struct Treatment {
  std::string label;
  std::vector<int> components;  // ascending, unique

  std::size_t size() const { return components.size(); }
  bool contains(int component) const;

  bool operator==(const Treatment& other) const { return components == other.components; }
  std::strong_ordering operator<=>(const Treatment& other) const {
    return components <=> other.components;
  }
};

/// Splits on separator, trims tokens, registers unseen components.
Treatment parse_treatment(std::string_view label, ComponentDictionary& dict,
                          std::string_view separator = kDefaultSeparator);

/// Like parse_treatment but every component must already exist.
Treatment lookup_treatment(std::string_view label, const ComponentDictionary& dict,
                           std::string_view separator = kDefaultSeparator);

/// Canonical label: component names in index order.
std::string format_treatment(const Treatment& treatment, const ComponentDictionary& dict,
                             std::string_view separator = kDefaultSeparator);

/// Treatment made of a single component.
Treatment single_component(int component, const ComponentDictionary& dict);

struct ArmRecord {
  Treatment treatment;
  long events = 0;
  long total = 1;
};

struct Study {
  std::string id;
  std::vector<ArmRecord> arms;
};

void validate_study(const Study& study);

/// Study-level treatment layout, shared by arm and contrast data.
struct StudyLayout {
  std::string id;
  std::vector<Treatment> treatments;  // arm order
};

struct Network {
  ComponentDictionary components;
  std::vector<StudyLayout> studies;
  std::vector<Treatment> treatments;  // distinct, in first-appearance order
  bool connected = false;

  std::size_t num_components() const { return components.size(); }
  std::size_t num_studies() const { return studies.size(); }
  std::optional<std::size_t> treatment_index(const Treatment& treatment) const;
};

struct ContrastBlock;

Network build_network(std::vector<StudyLayout> layouts, ComponentDictionary components);
Network build_network(const std::vector<Study>& studies, ComponentDictionary components);
Network build_network(const std::vector<ContrastBlock>& blocks, ComponentDictionary components);

/// Treatments grouped by the transitive closure of co-appearing in a study.
std::vector<std::vector<Treatment>> check_connectivity(const Network& network);

/// Throws Disconnected unless the network forms one group.
void require_connected(const Network& network);

enum class ZeroCellPolicy { Error, Continuity05 };

/// Per-study baseline contrasts: y_star[j] is the log odds ratio of the j-th
/// non-baseline arm (arm order) against the baseline arm.
struct ContrastBlock {
  std::string study_id;
  std::size_t baseline_arm = 0;
  Vector y_star;
  Vector se;
  double se_baseline = 0.0;
  std::vector<Treatment> treatments;  // arm order, baseline included

  std::size_t num_arms() const { return treatments.size(); }
  const Treatment& baseline() const { return treatments.at(baseline_arm); }
  /// Treatments of the non-baseline arms, aligned with y_star.
  std::vector<Treatment> contrast_treatments() const;
  /// S*: se^2 on the diagonal, se_baseline^2 off the diagonal.
  Matrix covariance() const;
  void validate() const;
};

ContrastBlock arm_to_contrast(const Study& study, std::size_t baseline_arm = 0,
                              ZeroCellPolicy policy = ZeroCellPolicy::Error);

std::vector<ContrastBlock> arm_to_contrast(const std::vector<Study>& studies,
                                           ZeroCellPolicy policy = ZeroCellPolicy::Error);

}  // namespace cnma
