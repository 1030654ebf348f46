#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "cnma/network.hpp"

namespace cnma::test {

struct ArmSpec {
  std::string label;
  long events;
  long total;
};

inline Study make_study(ComponentDictionary& dict, const std::string& id,
                        const std::vector<ArmSpec>& arms) {
  Study s;
  s.id = id;
  for (const auto& a : arms) s.arms.push_back({parse_treatment(a.label, dict), a.events, a.total});
  return s;
}

inline StudyLayout make_layout(ComponentDictionary& dict, const std::string& id,
                               const std::vector<std::string>& labels) {
  StudyLayout s;
  s.id = id;
  for (const auto& l : labels) s.treatments.push_back(parse_treatment(l, dict));
  return s;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: nothing thrown
}

}  // namespace cnma::test
