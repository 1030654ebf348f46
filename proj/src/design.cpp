#include "cnma/design.hpp"

#include <string>

#include "cnma/error.hpp"

namespace cnma {

Matrix build_V(const std::vector<Treatment>& arms, std::size_t num_components) {
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(arms.size()),
                          static_cast<Eigen::Index>(num_components));
  for (std::size_t j = 0; j < arms.size(); ++j) {
    for (int c : arms[j].components) {
      if (c < 0 || static_cast<std::size_t>(c) >= num_components) {
        throw Error(ErrorCode::UnknownComponent,
                    "treatment '" + arms[j].label + "' uses an unregistered component");
      }
      v(static_cast<Eigen::Index>(j), c) = 1.0;
    }
  }
  return v;
}

Matrix build_V(const StudyLayout& study, const Network& network) {
  return build_V(study.treatments, network.num_components());
}

Matrix build_V(const Study& study, const Network& network) {
  std::vector<Treatment> arms;
  for (const auto& a : study.arms) arms.push_back(a.treatment);
  return build_V(arms, network.num_components());
}

int anchor_component(const Treatment& anchor, const Network& network) {
  if (anchor.components.size() != 1) {
    throw Error(ErrorCode::MulticomponentAnchor,
                "anchor '" + anchor.label + "' must be a single-component treatment");
  }
  const int c = anchor.components.front();
  if (c < 0 || static_cast<std::size_t>(c) >= network.num_components() ||
      !network.treatment_index(anchor)) {
    throw Error(ErrorCode::UnknownAnchor, "anchor '" + anchor.label + "' is not in the network");
  }
  return c;
}

Matrix build_V_anchored(const std::vector<Treatment>& arms, const Network& network,
                        const Treatment& anchor) {
  const int drop = anchor_component(anchor, network);
  const Matrix full = build_V(arms, network.num_components());
  const auto c = full.cols();
  Matrix out(full.rows(), c - 1);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    if (k == drop) continue;
    out.col(col++) = full.col(k);
  }
  return out;
}

Matrix build_V_anchored(const StudyLayout& study, const Network& network, const Treatment& anchor) {
  return build_V_anchored(study.treatments, network, anchor);
}

Matrix build_U(std::size_t arms, ContrastMode mode, std::size_t baseline_arm) {
  if (arms < 2) {
    throw Error(ErrorCode::TooFewArms, "build_U needs at least 2 arms");
  }
  const auto a = static_cast<Eigen::Index>(arms);
  if (mode == ContrastMode::AllPairs) {
    Matrix u = Matrix::Zero(a * (a - 1) / 2, a);
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < a; ++j) {
      for (Eigen::Index k = j + 1; k < a; ++k) {
        u(row, j) = -1.0;
        u(row, k) = 1.0;
        ++row;
      }
    }
    return u;
  }
  if (baseline_arm >= arms) {
    throw Error(ErrorCode::InvalidArgument, "build_U baseline arm out of range");
  }
  const auto b = static_cast<Eigen::Index>(baseline_arm);
  Matrix u = Matrix::Zero(a - 1, a);
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < a; ++k) {
    if (k == b) continue;
    u(row, b) = -1.0;
    u(row, k) = 1.0;
    ++row;
  }
  return u;
}

Matrix build_Sigma(std::size_t arms, bool reference_in_first_arm) {
  if (arms < 2) {
    throw Error(ErrorCode::TooFewArms, "build_Sigma needs at least 2 arms");
  }
  const auto a = static_cast<Eigen::Index>(arms);
  Matrix s = Matrix::Constant(a, a, 0.5);
  s.diagonal().setOnes();
  if (reference_in_first_arm) {
    s.row(0).setZero();
    s.col(0).setZero();
  }
  return s;
}

Matrix build_Sigma_star(std::size_t arms) {
  if (arms < 2) {
    throw Error(ErrorCode::TooFewArms, "build_Sigma_star needs at least 2 arms");
  }
  const auto m = static_cast<Eigen::Index>(arms - 1);
  Matrix s = Matrix::Constant(m, m, 0.5);
  s.diagonal().setOnes();
  return s;
}

Matrix stack_X(const Network& network, ContrastMode mode) {
  require_connected(network);
  std::vector<Matrix> blocks;
  Eigen::Index rows = 0;
  for (const auto& study : network.studies) {
    blocks.push_back(build_U(study.treatments.size(), mode, 0) * build_V(study, network));
    rows += blocks.back().rows();
  }
  Matrix x(rows, static_cast<Eigen::Index>(network.num_components()));
  Eigen::Index row = 0;
  for (const auto& b : blocks) {
    x.middleRows(row, b.rows()) = b;
    row += b.rows();
  }
  return x;
}

Matrix contrast_design(const ContrastBlock& block, std::size_t num_components) {
  return build_U(block.num_arms(), ContrastMode::Baseline, block.baseline_arm) *
         build_V(block.treatments, num_components);
}

DesignSet build_design_set(const Network& network, const std::optional<Treatment>& anchor) {
  DesignSet set;
  for (const auto& study : network.studies) {
    StudyDesign d;
    const auto a = study.treatments.size();
    d.V = build_V(study, network);
    bool anchor_first = false;
    if (anchor) {
      d.V_anchored = build_V_anchored(study, network, *anchor);
      anchor_first = study.treatments.front() == *anchor;
    }
    d.U_allpairs = build_U(a, ContrastMode::AllPairs);
    d.U_baseline = build_U(a, ContrastMode::Baseline, 0);
    d.Sigma = build_Sigma(a, anchor_first);
    d.Sigma_star = build_Sigma_star(a);
    set.studies.push_back(std::move(d));
  }
  set.X = stack_X(network, ContrastMode::Baseline);
  return set;
}

}  // namespace cnma
