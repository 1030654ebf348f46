#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cnma/network.hpp"
#include "cnma/numerics.hpp"

namespace cnma {

enum class ContrastMode { AllPairs, Baseline };

/// a_i x c component incidence of the arms of one study.
Matrix build_V(const std::vector<Treatment>& arms, std::size_t num_components);
Matrix build_V(const StudyLayout& study, const Network& network);
Matrix build_V(const Study& study, const Network& network);

/// Index of the anchor's single component; throws MulticomponentAnchor or
/// UnknownAnchor.
int anchor_component(const Treatment& anchor, const Network& network);

/// a_i x (c-1): the full incidence with the anchor component's column removed.
Matrix build_V_anchored(const std::vector<Treatment>& arms, const Network& network,
                        const Treatment& anchor);
Matrix build_V_anchored(const StudyLayout& study, const Network& network, const Treatment& anchor);

/// Contrast-forming matrix. AllPairs: a(a-1)/2 rows in lexicographic (j<k)
/// order, each row arm k minus arm j. Baseline: a-1 rows, the non-baseline
/// arms in order minus the baseline arm.
Matrix build_U(std::size_t arms, ContrastMode mode, std::size_t baseline_arm = 0);

/// Compound symmetry (1 on the diagonal, 1/2 off); first row and column
/// zeroed when the reference treatment sits in arm 1.
Matrix build_Sigma(std::size_t arms, bool reference_in_first_arm);

/// Compound symmetry on a-1 dimensions.
Matrix build_Sigma_star(std::size_t arms);

/// Vertical stack of U_i V_i over studies, study order preserved. Baseline
/// mode uses arm 1 of each study as the subtrahend.
Matrix stack_X(const Network& network, ContrastMode mode);

/// Rows U*_i V_i for one contrast block (its own baseline arm).
Matrix contrast_design(const ContrastBlock& block, std::size_t num_components);

/// Every per-study matrix for a network.
struct StudyDesign {
  Matrix V;
  std::optional<Matrix> V_anchored;
  Matrix U_allpairs;
  Matrix U_baseline;
  Matrix Sigma;
  Matrix Sigma_star;
};

struct DesignSet {
  std::vector<StudyDesign> studies;
  Matrix X;  // baseline-mode stack
};

DesignSet build_design_set(const Network& network,
                           const std::optional<Treatment>& anchor = std::nullopt);

}  // namespace cnma
