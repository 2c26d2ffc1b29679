#pragma once

#include <span>
#include <vector>

#include "plearn/model.hpp"

namespace plearn {

/// Minimum-cost assignment of rows to columns (Hungarian algorithm).
/// Returns, for each row, its column or -1 if the matrix has more rows than columns.
std::vector<int> min_cost_assignment(const Matrix& cost);

struct StateMatching {
  /// permutation[estimated label] = reference label, or -1 when unmatched.
  std::vector<int> permutation;
  double hamming_error = 0.0;
};

/// Relabels `estimated` to best agree with `reference` (optimal assignment on
/// the confusion matrix). Points of unmatched estimated states count as errors.
StateMatching match_states(std::span<const int> estimated, std::span<const int> reference);

}  // namespace plearn
