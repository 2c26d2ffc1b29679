#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plearn/bnp.hpp"
#include "plearn/matching.hpp"
#include "plearn/obsfn.hpp"
#include "plearn/planner.hpp"
#include "plearn/simgen.hpp"
#include "plearn/transest.hpp"

namespace plearn::cli {

struct PipelineConfig {
  int sequences = 8;
  int length = 2500;
  std::uint64_t seed = 0;
  int sweeps = 300;
  int burn_in = -1;
  int ar_order = 0;
  long n_mc = 1000000;
  int horizon = 3;
  std::string solver = "dp";
  /// "map": decoded MAP labels; "truth": the generator's labels and emissions.
  std::string labels = "map";
  double alpha = 0.05;
  double delta = 0.9;
  std::int64_t episodes = 100000;
  int threads = 1;
};

struct PipelineResult {
  Dataset data;
  FitResult fit;
  ObservationMatrix observation;
  TransitionCounts counts{1, 1};
  TransitionEstimate transitions;
  PomdpModel model;
  PlanResult plan{PolicyTree(1, 1), 0.0};
  EvaluationResult evaluation;
  SimulationResult simulation;
  /// estimated state -> ground-truth human state (-1: unmatched)
  std::vector<int> state_map;
  double hamming_error = 0.0;
  std::int64_t required_samples = 0;
  /// Largest |T_hat - T| over matched states; empty when the state sets do not align.
  std::optional<double> transition_error;
};

PipelineResult run_pipeline(const GroundTruthScenario& scenario, const PipelineConfig& config);

}  // namespace plearn::cli
