#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plearn/model.hpp"

namespace plearn {

/// Transition counts w(s'|s,a) and row totals w(s,a).
class TransitionCounts {
 public:
  TransitionCounts(int num_states, int num_actions);

  int num_states() const { return n_; }
  int num_actions() const { return a_; }

  std::int64_t count(int s, int a, int s_next) const { return counts_[index(s, a, s_next)]; }
  std::int64_t total(int s, int a) const { return totals_[static_cast<std::size_t>(s * a_ + a)]; }
  void add(int s, int a, int s_next, std::int64_t k = 1);

  /// Elementwise sum; shards of a parallel count merge in any order.
  TransitionCounts& merge(const TransitionCounts& other);

  /// True when every total equals the sum of its counts.
  bool consistent() const;

  friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;

 private:
  std::size_t index(int s, int a, int s_next) const {
    return (static_cast<std::size_t>(s) * a_ + a) * n_ + s_next;
  }

  int n_;
  int a_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> totals_;
};

/// One sequence of state labels with the actions taken between them.
struct LabeledSequence {
  std::vector<int> states;
  /// length states.size() - 1
  std::vector<int> actions;
};

/// counts[states[t] -> states[t+1] under actions[t]] for every t.
/// Throws std::invalid_argument on a length mismatch or an out-of-range id.
TransitionCounts count_transitions(std::span<const LabeledSequence> sequences, int num_states,
                                   int num_actions);

struct CoverageReport {
  struct Gap {
    int state;
    int action;
  };
  /// (s, a) pairs without data; their rows were set uniform.
  std::vector<Gap> empty_rows;
  /// smallest w(s,a) over all pairs
  std::int64_t min_total = 0;

  bool complete() const { return empty_rows.empty(); }
};

struct TransitionEstimate {
  /// transition[a](s, s')
  std::vector<Matrix> transition;
  CoverageReport coverage;
};

/// Sample-mean estimate w(s'|s,a) / w(s,a); unvisited rows are uniform and reported.
TransitionEstimate estimate_transitions(const TransitionCounts& counts);

/// Smallest w with 1 - 2 exp(-alpha^2 w / 2) >= delta: ceil(-(2/alpha^2) ln((1-delta)/2)).
std::int64_t required_samples(double alpha, double delta);

/// max(0, 1 - 2 exp(-alpha^2 w / 2)): confidence that one estimated entry is within alpha.
double confidence_of(double alpha, std::int64_t w);

/// floor instead of ceil; one sample short of the bound.
std::int64_t truncated_samples(double alpha, double delta);

}  // namespace plearn
