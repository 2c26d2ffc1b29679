#include "plearn/transest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace plearn {

TransitionCounts::TransitionCounts(int num_states, int num_actions) : n_(num_states), a_(num_actions) {
  if (num_states < 1 || num_actions < 1)
    throw std::invalid_argument("transition counts need at least one state and one action");
  counts_.assign(static_cast<std::size_t>(n_) * a_ * n_, 0);
  totals_.assign(static_cast<std::size_t>(n_) * a_, 0);
}

void TransitionCounts::add(int s, int a, int s_next, std::int64_t k) {
  if (s < 0 || s >= n_ || s_next < 0 || s_next >= n_)
    throw std::invalid_argument("state id out of range: " + std::to_string(s < 0 || s >= n_ ? s : s_next));
  if (a < 0 || a >= a_) throw std::invalid_argument("action id out of range: " + std::to_string(a));
  counts_[index(s, a, s_next)] += k;
  totals_[static_cast<std::size_t>(s * a_ + a)] += k;
}

TransitionCounts& TransitionCounts::merge(const TransitionCounts& other) {
  if (other.n_ != n_ || other.a_ != a_) throw std::invalid_argument("cannot merge counts of different shape");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  for (std::size_t i = 0; i < totals_.size(); ++i) totals_[i] += other.totals_[i];
  return *this;
}

bool TransitionCounts::consistent() const {
  for (int s = 0; s < n_; ++s)
    for (int a = 0; a < a_; ++a) {
      std::int64_t sum = 0;
      for (int t = 0; t < n_; ++t) sum += count(s, a, t);
      if (sum != total(s, a)) return false;
    }
  return true;
}

TransitionCounts count_transitions(std::span<const LabeledSequence> sequences, int num_states,
                                   int num_actions) {
  TransitionCounts out(num_states, num_actions);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto& seq = sequences[i];
    if (seq.states.empty() && seq.actions.empty()) continue;
    if (seq.actions.size() + 1 != seq.states.size())
      throw std::invalid_argument("sequence " + std::to_string(i) + ": expected " +
                                  std::to_string(seq.states.empty() ? 0 : seq.states.size() - 1) +
                                  " actions, got " + std::to_string(seq.actions.size()));
    for (std::size_t t = 0; t + 1 < seq.states.size(); ++t)
      out.add(seq.states[t], seq.actions[t], seq.states[t + 1]);
  }
  return out;
}

TransitionEstimate estimate_transitions(const TransitionCounts& counts) {
  const int n = counts.num_states();
  TransitionEstimate out;
  out.coverage.min_total = std::numeric_limits<std::int64_t>::max();
  for (int a = 0; a < counts.num_actions(); ++a) {
    Matrix t(n, n);
    for (int s = 0; s < n; ++s) {
      const std::int64_t w = counts.total(s, a);
      out.coverage.min_total = std::min(out.coverage.min_total, w);
      if (w == 0) {
        t.row(s).setConstant(1.0 / n);
        out.coverage.empty_rows.push_back({s, a});
        continue;
      }
      for (int s2 = 0; s2 < n; ++s2)
        t(s, s2) = static_cast<double>(counts.count(s, a, s2)) / static_cast<double>(w);
    }
    out.transition.push_back(std::move(t));
  }
  return out;
}

std::int64_t required_samples(double alpha, double delta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
  const double w = -(2.0 / (alpha * alpha)) * std::log((1.0 - delta) / 2.0);
  auto out = static_cast<std::int64_t>(std::ceil(w));
  // guard against ceil landing one short through rounding in log()
  while (confidence_of(alpha, out) < delta) ++out;
  return out;
}

std::int64_t truncated_samples(double alpha, double delta) {
  required_samples(alpha, delta);  // domain checks
  return static_cast<std::int64_t>(std::floor(-(2.0 / (alpha * alpha)) * std::log((1.0 - delta) / 2.0)));
}

double confidence_of(double alpha, std::int64_t w) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (w < 0) throw std::domain_error("sample count must be nonnegative");
  return std::max(0.0, 1.0 - 2.0 * std::exp(-alpha * alpha * static_cast<double>(w) / 2.0));
}

}  // namespace plearn
