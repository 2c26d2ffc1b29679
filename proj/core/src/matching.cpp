#include "plearn/matching.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace plearn {

std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  const int n = std::max(rows, cols);
  if (n == 0) return {};
  Matrix c = Matrix::Zero(n, n);
  c.topLeftCorner(rows, cols) = cost;

  // Jonker-Volgenant style O(n^3) Hungarian method, 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i < rows && j - 1 < cols) row_to_col[i] = j - 1;
  }
  return row_to_col;
}

StateMatching match_states(std::span<const int> estimated, std::span<const int> reference) {
  if (estimated.size() != reference.size())
    throw std::invalid_argument("match_states: label sequences differ in length");
  StateMatching out;
  if (estimated.empty()) return out;
  int ne = 0, nr = 0;
  for (std::size_t t = 0; t < estimated.size(); ++t) {
    if (estimated[t] < 0 || reference[t] < 0)
      throw std::invalid_argument("match_states: negative label");
    ne = std::max(ne, estimated[t] + 1);
    nr = std::max(nr, reference[t] + 1);
  }
  Matrix confusion = Matrix::Zero(ne, nr);
  for (std::size_t t = 0; t < estimated.size(); ++t) confusion(estimated[t], reference[t]) += 1.0;
  out.permutation = min_cost_assignment(-confusion);
  double agree = 0.0;
  for (int e = 0; e < ne; ++e)
    if (out.permutation[e] >= 0) agree += confusion(e, out.permutation[e]);
  out.hamming_error = 1.0 - agree / static_cast<double>(estimated.size());
  return out;
}

}  // namespace plearn
