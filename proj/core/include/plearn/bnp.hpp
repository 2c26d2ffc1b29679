#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plearn/gaussian.hpp"
#include "plearn/model.hpp"
#include "plearn/random.hpp"

namespace plearn {

/// Hyperparameters of the beta-process (AR-)HMM.
struct BpHmmHyperparams {
  /// Beta-process mass c; sequence-unique states arrive at rate c / K.
  double mass = 1.0;
  /// Dirichlet concentration of every transition row.
  double gamma = 1.0;
  /// Extra Dirichlet mass on the self transition.
  double kappa = 25.0;
  int ar_order = 0;
  MniwParams emission_prior;
};

/// Throws std::invalid_argument on non-positive mass/gamma, negative kappa,
/// negative AR order or a malformed/non-SPD emission prior.
void check_hyperparams(const BpHmmHyperparams& hyper, int dim);

/// Scale-adaptive defaults: c = 1, gamma = 1, kappa = 25 gamma, m0 = pooled
/// mean, k0 = 0.01, nu0 = n + 2, Psi0 = 0.75 pooled covariance. Lag
/// coefficients (ar_order >= 1) get precision tr(C)/n per regressor.
BpHmmHyperparams default_hyperparams(const Dataset& data, int ar_order = 0);

/// Binary K x L matrix; entry (i, k) says whether sequence i uses global state k.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(int rows, int cols) : rows_(rows), cols_(cols), bits_(rows, std::vector<char>(cols, 0)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool operator()(int i, int k) const { return bits_[i][k] != 0; }
  void set(int i, int k, bool on) { bits_[i][k] = on ? 1 : 0; }

  int column_count(int k) const;
  int row_count(int i) const;
  /// Active global states of sequence i, ascending.
  std::vector<int> active(int i) const;

  int add_column();
  void remove_column(int k);

  /// Orphan columns and empty rows.
  std::vector<Violation> validate() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::vector<char>> bits_;
};

/// One MCMC draw.
struct PosteriorSample {
  int num_states = 0;
  std::vector<GaussianEmission> emissions;
  FeatureMatrix features;
  /// Per sequence: L x L Gamma-distributed transition weights. Rows/columns of
  /// active states normalize to trans_rows; the rest are auxiliary prior draws.
  std::vector<Matrix> weights;
  /// Per sequence: L_i x L_i row-stochastic matrix over its active states (ascending).
  std::vector<Matrix> trans_rows;
  /// Per sequence: global state of every time step.
  std::vector<std::vector<int>> labels;
  double log_joint = 0.0;
  int sweep = -1;

  std::vector<int> active_states(int seq) const { return features.active(seq); }
};

std::vector<Violation> validate_sample(const PosteriorSample& sample, const Dataset& data);

struct FitConfig {
  int sweeps = 1000;
  /// Negative means sweeps / 2.
  int burn_in = -1;
  std::uint64_t seed = 0;
  int birth_death_proposals_per_sweep = 4;
  /// Block length of the data-driven birth proposal.
  int proposal_window = 15;
  int thin = 1;
  int threads = 1;
  /// Recompute log_joint from scratch each sweep and compare with the cached value.
  bool check_log_joint = false;
  /// Post-process the MAP draw with merge_redundant_states.
  bool merge_map = true;
};

struct MoveStats {
  long proposed = 0;
  long accepted = 0;
};

struct FitResult {
  std::vector<PosteriorSample> samples;
  PosteriorSample map;
  std::vector<int> num_states_trace;
  std::vector<double> log_joint_trace;
  MoveStats births, deaths, flips;
};

/// Greedy MAP refinement: repeatedly folds the pair of states whose merge most
/// increases the log joint (both sides scored with posterior-mode emissions and
/// posterior-mean transition rows given the labels). Returns `sample` unchanged
/// when no merge helps. Duplicate states born separately in different
/// sequences are otherwise slow to disappear from the chain.
PosteriorSample merge_redundant_states(const Dataset& data, const PosteriorSample& sample,
                                       const BpHmmHyperparams& hyper);

/// MCMC over the beta-process HMM. Deterministic in (data, hyper, config).
FitResult fit_bphmm(const Dataset& data, const BpHmmHyperparams& hyper, const FitConfig& config);

/// log p(y_1..T) of an HMM whose emissions enter as a T x L log-likelihood matrix.
double forward_log_marginal(const Matrix& loglik, const Matrix& trans, const Vector& log_init);

/// Forward-filter backward-sample on a precomputed T x L log-likelihood matrix.
std::vector<int> ffbs(const Matrix& loglik, const Matrix& trans, const Vector& log_init, Rng& rng);

/// Exact joint posterior draw of the label sequence (indices into `emissions`)
/// under a uniform initial distribution.
std::vector<int> ffbs_labels(const TimeSeries& series, std::span<const GaussianEmission> emissions,
                             const Matrix& trans, std::uint64_t seed);

/// T x L matrix of emission log-densities (rows t < r are zero).
Matrix emission_loglik(const TimeSeries& series, std::span<const GaussianEmission> emissions);

/// Conjugate posterior draw of every state's emission given its assigned rows.
std::vector<GaussianEmission> update_emissions(const Dataset& data,
                                               const std::vector<std::vector<int>>& labels,
                                               int num_states, const MniwParams& prior, Rng& rng);

/// Row j ~ Dirichlet(gamma + counts(j -> .) + kappa * [self]) over each sequence's active states.
std::vector<Matrix> sample_trans_rows(const std::vector<std::vector<int>>& labels,
                                      const FeatureMatrix& features, double gamma, double kappa,
                                      Rng& rng);

/// One feature-update pass: Gibbs flips of shared states followed by
/// birth/death proposals for sequence-unique states. Labels are resampled
/// afterwards so they are consistent with the new features.
MoveStats sample_features(const Dataset& data, PosteriorSample& sample,
                          const BpHmmHyperparams& hyper, std::uint64_t seed,
                          int proposals_per_sequence = 4, int proposal_window = 15);

/// Complete-data log joint: emissions, labels, transition rows, emission prior, feature prior.
double log_joint(const Dataset& data, const PosteriorSample& sample, const BpHmmHyperparams& hyper);

/// Relabels global states: new index of old state k is perm[k].
PosteriorSample permute_states(const PosteriorSample& sample, std::span<const int> perm);

}  // namespace plearn
