#include "plearn/bnp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "plearn/parallel.hpp"

namespace plearn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Matrix lower_chol(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return Eigen::LLT<Matrix>(clamp_spd(m)).matrixL();
  return llt.matrixL();
}

double log_det(const Matrix& l) { return 2.0 * l.diagonal().array().log().sum(); }

/// Emission pieces reused by repeated MNIW density evaluations.
struct EmissionFactors {
  Matrix coeffs;
  Matrix ls;
  double logdet_sigma;

  explicit EmissionFactors(const GaussianEmission& e)
      : coeffs(coefficient_matrix(e)), ls(lower_chol(e.covariance)), logdet_sigma(log_det(ls)) {}
};

/// MNIW density with the parameter-side factorizations cached.
struct CachedMniw {
  MniwParams p;
  Matrix lpsi;
  Matrix lk;
  double constant = 0.0;

  explicit CachedMniw(MniwParams params) : p(std::move(params)) {
    lpsi = lower_chol(p.scale);
    lk = lower_chol(p.precision);
    const int n = p.dim();
    const int d = p.regressor_dim();
    constant = 0.5 * p.dof * log_det(lpsi) - 0.5 * p.dof * n * std::log(2.0) -
               log_mvgamma(n, 0.5 * p.dof) - 0.5 * n * d * kLog2Pi + 0.5 * n * log_det(lk);
  }

  double log_density(const EmissionFactors& e) const {
    const int n = p.dim();
    const int d = p.regressor_dim();
    const Matrix a = e.ls.triangularView<Eigen::Lower>().solve(lpsi);
    const Matrix q = e.ls.triangularView<Eigen::Lower>().solve((e.coeffs - p.mean) * lk);
    return constant - 0.5 * (p.dof + n + 1 + d) * e.logdet_sigma - 0.5 * a.squaredNorm() -
           0.5 * q.squaredNorm();
  }
};

Matrix regressors(const TimeSeries& s, int r) {
  const int d = 1 + s.dim() * r;
  Matrix x = Matrix::Zero(s.length(), d);
  for (int t = r; t < s.length(); ++t) x.row(t) = regressor(s.values, t, r).transpose();
  return x;
}

Vector loglik_column(const TimeSeries& s, const Matrix& x, const GaussianEmission& e) {
  const int r = e.ar_order();
  const Matrix ls = lower_chol(e.covariance);
  const double norm = -0.5 * (s.dim() * kLog2Pi + log_det(ls));
  const Matrix resid = s.values - x * coefficient_matrix(e).transpose();
  const Matrix z = ls.triangularView<Eigen::Lower>().solve(resid.transpose());
  Vector out = (norm - 0.5 * z.colwise().squaredNorm().array()).transpose();
  for (int t = 0; t < std::min(r, s.length()); ++t) out(t) = 0.0;
  return out;
}

Matrix select_columns(const Matrix& m, const std::vector<int>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
  return out;
}

Matrix normalized_block(const Matrix& weights, const std::vector<int>& act) {
  const auto m = static_cast<Eigen::Index>(act.size());
  Matrix p(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) p(a, b) = weights(act[a], act[b]);
    const double s = p.row(a).sum();
    if (s > 0.0)
      p.row(a) /= s;
    else
      p.row(a).setConstant(1.0 / static_cast<double>(m));
  }
  return p;
}

Vector uniform_log_init(Eigen::Index m) { return Vector::Constant(m, -std::log(static_cast<double>(m))); }

double prior_weight_shape(const BpHmmHyperparams& h, int j, int k) {
  return h.gamma + (j == k ? h.kappa : 0.0);
}

std::vector<int> with(std::vector<int> act, int k) {
  act.insert(std::lower_bound(act.begin(), act.end(), k), k);
  return act;
}

std::vector<int> without(std::vector<int> act, int k) {
  act.erase(std::remove(act.begin(), act.end(), k), act.end());
  return act;
}

double log_dirichlet(const Vector& p, const Vector& alpha) {
  double out = std::lgamma(alpha.sum());
  for (Eigen::Index k = 0; k < alpha.size(); ++k)
    out += (alpha(k) - 1.0) * std::log(std::max(p(k), 1e-300)) - std::lgamma(alpha(k));
  return out;
}

double log_ibp(const FeatureMatrix& f, double mass) {
  const int k_rows = f.rows();
  const int l = f.cols();
  double harmonic = 0.0;
  for (int i = 1; i <= k_rows; ++i) harmonic += 1.0 / i;
  double out = l * std::log(mass) - mass * harmonic;
  std::map<std::vector<char>, int> histories;
  for (int k = 0; k < l; ++k) {
    std::vector<char> h(k_rows);
    for (int i = 0; i < k_rows; ++i) h[i] = f(i, k) ? 1 : 0;
    ++histories[h];
    const int m = f.column_count(k);
    out += std::lgamma(k_rows - m + 1.0) + std::lgamma(static_cast<double>(m)) -
           std::lgamma(k_rows + 1.0);
  }
  for (const auto& [h, count] : histories) out -= std::lgamma(count + 1.0);
  return out;
}

/// Labels + transition + emission-prior + feature-prior terms of the log joint;
/// the emission likelihood term comes from `loglik` (per sequence T x L).
double assemble_log_joint(const PosteriorSample& s, const std::vector<Matrix>& loglik,
                          const BpHmmHyperparams& h) {
  double out = 0.0;
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    const auto act = s.features.active(static_cast<int>(i));
    std::vector<int> local(s.num_states, -1);
    for (std::size_t c = 0; c < act.size(); ++c) local[act[c]] = static_cast<int>(c);
    const Matrix& p = s.trans_rows[i];
    const auto& z = s.labels[i];
    for (std::size_t t = 0; t < z.size(); ++t) out += loglik[i](static_cast<Eigen::Index>(t), z[t]);
    out -= std::log(static_cast<double>(act.size()));
    for (std::size_t t = 1; t < z.size(); ++t)
      out += std::log(std::max(p(local[z[t - 1]], local[z[t]]), 1e-300));
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      Vector alpha = Vector::Constant(p.cols(), h.gamma);
      alpha(j) += h.kappa;
      out += log_dirichlet(p.row(j).transpose(), alpha);
    }
  }
  for (const auto& e : s.emissions) out += mniw_log_density(h.emission_prior, e);
  out += log_ibp(s.features, h.mass);
  return out;
}

void sync_trans_rows(PosteriorSample& s) {
  s.trans_rows.resize(s.weights.size());
  for (std::size_t i = 0; i < s.weights.size(); ++i)
    s.trans_rows[i] = normalized_block(s.weights[i], s.features.active(static_cast<int>(i)));
}

/// Sampler state that is not part of a posterior draw: regressors, the
/// emission log-likelihood cache and the block posteriors of the birth proposal.
class Sampler {
 public:
  Sampler(const Dataset& data, const BpHmmHyperparams& hyper, int window, int threads)
      : data_(data), hyper_(hyper), prior_(hyper.emission_prior), threads_(threads) {
    const int r = hyper.ar_order;
    for (const auto& s : data) {
      x_.push_back(regressors(s, r));
      std::vector<CachedMniw> blocks;
      const int w = std::max(1, window);
      for (int start = 0; start < s.length(); start += w) {
        RegressionStats st(s.dim(), 1 + s.dim() * r);
        for (int t = std::max(start, r); t < std::min(start + w, s.length()); ++t)
          st.add(s.values.row(t).transpose(), x_.back().row(t).transpose());
        blocks.emplace_back(mniw_posterior(hyper.emission_prior, st));
      }
      blocks_.push_back(std::move(blocks));
    }
  }

  int num_sequences() const { return static_cast<int>(data_.size()); }
  const std::vector<Matrix>& loglik() const { return ll_; }

  void initialize(PosteriorSample& s, Rng& rng) {
    const int k_rows = num_sequences();
    s = PosteriorSample{};
    s.num_states = 1;
    s.features = FeatureMatrix(k_rows, 1);
    for (int i = 0; i < k_rows; ++i) s.features.set(i, 0, true);
    RegressionStats all(data_.front().dim(), hyper_.emission_prior.regressor_dim());
    for (int i = 0; i < k_rows; ++i)
      for (int t = hyper_.ar_order; t < data_[i].length(); ++t)
        all.add(data_[i].values.row(t).transpose(), x_[i].row(t).transpose());
    s.emissions.push_back(draw_mniw(rng, mniw_posterior(hyper_.emission_prior, all)));
    for (int i = 0; i < k_rows; ++i) {
      s.weights.push_back(Matrix::Constant(1, 1, gamma_draw(rng, hyper_.gamma + hyper_.kappa)));
      s.labels.emplace_back(static_cast<std::size_t>(data_[i].length()), 0);
    }
    sync_trans_rows(s);
    refresh_loglik(s);
  }

  /// Adopts an externally supplied sample; rebuilds the cache.
  void attach(const PosteriorSample& s) { refresh_loglik(s); }

  void refresh_loglik(const PosteriorSample& s) {
    ll_.assign(data_.size(), Matrix());
    parallel_for(data_.size(), threads_, [&](std::size_t i) {
      Matrix m(data_[i].length(), s.num_states);
      for (int k = 0; k < s.num_states; ++k) m.col(k) = loglik_column(data_[i], x_[i], s.emissions[k]);
      ll_[i] = std::move(m);
    });
  }

  double marginal(int i, const std::vector<int>& act, const Matrix& weights) const {
    return forward_log_marginal(select_columns(ll_[i], act), normalized_block(weights, act),
                                uniform_log_init(static_cast<Eigen::Index>(act.size())));
  }

  MoveStats flips(PosteriorSample& s, Rng& rng) const {
    MoveStats stats;
    const int k_rows = num_sequences();
    for (int i = 0; i < k_rows; ++i) {
      auto act = s.features.active(i);
      double current = marginal(i, act, s.weights[i]);
      for (int k = 0; k < s.num_states; ++k) {
        const bool on = s.features(i, k);
        const int m = s.features.column_count(k) - (on ? 1 : 0);
        if (m == 0) continue;
        const auto act_on = on ? act : with(act, k);
        const auto act_off = on ? without(act, k) : act;
        if (act_off.empty()) continue;
        const double ll_on = on ? current : marginal(i, act_on, s.weights[i]);
        const double ll_off = on ? marginal(i, act_off, s.weights[i]) : current;
        const double frac = static_cast<double>(m) / k_rows;
        const double lp_on = std::log(frac) + ll_on;
        const double lp_off = std::log1p(-frac) + ll_off;
        const double p_on = 1.0 / (1.0 + std::exp(lp_off - lp_on));
        const bool choose_on = uniform01(rng) < p_on;
        ++stats.proposed;
        if (choose_on != on) ++stats.accepted;
        s.features.set(i, k, choose_on);
        act = choose_on ? act_on : act_off;
        current = choose_on ? ll_on : ll_off;
      }
    }
    return stats;
  }

  void birth_death(PosteriorSample& s, Rng& rng, int proposals, MoveStats& births,
                   MoveStats& deaths) {
    const int k_rows = num_sequences();
    const double log_rate = std::log(hyper_.mass / k_rows);
    for (int i = 0; i < k_rows; ++i) {
      double current = marginal(i, s.features.active(i), s.weights[i]);
      for (int p = 0; p < proposals; ++p) {
        std::vector<int> unique, shared_on, shared_off;
        for (int k = 0; k < s.num_states; ++k) {
          const bool on = s.features(i, k);
          const int m = s.features.column_count(k) - (on ? 1 : 0);
          if (m == 0 && on) unique.push_back(k);
          else if (m > 0 && on) shared_on.push_back(k);
          else if (m > 0) shared_off.push_back(k);
        }
        const double n_u = static_cast<double>(unique.size());
        const double n_on = static_cast<double>(shared_on.size());
        const double n_off = static_cast<double>(shared_off.size());
        const auto act = s.features.active(i);
        const int move = static_cast<int>(uniform01(rng) * 4.0);

        if (move == 0 || move == 2) {
          // birth (move 0) or birth replacing a shared state (move 2)
          ++births.proposed;
          int dropped = -1;
          double log_ratio = 0.0;
          if (move == 2) {
            if (shared_on.empty()) continue;
            dropped = shared_on[static_cast<std::size_t>(uniform01(rng) * n_on)];
            const double frac = static_cast<double>(s.features.column_count(dropped) - 1) / k_rows;
            log_ratio += std::log1p(-frac) - std::log(frac) - std::log(n_off + 1.0) + std::log(n_on);
          }
          const auto& blocks = blocks_[i];
          const auto b = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(blocks.size()));
          GaussianEmission fresh = draw_mniw(rng, blocks[b].p);
          const int idx = s.num_states;
          Matrix w = grow_weights(s.weights[i], rng);
          Matrix ll_ext(ll_[i].rows(), idx + 1);
          ll_ext << ll_[i], loglik_column(data_[i], x_[i], fresh);
          auto act_new = with(dropped >= 0 ? without(act, dropped) : act, idx);
          const double proposed = forward_log_marginal(
              select_columns(ll_ext, act_new), normalized_block(w, act_new),
              uniform_log_init(static_cast<Eigen::Index>(act_new.size())));
          const EmissionFactors ef(fresh);
          log_ratio += proposed - current + log_rate + prior_.log_density(ef) -
                       log_proposal(i, ef) - std::log(n_u + 1.0);
          if (std::log(uniform01(rng)) < log_ratio) {
            ++births.accepted;
            s.emissions.push_back(std::move(fresh));
            s.features.add_column();
            ++s.num_states;
            s.features.set(i, idx, true);
            if (dropped >= 0) s.features.set(i, dropped, false);
            for (int j = 0; j < k_rows; ++j) {
              if (j == i) {
                s.weights[j] = std::move(w);
                ll_[j] = std::move(ll_ext);
              } else {
                s.weights[j] = grow_weights(s.weights[j], rng);
                ll_[j].conservativeResize(Eigen::NoChange, idx + 1);
                ll_[j].col(idx) = loglik_column(data_[j], x_[j], s.emissions[idx]);
              }
            }
            current = proposed;
          }
        } else {
          // death (move 1) or death adopting a shared state (move 3)
          ++deaths.proposed;
          if (unique.empty()) continue;
          const int victim = unique[static_cast<std::size_t>(uniform01(rng) * n_u)];
          int adopted = -1;
          double log_ratio = 0.0;
          if (move == 3) {
            if (shared_off.empty()) continue;
            adopted = shared_off[static_cast<std::size_t>(uniform01(rng) * n_off)];
            const double frac = static_cast<double>(s.features.column_count(adopted)) / k_rows;
            log_ratio += std::log(frac) - std::log1p(-frac) - std::log(n_on + 1.0) + std::log(n_off);
          }
          auto act_new = without(act, victim);
          if (adopted >= 0) act_new = with(act_new, adopted);
          if (act_new.empty()) continue;
          const double proposed = marginal(i, act_new, s.weights[i]);
          const EmissionFactors ef(s.emissions[victim]);
          log_ratio += proposed - current - log_rate - prior_.log_density(ef) +
                       log_proposal(i, ef) + std::log(n_u);
          if (std::log(uniform01(rng)) < log_ratio) {
            ++deaths.accepted;
            if (adopted >= 0) s.features.set(i, adopted, true);
            remove_state(s, victim);
            current = proposed;
          }
        }
      }
    }
  }

  void resample_labels(PosteriorSample& s, std::uint64_t seed) const {
    parallel_for(data_.size(), threads_, [&](std::size_t i) {
      const auto act = s.features.active(static_cast<int>(i));
      Rng rng = substream(seed, i);
      const auto local = ffbs(select_columns(ll_[i], act), normalized_block(s.weights[i], act),
                              uniform_log_init(static_cast<Eigen::Index>(act.size())), rng);
      auto& z = s.labels[i];
      for (std::size_t t = 0; t < local.size(); ++t) z[t] = act[local[t]];
    });
  }

  void resample_emissions(PosteriorSample& s, Rng& rng) {
    s.emissions = update_emissions(data_, s.labels, s.num_states, hyper_.emission_prior, rng);
    refresh_loglik(s);
  }

  void resample_weights(PosteriorSample& s, Rng& rng) const {
    for (int i = 0; i < num_sequences(); ++i) {
      const auto act = s.features.active(i);
      std::vector<int> local(s.num_states, -1);
      for (std::size_t c = 0; c < act.size(); ++c) local[act[c]] = static_cast<int>(c);
      const auto m = static_cast<Eigen::Index>(act.size());
      Matrix counts = Matrix::Zero(m, m);
      const auto& z = s.labels[i];
      for (std::size_t t = 1; t < z.size(); ++t) counts(local[z[t - 1]], local[z[t]]) += 1.0;
      Matrix& w = s.weights[i];
      for (int j = 0; j < s.num_states; ++j)
        for (int k = 0; k < s.num_states; ++k)
          if (local[j] < 0 || local[k] < 0) w(j, k) = gamma_draw(rng, prior_weight_shape(hyper_, j, k));
      for (Eigen::Index a = 0; a < m; ++a) {
        Vector alpha(m);
        double prior_total = 0.0;
        for (Eigen::Index b = 0; b < m; ++b) {
          const double shape = prior_weight_shape(hyper_, act[a], act[b]);
          alpha(b) = shape + counts(a, b);
          prior_total += shape;
        }
        const Vector pi = dirichlet(rng, alpha);
        const double scale = gamma_draw(rng, prior_total);
        for (Eigen::Index b = 0; b < m; ++b) w(act[a], act[b]) = pi(b) * scale;
      }
    }
    sync_trans_rows(s);
  }

 private:
  Matrix grow_weights(const Matrix& w, Rng& rng) const {
    const auto l = w.rows();
    Matrix out(l + 1, l + 1);
    out.topLeftCorner(l, l) = w;
    for (Eigen::Index k = 0; k <= l; ++k)
      out(l, k) = gamma_draw(rng, prior_weight_shape(hyper_, static_cast<int>(l), static_cast<int>(k)));
    for (Eigen::Index j = 0; j < l; ++j)
      out(j, l) = gamma_draw(rng, prior_weight_shape(hyper_, static_cast<int>(j), static_cast<int>(l)));
    return out;
  }

  double log_proposal(int i, const EmissionFactors& ef) const {
    const auto& blocks = blocks_[i];
    Vector v(static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t b = 0; b < blocks.size(); ++b) v(static_cast<Eigen::Index>(b)) = blocks[b].log_density(ef);
    return log_sum_exp(v) - std::log(static_cast<double>(blocks.size()));
  }

  void remove_state(PosteriorSample& s, int k) {
    s.emissions.erase(s.emissions.begin() + k);
    s.features.remove_column(k);
    --s.num_states;
    for (std::size_t i = 0; i < s.weights.size(); ++i) {
      Matrix& w = s.weights[i];
      const auto l = w.rows();
      Matrix out(l - 1, l - 1);
      for (Eigen::Index a = 0, ra = 0; a < l; ++a) {
        if (a == k) continue;
        for (Eigen::Index b = 0, rb = 0; b < l; ++b) {
          if (b == k) continue;
          out(ra, rb++) = w(a, b);
        }
        ++ra;
      }
      w = std::move(out);
      Matrix& ll = ll_[i];
      Matrix cut(ll.rows(), l - 1);
      for (Eigen::Index c = 0, rc = 0; c < l; ++c)
        if (c != k) cut.col(rc++) = ll.col(c);
      ll = std::move(cut);
      for (int& z : s.labels[i]) {
        if (z == k) z = -1;  // resampled before use
        else if (z > k) --z;
      }
    }
  }

  const Dataset& data_;
  const BpHmmHyperparams& hyper_;
  CachedMniw prior_;
  int threads_;
  std::vector<Matrix> x_;
  std::vector<Matrix> ll_;
  std::vector<std::vector<CachedMniw>> blocks_;
};

void check_fit_inputs(const Dataset& data, const BpHmmHyperparams& hyper) {
  const int n = check_dataset(data);
  check_hyperparams(hyper, n);
  for (const auto& s : data)
    if (s.length() <= hyper.ar_order)
      throw std::invalid_argument("series '" + s.id + "' has T = " + std::to_string(s.length()) +
                                  " <= AR order " + std::to_string(hyper.ar_order));
}

}  // namespace

void check_hyperparams(const BpHmmHyperparams& h, int dim) {
  if (!(h.mass > 0.0)) throw std::invalid_argument("beta-process mass must be positive");
  if (!(h.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(h.kappa >= 0.0)) throw std::invalid_argument("kappa must be nonnegative");
  if (h.ar_order < 0) throw std::invalid_argument("AR order must be nonnegative");
  check_mniw(h.emission_prior);
  if (h.emission_prior.dim() != dim)
    throw std::invalid_argument("emission prior dimension does not match the data");
  if (h.emission_prior.regressor_dim() != 1 + dim * h.ar_order)
    throw std::invalid_argument("emission prior regressor size does not match the AR order");
}

BpHmmHyperparams default_hyperparams(const Dataset& data, int ar_order) {
  const int n = check_dataset(data);
  if (ar_order < 0) throw std::invalid_argument("AR order must be nonnegative");
  BpHmmHyperparams h;
  h.ar_order = ar_order;
  h.kappa = 25.0 * h.gamma;
  Matrix cov = pooled_covariance(data);
  const double scale = std::max(cov.trace() / n, 0.0);
  // constant data has a singular pooled covariance
  cov += 1e-6 * std::max(1.0, scale) * Matrix::Identity(n, n);
  const int d = 1 + n * ar_order;
  h.emission_prior.mean = Matrix::Zero(n, d);
  h.emission_prior.mean.col(0) = pooled_mean(data);
  h.emission_prior.precision = Matrix::Identity(d, d) * std::max(scale, 1e-6);
  h.emission_prior.precision(0, 0) = 0.01;
  h.emission_prior.dof = n + 2.0;
  h.emission_prior.scale = 0.75 * cov;
  return h;
}

int FeatureMatrix::column_count(int k) const {
  int c = 0;
  for (int i = 0; i < rows_; ++i) c += bits_[i][k];
  return c;
}

int FeatureMatrix::row_count(int i) const {
  int c = 0;
  for (int k = 0; k < cols_; ++k) c += bits_[i][k];
  return c;
}

std::vector<int> FeatureMatrix::active(int i) const {
  std::vector<int> out;
  for (int k = 0; k < cols_; ++k)
    if (bits_[i][k]) out.push_back(k);
  return out;
}

int FeatureMatrix::add_column() {
  for (auto& row : bits_) row.push_back(0);
  return cols_++;
}

void FeatureMatrix::remove_column(int k) {
  for (auto& row : bits_) row.erase(row.begin() + k);
  --cols_;
}

std::vector<Violation> FeatureMatrix::validate() const {
  std::vector<Violation> out;
  for (int k = 0; k < cols_; ++k)
    if (column_count(k) == 0) out.push_back({"features", -1, "column " + std::to_string(k) + " has no users"});
  for (int i = 0; i < rows_; ++i)
    if (row_count(i) == 0) out.push_back({"features", i, "sequence uses no state"});
  return out;
}

std::vector<Violation> validate_sample(const PosteriorSample& s, const Dataset& data) {
  auto out = s.features.validate();
  if (s.features.cols() != s.num_states || static_cast<int>(s.emissions.size()) != s.num_states)
    out.push_back({"sample", -1, "state count disagrees with features/emissions"});
  if (s.labels.size() != data.size() || s.trans_rows.size() != data.size())
    out.push_back({"sample", -1, "per-sequence arrays disagree with the dataset"});
  for (std::size_t i = 0; i < s.labels.size() && i < data.size(); ++i) {
    const int seq = static_cast<int>(i);
    if (static_cast<int>(s.labels[i].size()) != data[i].length())
      out.push_back({"labels", seq, "length differs from the series"});
    for (int z : s.labels[i])
      if (z < 0 || z >= s.num_states || !s.features(seq, z)) {
        out.push_back({"labels", seq, "label " + std::to_string(z) + " is not an active state"});
        break;
      }
    if (i < s.trans_rows.size()) {
      const Matrix& p = s.trans_rows[i];
      if (p.rows() != s.features.row_count(seq) || p.cols() != p.rows()) {
        out.push_back({"trans_rows", seq, "shape does not match the active states"});
        continue;
      }
      for (Eigen::Index r = 0; r < p.rows(); ++r)
        if (std::abs(p.row(r).sum() - 1.0) > kProbTolerance || (p.row(r).array() < 0.0).any())
          out.push_back({"trans_rows", seq, "row " + std::to_string(r) + " is not stochastic"});
    }
  }
  return out;
}

double forward_log_marginal(const Matrix& loglik, const Matrix& trans, const Vector& log_init) {
  const auto t_len = loglik.rows();
  const auto m = loglik.cols();
  if (t_len == 0) return 0.0;
  Vector w = log_init + loglik.row(0).transpose();
  double mx = w.maxCoeff();
  if (!std::isfinite(mx)) return kNegInf;
  Vector alpha = (w.array() - mx).exp();
  double c = alpha.sum();
  alpha /= c;
  double total = mx + std::log(c);
  Vector pred(m);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    pred.noalias() = trans.transpose() * alpha;
    for (Eigen::Index j = 0; j < m; ++j)
      w(j) = pred(j) > 0.0 ? std::log(pred(j)) + loglik(t, j) : kNegInf;
    mx = w.maxCoeff();
    if (!std::isfinite(mx)) return kNegInf;
    alpha = (w.array() - mx).exp();
    c = alpha.sum();
    alpha /= c;
    total += mx + std::log(c);
  }
  return total;
}

std::vector<int> ffbs(const Matrix& loglik, const Matrix& trans, const Vector& log_init, Rng& rng) {
  const auto t_len = loglik.rows();
  const auto m = loglik.cols();
  std::vector<int> z(static_cast<std::size_t>(t_len), 0);
  if (t_len == 0) return z;
  if (m == 1) return z;
  Matrix alpha(t_len, m);
  Vector w = log_init + loglik.row(0).transpose();
  Vector pred(m);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    if (t > 0) {
      pred.noalias() = trans.transpose() * alpha.row(t - 1).transpose();
      for (Eigen::Index j = 0; j < m; ++j)
        w(j) = pred(j) > 0.0 ? std::log(pred(j)) + loglik(t, j) : kNegInf;
    }
    const double mx = w.maxCoeff();
    if (!std::isfinite(mx)) throw std::domain_error("ffbs: observation sequence has zero probability");
    Vector a = (w.array() - mx).exp();
    alpha.row(t) = (a / a.sum()).transpose();
  }
  z[static_cast<std::size_t>(t_len - 1)] = categorical(rng, alpha.row(t_len - 1).transpose());
  for (Eigen::Index t = t_len - 2; t >= 0; --t) {
    const int next = z[static_cast<std::size_t>(t + 1)];
    const Vector back = alpha.row(t).transpose().cwiseProduct(trans.col(next));
    z[static_cast<std::size_t>(t)] = categorical(rng, back);
  }
  return z;
}

Matrix emission_loglik(const TimeSeries& series, std::span<const GaussianEmission> emissions) {
  Matrix out(series.length(), static_cast<Eigen::Index>(emissions.size()));
  for (std::size_t k = 0; k < emissions.size(); ++k) {
    if (emissions[k].dim() != series.dim())
      throw std::invalid_argument("emission dimension does not match the series");
    out.col(static_cast<Eigen::Index>(k)) =
        loglik_column(series, regressors(series, emissions[k].ar_order()), emissions[k]);
  }
  return out;
}

std::vector<int> ffbs_labels(const TimeSeries& series, std::span<const GaussianEmission> emissions,
                             const Matrix& trans, std::uint64_t seed) {
  if (emissions.empty()) throw std::invalid_argument("ffbs_labels needs at least one emission");
  const auto m = static_cast<Eigen::Index>(emissions.size());
  if (trans.rows() != m || trans.cols() != m)
    throw std::invalid_argument("transition matrix does not match the emission count");
  Rng rng = substream(seed, 0);
  return ffbs(emission_loglik(series, emissions), trans, uniform_log_init(m), rng);
}

std::vector<GaussianEmission> update_emissions(const Dataset& data,
                                               const std::vector<std::vector<int>>& labels,
                                               int num_states, const MniwParams& prior, Rng& rng) {
  const int n = prior.dim();
  const int d = prior.regressor_dim();
  const int r = prior.ar_order();
  std::vector<RegressionStats> stats(static_cast<std::size_t>(num_states), RegressionStats(n, d));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& s = data[i];
    for (int t = r; t < s.length(); ++t) {
      const int z = labels[i][static_cast<std::size_t>(t)];
      if (z < 0 || z >= num_states) throw std::invalid_argument("label outside the state set");
      stats[static_cast<std::size_t>(z)].add(s.values.row(t).transpose(), regressor(s.values, t, r));
    }
  }
  std::vector<GaussianEmission> out;
  out.reserve(stats.size());
  for (const auto& st : stats) out.push_back(draw_mniw(rng, mniw_posterior(prior, st)));
  return out;
}

std::vector<Matrix> sample_trans_rows(const std::vector<std::vector<int>>& labels,
                                      const FeatureMatrix& features, double gamma, double kappa,
                                      Rng& rng) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto act = features.active(static_cast<int>(i));
    std::vector<int> local(static_cast<std::size_t>(features.cols()), -1);
    for (std::size_t c = 0; c < act.size(); ++c) local[act[c]] = static_cast<int>(c);
    const auto m = static_cast<Eigen::Index>(act.size());
    Matrix counts = Matrix::Zero(m, m);
    for (std::size_t t = 1; t < labels[i].size(); ++t) {
      const int a = local.at(labels[i][t - 1]);
      const int b = local.at(labels[i][t]);
      if (a < 0 || b < 0) throw std::invalid_argument("label is not an active state of its sequence");
      counts(a, b) += 1.0;
    }
    Matrix p(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      Vector alpha = counts.row(a).transpose().array() + gamma;
      alpha(a) += kappa;
      p.row(a) = dirichlet(rng, alpha).transpose();
    }
    out.push_back(std::move(p));
  }
  return out;
}

MoveStats sample_features(const Dataset& data, PosteriorSample& sample,
                          const BpHmmHyperparams& hyper, std::uint64_t seed,
                          int proposals_per_sequence, int proposal_window) {
  check_fit_inputs(data, hyper);
  auto bad = validate_sample(sample, data);
  if (!bad.empty()) throw std::invalid_argument("sample_features: " + bad.front().to_string());
  Sampler sampler(data, hyper, proposal_window, 1);
  sampler.attach(sample);
  Rng rng = substream(seed, 0);
  MoveStats stats = sampler.flips(sample, rng);
  MoveStats births, deaths;
  sampler.birth_death(sample, rng, proposals_per_sequence, births, deaths);
  stats.proposed += births.proposed + deaths.proposed;
  stats.accepted += births.accepted + deaths.accepted;
  sampler.resample_labels(sample, mix_seed(seed));
  sync_trans_rows(sample);
  return stats;
}

double log_joint(const Dataset& data, const PosteriorSample& sample, const BpHmmHyperparams& hyper) {
  std::vector<Matrix> loglik;
  loglik.reserve(data.size());
  for (const auto& s : data) loglik.push_back(emission_loglik(s, sample.emissions));
  return assemble_log_joint(sample, loglik, hyper);
}

PosteriorSample permute_states(const PosteriorSample& s, std::span<const int> perm) {
  const int l = s.num_states;
  if (static_cast<int>(perm.size()) != l) throw std::invalid_argument("permutation has the wrong size");
  std::vector<int> seen(static_cast<std::size_t>(l), 0);
  for (int p : perm) {
    if (p < 0 || p >= l || seen[p]++) throw std::invalid_argument("not a permutation");
  }
  PosteriorSample out = s;
  for (int k = 0; k < l; ++k) out.emissions[perm[k]] = s.emissions[k];
  for (int i = 0; i < s.features.rows(); ++i)
    for (int k = 0; k < l; ++k) out.features.set(i, perm[k], s.features(i, k));
  for (std::size_t i = 0; i < s.weights.size(); ++i)
    for (int a = 0; a < l; ++a)
      for (int b = 0; b < l; ++b) out.weights[i](perm[a], perm[b]) = s.weights[i](a, b);
  for (auto& z : out.labels)
    for (int& v : z) v = perm[v];
  sync_trans_rows(out);
  return out;
}

namespace {

/// Deterministic stand-in for a sample with the given labels and features:
/// posterior-mode emissions and posterior-mean transition rows.
PosteriorSample profile_sample(const Dataset& data, const PosteriorSample& base, const BpHmmHyperparams& hyper) {
  PosteriorSample out = base;
  const MniwParams& prior = hyper.emission_prior;
  const int n = prior.dim();
  const int r = prior.ar_order();
  std::vector<RegressionStats> stats(static_cast<std::size_t>(base.num_states), RegressionStats(n, prior.regressor_dim()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ts = data[i];
    for (int t = r; t < ts.length(); ++t)
      stats[static_cast<std::size_t>(base.labels[i][static_cast<std::size_t>(t)])].add(
          ts.values.row(t).transpose(), regressor(ts.values, t, r));
  }
  for (int k = 0; k < base.num_states; ++k) {
    const MniwParams post = mniw_posterior(prior, stats[static_cast<std::size_t>(k)]);
    out.emissions[static_cast<std::size_t>(k)] =
        emission_from_coefficients(post.mean, clamp_spd(post.scale / (post.dof + n + 1.0)));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    Matrix& w = out.weights[i];
    for (int j = 0; j < base.num_states; ++j)
      for (int k = 0; k < base.num_states; ++k) w(j, k) = prior_weight_shape(hyper, j, k);
    const auto& z = base.labels[i];
    for (std::size_t t = 1; t < z.size(); ++t) w(z[t - 1], z[t]) += 1.0;
  }
  sync_trans_rows(out);
  out.log_joint = log_joint(data, out, hyper);
  return out;
}

/// State b folded into state a (a < b): labels, features and weights.
PosteriorSample fold_state(const PosteriorSample& s, int a, int b) {
  PosteriorSample out = s;
  for (auto& z : out.labels)
    for (int& v : z) {
      if (v == b) v = a;
      else if (v > b) --v;
    }
  for (int i = 0; i < out.features.rows(); ++i)
    if (s.features(i, b)) out.features.set(i, a, true);
  out.features.remove_column(b);
  out.emissions.erase(out.emissions.begin() + b);
  for (auto& w : out.weights) {
    const auto l = w.rows();
    Matrix cut(l - 1, l - 1);
    for (Eigen::Index x = 0, rx = 0; x < l; ++x) {
      if (x == b) continue;
      for (Eigen::Index y = 0, ry = 0; y < l; ++y)
        if (y != b) cut(rx, ry++) = w(x, y);
      ++rx;
    }
    w = std::move(cut);
  }
  --out.num_states;
  return out;
}

}  // namespace

PosteriorSample merge_redundant_states(const Dataset& data, const PosteriorSample& sample,
                                       const BpHmmHyperparams& hyper) {
  check_fit_inputs(data, hyper);
  PosteriorSample best = profile_sample(data, sample, hyper);
  bool merged = false;
  for (;;) {
    std::optional<PosteriorSample> winner;
    for (int a = 0; a < best.num_states; ++a)
      for (int b = a + 1; b < best.num_states; ++b) {
        PosteriorSample cand = profile_sample(data, fold_state(best, a, b), hyper);
        if (cand.log_joint > (winner ? winner->log_joint : best.log_joint)) winner = std::move(cand);
      }
    if (!winner) break;
    best = std::move(*winner);
    merged = true;
  }
  if (!merged) return sample;
  best.sweep = sample.sweep;
  return best;
}

FitResult fit_bphmm(const Dataset& data, const BpHmmHyperparams& hyper, const FitConfig& config) {
  check_fit_inputs(data, hyper);
  const int burn_in = config.burn_in < 0 ? config.sweeps / 2 : config.burn_in;
  if (!(config.sweeps > burn_in)) throw std::invalid_argument("sweeps must exceed burn_in");
  if (config.thin < 1) throw std::invalid_argument("thin must be >= 1");

  Sampler sampler(data, hyper, config.proposal_window, config.threads);
  FitResult result;
  PosteriorSample s;
  {
    Rng init_rng = substream(config.seed, 0xFFFFFFFFULL);
    sampler.initialize(s, init_rng);
  }
  bool have_map = false;
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    Rng rng = substream(config.seed, static_cast<std::uint64_t>(sweep));
    const MoveStats f = sampler.flips(s, rng);
    result.flips.proposed += f.proposed;
    result.flips.accepted += f.accepted;
    sampler.birth_death(s, rng, config.birth_death_proposals_per_sweep, result.births, result.deaths);
    sampler.resample_labels(s, mix_seed(config.seed ^ mix_seed(static_cast<std::uint64_t>(sweep))));
    sampler.resample_emissions(s, rng);
    sampler.resample_weights(s, rng);
    s.sweep = sweep;
    s.log_joint = assemble_log_joint(s, sampler.loglik(), hyper);
    if (config.check_log_joint) {
      const double fresh = log_joint(data, s, hyper);
      if (std::abs(fresh - s.log_joint) > 1e-6 * std::max(1.0, std::abs(fresh))) {
        std::ostringstream os;
        os.precision(17);
        os << "cached log joint " << s.log_joint << " differs from recomputed " << fresh
           << " at sweep " << sweep;
        throw std::logic_error(os.str());
      }
      auto bad = validate_sample(s, data);
      if (!bad.empty()) throw std::logic_error("sweep " + std::to_string(sweep) + ": " + bad.front().to_string());
    }
    result.num_states_trace.push_back(s.num_states);
    result.log_joint_trace.push_back(s.log_joint);
    if (sweep >= burn_in && (sweep - burn_in) % config.thin == 0) {
      result.samples.push_back(s);
      if (!have_map || s.log_joint > result.map.log_joint) {
        result.map = s;
        have_map = true;
      }
    }
  }
  if (config.merge_map) result.map = merge_redundant_states(data, result.map, hyper);
  return result;
}

}  // namespace plearn
