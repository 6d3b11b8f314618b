#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glnem/model.hpp"
#include "glnem/network.hpp"
#include "glnem/sampler.hpp"

namespace glnem {

// nd + d + p.
int parameter_count(int n, int d, int p);
double aic(double loglik_at_estimate, int n, int d, int p);
// Penalty uses the number of off-diagonal dyads, log(n(n-1)/2).
double bic(double loglik_at_estimate, int n, int d, int p);
double dic(std::span<const double> draw_logliks, double loglik_at_estimate);
double dic(const DrawStore& draws, double loglik_at_estimate);

// Per-dyad running log-mean-exp and variance of the pointwise
// log-likelihood over draws.
class WaicAccumulator {
 public:
  explicit WaicAccumulator(int dyads = 0);
  void add(const Eigen::VectorXd& pointwise);
  int draws() const { return count_; }
  // -2 * lppd + 2 * p_waic; needs at least two draws.
  double value() const;
  double lppd() const;
  double p_waic() const;

 private:
  int count_ = 0;
  Eigen::VectorXd max_;
  Eigen::VectorXd scaled_sum_;  // sum exp(l - max)
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

// WAIC from an S x D pointwise log-likelihood matrix.
double waic(const Eigen::MatrixXd& pointwise);
double waic(const DrawStore& draws);

// Posterior means of beta, lambda and the auxiliary parameters, with U the
// Frechet mean of the draws aligned to the MAP reference.
ConstrainedParams point_estimate(const DrawStore& draws);

// Non-overlapping random partition of the dyads into k folds whose sizes
// differ by at most one.
std::vector<std::vector<Dyad>> partition_dyads(std::span<const Dyad> dyads, int k, Rng& rng);

// Sum over the held-out dyads of the log density at the posterior mean of
// the linear predictor and of the auxiliary parameters.
double heldout_log_predictive(const DrawStore& draws, const NetworkData& data, std::span<const Dyad> held_out);

// Smallest index whose score is within one standard error of the best.
int one_se_rule(std::span<const double> scores, std::span<const double> se);

struct SelectionOptions {
  std::vector<int> d_grid{1, 2, 3, 4, 5, 6, 7, 8};
  int folds = 0;  // 0 skips cross-validation
  std::uint64_t cv_seed = 1;
  int threads = 0;
};

struct CriterionRow {
  int d = 0;
  double loglik_at_estimate = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double dic = 0.0;
  double waic = 0.0;
  double cv_mean = 0.0;
  double cv_se = 0.0;
};

struct CriterionReport {
  std::vector<CriterionRow> rows;
  bool has_cv = false;
  int aic_choice = 0;
  int bic_choice = 0;
  int dic_choice = 0;
  int waic_choice = 0;
  int cv_best = 0;
  int cv_one_se = 0;
};

// Fits a fixed-dimension model with lambda_h ~ N(0, lambda_variance) at
// hyper with truncation d.
DrawStore fit_fixed_dimension(const NetworkData& data, const ModelSpec& spec, HyperParams hyper, int d,
                              const SamplerConfig& config);

// Information criteria from a fixed-dimension fit.
CriterionRow information_criteria(const DrawStore& draws, const NetworkData& data);

struct CvResult {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> fold_scores;
};
CvResult kfold_cv(const NetworkData& data, const ModelSpec& spec, const HyperParams& hyper, int d, int folds,
                  const SamplerConfig& config, std::uint64_t cv_seed, int threads = 1);

CriterionReport select_dimension(const NetworkData& data, const ModelSpec& spec, const HyperParams& hyper,
                                 const SamplerConfig& config, const SelectionOptions& options);

}  // namespace glnem
