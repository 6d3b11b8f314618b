#include "glnem/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glnem/errors.hpp"
#include "glnem/manifold.hpp"
#include "glnem/parallel.hpp"
#include "glnem/postprocess.hpp"

namespace glnem {

int parameter_count(int n, int d, int p) { return n * d + d + p; }

double aic(double loglik_at_estimate, int n, int d, int p) {
  return -2.0 * loglik_at_estimate + 2.0 * parameter_count(n, d, p);
}

double bic(double loglik_at_estimate, int n, int d, int p) {
  const double pairs = 0.5 * static_cast<double>(n) * (n - 1);
  return -2.0 * loglik_at_estimate + parameter_count(n, d, p) * std::log(pairs);
}

double dic(std::span<const double> draw_logliks, double loglik_at_estimate) {
  if (draw_logliks.empty()) throw ConfigError("dic: no draws");
  double mean = 0.0;
  for (double v : draw_logliks) mean += v;
  mean /= static_cast<double>(draw_logliks.size());
  const double p_dic = 2.0 * (loglik_at_estimate - mean);
  return -2.0 * loglik_at_estimate + 2.0 * p_dic;
}

double dic(const DrawStore& draws, double loglik_at_estimate) {
  std::vector<double> ll;
  ll.reserve(draws.draws.size());
  for (const Draw& d : draws.draws) ll.push_back(d.loglik);
  return dic(ll, loglik_at_estimate);
}

WaicAccumulator::WaicAccumulator(int dyads)
    : max_(Eigen::VectorXd::Constant(dyads, -std::numeric_limits<double>::infinity())),
      scaled_sum_(Eigen::VectorXd::Zero(dyads)),
      mean_(Eigen::VectorXd::Zero(dyads)),
      m2_(Eigen::VectorXd::Zero(dyads)) {}

void WaicAccumulator::add(const Eigen::VectorXd& pointwise) {
  if (pointwise.size() != max_.size()) throw ConfigError("waic: pointwise vector has the wrong length");
  ++count_;
  for (Eigen::Index k = 0; k < pointwise.size(); ++k) {
    const double l = pointwise[k];
    if (l > max_[k]) {
      scaled_sum_[k] = scaled_sum_[k] * std::exp(max_[k] - l) + 1.0;
      max_[k] = l;
    } else {
      scaled_sum_[k] += std::exp(l - max_[k]);
    }
    const double delta = l - mean_[k];
    mean_[k] += delta / count_;
    m2_[k] += delta * (l - mean_[k]);
  }
}

double WaicAccumulator::lppd() const {
  double total = 0.0;
  const double log_s = std::log(static_cast<double>(count_));
  for (Eigen::Index k = 0; k < max_.size(); ++k) total += max_[k] + std::log(scaled_sum_[k]) - log_s;
  return total;
}

double WaicAccumulator::p_waic() const {
  if (count_ < 2) throw ConfigError("waic: needs at least two draws");
  return m2_.sum() / (count_ - 1);
}

double WaicAccumulator::value() const { return -2.0 * lppd() + 2.0 * p_waic(); }

double waic(const Eigen::MatrixXd& pointwise) {
  WaicAccumulator acc(static_cast<int>(pointwise.cols()));
  for (Eigen::Index s = 0; s < pointwise.rows(); ++s) acc.add(pointwise.row(s).transpose());
  return acc.value();
}

double waic(const DrawStore& draws) {
  if (draws.draws.empty()) throw ConfigError("waic: no draws");
  WaicAccumulator acc(static_cast<int>(draws.draws.front().pointwise.size()));
  for (const Draw& d : draws.draws) acc.add(d.pointwise);
  return acc.value();
}

ConstrainedParams point_estimate(const DrawStore& draws) {
  if (draws.draws.empty()) throw ConfigError("point_estimate: no draws");
  const int d = static_cast<int>(draws.draws.front().lambda.size());
  const double s = static_cast<double>(draws.size());
  ConstrainedParams out;
  out.beta = Eigen::VectorXd::Zero(draws.draws.front().beta.size());
  out.lambda = Eigen::VectorXd::Zero(d);
  double phi = 0.0;
  double power = 0.0;
  std::vector<Eigen::MatrixXd> us;
  if (d > 0) {
    const AlignedDraws aligned = align_draws(draws);
    us.reserve(draws.draws.size());
    for (const Draw& dr : aligned.draws.draws) {
      out.lambda += dr.lambda;
      us.push_back(dr.u);
    }
    out.u = frechet_mean(us);
  } else {
    out.u.resize(draws.nodes, 0);
  }
  for (const Draw& dr : draws.draws) {
    out.beta += dr.beta;
    phi += dr.phi;
    power += dr.power;
  }
  out.beta /= s;
  out.lambda /= s;
  out.aux.phi = phi / s;
  out.aux.power = power / s;
  return out;
}

std::vector<std::vector<Dyad>> partition_dyads(std::span<const Dyad> dyads, int k, Rng& rng) {
  if (k < 2) throw ConfigError("cross-validation needs at least two folds");
  if (static_cast<int>(dyads.size()) < k) throw ConfigError("fewer observed dyads than folds; a fold would be empty");
  std::vector<int> idx(dyads.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<Dyad>> folds(k);
  for (std::size_t m = 0; m < idx.size(); ++m) folds[m % k].push_back(dyads[idx[m]]);
  for (auto& f : folds) {
    std::sort(f.begin(), f.end(), [](const Dyad& a, const Dyad& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  }
  return folds;
}

double heldout_log_predictive(const DrawStore& draws, const NetworkData& data, std::span<const Dyad> held_out) {
  if (draws.draws.empty()) throw ConfigError("heldout_log_predictive: no draws");
  if (held_out.empty()) throw ConfigError("heldout_log_predictive: fold has no held-out dyads");
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(held_out.size()));
  AuxParams aux{0.0, 0.0};
  for (const Draw& dr : draws.draws) {
    for (std::size_t m = 0; m < held_out.size(); ++m) {
      const Dyad dy = held_out[m];
      double e = 0.0;
      for (int c = 0; c < data.covariates(); ++c) e += data.x[c](dy.i, dy.j) * dr.beta[c];
      for (Eigen::Index h = 0; h < dr.lambda.size(); ++h) e += dr.lambda[h] * dr.u(dy.i, h) * dr.u(dy.j, h);
      eta[static_cast<Eigen::Index>(m)] += e;
    }
    aux.phi += dr.phi;
    aux.power += dr.power;
  }
  const double s = static_cast<double>(draws.size());
  eta /= s;
  aux.phi /= s;
  aux.power /= s;
  double total = 0.0;
  for (std::size_t m = 0; m < held_out.size(); ++m) {
    const Dyad dy = held_out[m];
    total += log_density_eta(draws.spec.family.kind, draws.spec.link, data.y(dy.i, dy.j),
                             eta[static_cast<Eigen::Index>(m)], aux, false)
                 .value;
  }
  return total;
}

int one_se_rule(std::span<const double> scores, std::span<const double> se) {
  if (scores.empty() || scores.size() != se.size()) throw ConfigError("one_se_rule: mismatched inputs");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  const double threshold = scores[best] - se[best];
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] >= threshold) return static_cast<int>(k);
  }
  return static_cast<int>(best);
}

DrawStore fit_fixed_dimension(const NetworkData& data, const ModelSpec& spec, HyperParams hyper, int d,
                              const SamplerConfig& config) {
  ModelSpec fixed = spec;
  fixed.lambda_prior = LambdaPrior::FixedGaussian;
  hyper.d = d;
  const GlnemModel model(data, fixed, hyper);
  return run_chains(model, config);
}

CriterionRow information_criteria(const DrawStore& draws, const NetworkData& data) {
  const GlnemModel model(data, draws.spec, draws.hyper);
  const ConstrainedParams est = point_estimate(draws);
  CriterionRow row;
  row.d = draws.hyper.d;
  row.loglik_at_estimate = model.log_likelihood(est);
  const int n = data.nodes();
  const int p = data.covariates();
  row.aic = aic(row.loglik_at_estimate, n, row.d, p);
  row.bic = bic(row.loglik_at_estimate, n, row.d, p);
  row.dic = dic(draws, row.loglik_at_estimate);
  row.waic = waic(draws);
  return row;
}

namespace {

SamplerConfig fold_config(SamplerConfig config, int fold) {
  config.seed += 7919ULL * static_cast<std::uint64_t>(fold + 1);
  config.store_pointwise = false;
  config.threads = 1;
  return config;
}

CvResult collect(std::vector<double> scores) {
  CvResult out;
  const double k = static_cast<double>(scores.size());
  out.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : scores) ss += (v - out.mean) * (v - out.mean);
  out.se = scores.size() > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
  out.fold_scores = std::move(scores);
  return out;
}

int argmin_first(const std::vector<CriterionRow>& rows, double CriterionRow::*field) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(rows.size()); ++k) {
    if (rows[k].*field < rows[best].*field) best = k;
  }
  return rows[best].d;
}

}  // namespace

CvResult kfold_cv(const NetworkData& data, const ModelSpec& spec, const HyperParams& hyper, int d, int folds,
                  const SamplerConfig& config, std::uint64_t cv_seed, int threads) {
  Rng rng = make_rng(cv_seed, 0x5eed);
  const std::vector<Dyad> dyads = observed_off_diagonal(data);
  const auto parts = partition_dyads(dyads, folds, rng);
  std::vector<double> scores(folds);
  parallel_for(folds, threads, [&](int f) {
    const NetworkData train = hold_out(data, parts[f]);
    const DrawStore draws = fit_fixed_dimension(train, spec, hyper, d, fold_config(config, f));
    scores[f] = heldout_log_predictive(draws, data, parts[f]);
  });
  return collect(std::move(scores));
}

CriterionReport select_dimension(const NetworkData& data, const ModelSpec& spec, const HyperParams& hyper,
                                 const SamplerConfig& config, const SelectionOptions& options) {
  if (options.d_grid.empty()) throw ConfigError("select: empty dimension grid");
  std::vector<int> d_grid = options.d_grid;
  std::sort(d_grid.begin(), d_grid.end());
  d_grid.erase(std::unique(d_grid.begin(), d_grid.end()), d_grid.end());
  if (d_grid.front() < 0) throw ConfigError("select: dimensions must be non-negative");
  const int grid = static_cast<int>(d_grid.size());
  const int folds = options.folds;
  if (folds == 1) throw ConfigError("cross-validation needs at least two folds");
  const int threads = options.threads > 0 ? options.threads : default_thread_count();

  std::vector<std::vector<Dyad>> parts;
  if (folds > 0) {
    Rng rng = make_rng(options.cv_seed, 0x5eed);
    parts = partition_dyads(observed_off_diagonal(data), folds, rng);
  }

  CriterionReport report;
  report.rows.resize(grid);
  std::vector<std::vector<double>> scores(grid, std::vector<double>(std::max(folds, 0)));
  const int jobs_per_d = 1 + std::max(folds, 0);
  SamplerConfig full = config;
  full.threads = 1;
  parallel_for(grid * jobs_per_d, threads, [&](int job) {
    const int g = job / jobs_per_d;
    const int f = job % jobs_per_d - 1;
    const int d = d_grid[g];
    if (f < 0) {
      const DrawStore draws = fit_fixed_dimension(data, spec, hyper, d, full);
      report.rows[g] = information_criteria(draws, data);
    } else {
      const NetworkData train = hold_out(data, parts[f]);
      const DrawStore draws = fit_fixed_dimension(train, spec, hyper, d, fold_config(config, f));
      scores[g][f] = heldout_log_predictive(draws, data, parts[f]);
    }
  });

  report.aic_choice = argmin_first(report.rows, &CriterionRow::aic);
  report.bic_choice = argmin_first(report.rows, &CriterionRow::bic);
  report.dic_choice = argmin_first(report.rows, &CriterionRow::dic);
  report.waic_choice = argmin_first(report.rows, &CriterionRow::waic);
  if (folds > 0) {
    report.has_cv = true;
    std::vector<double> means(grid), ses(grid);
    for (int g = 0; g < grid; ++g) {
      const CvResult cv = collect(scores[g]);
      report.rows[g].cv_mean = cv.mean;
      report.rows[g].cv_se = cv.se;
      means[g] = cv.mean;
      ses[g] = cv.se;
    }
    int best = 0;
    for (int g = 1; g < grid; ++g) {
      if (means[g] > means[best]) best = g;
    }
    report.cv_best = d_grid[best];
    report.cv_one_se = d_grid[one_se_rule(means, ses)];
  }
  return report;
}

}  // namespace glnem
