#include "glnem/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glnem/errors.hpp"
#include "glnem/manifold.hpp"

namespace glnem {

SimConfig SimConfig::defaults(FamilyKind family, int n, int d0) {
  SimConfig cfg;
  cfg.n = n;
  cfg.d0 = d0;
  cfg.family.kind = family;
  cfg.link = canonical_link(family);
  cfg.beta0.resize(5);
  cfg.beta0 << (family == FamilyKind::Gaussian ? 1.0 : -1.0), -0.5, 0.5, 0.0, 0.0;
  switch (family) {
    case FamilyKind::Bernoulli:
      cfg.c = 1.0;
      break;
    case FamilyKind::Gaussian:
      cfg.c = 1.0;
      cfg.aux.phi = 9.0;
      break;
    case FamilyKind::Poisson:
      cfg.c = 0.5;
      break;
    case FamilyKind::NegativeBinomial:
      cfg.c = 0.5;
      cfg.aux.phi = 0.5;
      break;
    case FamilyKind::Tweedie:
      cfg.c = 2.0;
      cfg.aux.phi = 10.0;
      cfg.aux.power = 1.6;
      break;
  }
  return cfg;
}

void SimConfig::validate() const {
  if (d0 < 1) throw ConfigError("simulate: d0 must be at least 1");
  if (n < d0 + 1) throw ConfigError("simulate: n must exceed d0");
  if (beta0.size() < 1) throw ConfigError("simulate: beta0 needs at least the intercept");
  if (!link_compatible(family.kind, link)) throw ConfigError("simulate: incompatible family and link");
  if (family.has_dispersion() && !(aux.phi > 0.0)) throw ConfigError("simulate: phi must be positive");
  if (family.kind == FamilyKind::Tweedie && !(aux.power >= kMinPower && aux.power <= kMaxPower)) {
    throw ConfigError("simulate: power must lie in [1.01, 1.99]");
  }
  if (zero_inflation_pi && !(*zero_inflation_pi >= 0.0 && *zero_inflation_pi <= 1.0)) {
    throw ConfigError("simulate: zero-inflation probability must lie in [0, 1]");
  }
}

Eigen::MatrixXd SimTruth::latent_matrix() const { return u0 * lambda0.asDiagonal() * u0.transpose(); }

Eigen::MatrixXd SimTruth::linear_predictor(const NetworkData& data) const {
  Eigen::MatrixXd eta = latent_matrix();
  for (int k = 0; k < data.covariates(); ++k) eta += beta0[k] * data.x[k];
  return eta;
}

namespace {

Simulated generate(const SimConfig& cfg, std::optional<double> pi, Rng& rng) {
  cfg.validate();
  const int n = cfg.n;
  const int d0 = cfg.d0;
  const int p = static_cast<int>(cfg.beta0.size());

  // Latent positions from a two-component mixture at +-(1/sqrt(d0)) 1.
  Eigen::MatrixXd b(n, d0);
  const double loc = 1.0 / std::sqrt(static_cast<double>(d0));
  for (int i = 0; i < n; ++i) {
    const double sgn = uniform01(rng) < 0.5 ? 1.0 : -1.0;
    for (int h = 0; h < d0; ++h) b(i, h) = sgn * loc + 0.1 * standard_normal(rng);
  }
  Simulated out;
  SimTruth& truth = out.truth;
  truth.u0 = centered_orthogonalize(b);
  truth.lambda0.resize(d0);
  for (int h = 0; h < d0; ++h) {
    const double sgn = uniform01(rng) < 0.5 ? 1.0 : -1.0;
    truth.lambda0[h] = sgn * cfg.c * n + std::sqrt(static_cast<double>(n)) * standard_normal(rng);
  }
  truth.beta0 = cfg.beta0;
  truth.d0 = d0;
  truth.family = cfg.family;
  truth.link = cfg.link;
  truth.aux = cfg.aux;
  truth.zero_inflation_pi = pi;

  NetworkData& data = out.data;
  data.diagonal_observed = cfg.diagonal_observed;
  data.x.assign(p, Eigen::MatrixXd::Zero(n, n));
  data.x[0].setOnes();
  for (int k = 1; k < p; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double v = 2.0 * uniform01(rng) - 1.0;
        data.x[k](i, j) = v;
        data.x[k](j, i) = v;
      }
    }
  }

  const Eigen::MatrixXd eta = truth.linear_predictor(data);
  data.y = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // The inflation coin is drawn for every dyad so that pi = 0 reproduces
      // the plain generator under the same seed.
      const double coin = uniform01(rng);
      double y = sample(cfg.family, inverse_link(cfg.link, eta(i, j)), cfg.aux, rng);
      if (pi && coin < *pi) y = 0.0;
      data.y(i, j) = y;
      data.y(j, i) = y;
    }
  }
  return out;
}

}  // namespace

Simulated generate_glnem(const SimConfig& cfg, Rng& rng) { return generate(cfg, cfg.zero_inflation_pi, rng); }

Simulated generate_zip(const SimConfig& cfg, double pi, Rng& rng) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError("generate_zip: pi must lie in [0, 1]");
  SimConfig c = cfg;
  c.family.kind = FamilyKind::Poisson;
  if (!link_compatible(FamilyKind::Poisson, c.link)) c.link = LinkKind::Log;
  return generate(c, pi, rng);
}

double trace_correlation(const Eigen::MatrixXd& u0, const Eigen::MatrixXd& u_hat) {
  if (u0.rows() != u_hat.rows() || u0.cols() != u_hat.cols() || u0.cols() == 0) {
    throw ConfigError("trace_correlation: dimension mismatch");
  }
  return (u0.transpose() * u_hat).trace() / static_cast<double>(u0.cols());
}

double relative_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ConfigError("relative_error: dimension mismatch");
  }
  const double denom = truth.squaredNorm();
  if (denom == 0.0) throw ConfigError("relative_error: truth has zero norm");
  return (estimate - truth).squaredNorm() / denom;
}

RecoveryMetrics recovery_metrics(const AlignedDraws& aligned, const SimTruth& truth) {
  const DrawStore& ds = aligned.draws;
  if (ds.draws.empty()) throw ConfigError("recovery_metrics: no draws");
  const int d = static_cast<int>(ds.draws.front().lambda.size());
  const int n = ds.nodes;
  const double s = static_cast<double>(ds.size());
  RecoveryMetrics out;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(ds.draws.front().beta.size());
  Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(n, n);
  for (const Draw& dr : ds.draws) {
    beta += dr.beta;
    if (d > 0) latent.noalias() += dr.u * dr.lambda.asDiagonal() * dr.u.transpose();
  }
  beta /= s;
  latent /= s;
  out.beta_error = relative_error(truth.beta0, beta);
  out.latent_error = relative_error(truth.latent_matrix(), latent);

  // Top-d0 columns by inclusion probability, lowest index on ties.
  const Eigen::VectorXd incl = inclusion_probabilities(ds);
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return incl[a] > incl[b]; });
  const int k = std::min(truth.d0, d);
  if (k < truth.d0) {
    out.trace_correlation = 0.0;
    out.lambda_error = 1.0;
  }
  if (k == 0) return out;

  std::vector<Eigen::MatrixXd> us;
  us.reserve(ds.draws.size());
  Eigen::VectorXd lambda_mean = Eigen::VectorXd::Zero(d);
  for (const Draw& dr : ds.draws) {
    us.push_back(dr.u);
    lambda_mean += dr.lambda;
  }
  lambda_mean /= s;
  const Eigen::MatrixXd u_mean = frechet_mean(us);
  Eigen::MatrixXd u_top(n, k);
  Eigen::VectorXd lambda_top(k);
  for (int m = 0; m < k; ++m) {
    u_top.col(m) = u_mean.col(order[m]);
    lambda_top[m] = lambda_mean[order[m]];
  }
  if (k < truth.d0) return out;

  // Signed permutation onto the truth, then score.
  const Alignment a = align_draw(u_top, lambda_top, truth.u0);
  out.trace_correlation = trace_correlation(truth.u0, a.u);
  out.lambda_error = relative_error(truth.lambda0, a.lambda);
  return out;
}

}  // namespace glnem
