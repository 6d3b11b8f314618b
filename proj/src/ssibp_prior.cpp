#include "glnem/ssibp_prior.hpp"

#include <cmath>
#include <sstream>

#include "glnem/errors.hpp"
#include "glnem/special.hpp"

namespace glnem {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 - exp(x)) for x <= 0.
double log1m_exp(double x) {
  if (x >= 0.0) return -INFINITY;
  return x > -0.693147 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

}  // namespace

HyperParams HyperParams::defaults(int n, int d) {
  HyperParams h;
  h.d = d;
  h.a = d > 0 ? 1.0 / d : 1.0;  // unused without latent dimensions
  h.kappa = std::pow(static_cast<double>(d), 1.1);
  h.b_slab = std::sqrt(n / 2.0);
  h.v0 = 0.0;
  h.sigma_beta = 10.0;
  h.lambda_variance = n;
  return h;
}

double HyperParams::delta() const { return std::log(kappa) / std::log(static_cast<double>(d)) - 1.0; }

void HyperParams::validate() const {
  std::ostringstream msg;
  if (d < 0) msg << "truncation d must be non-negative; ";
  if (!(a > 0.0)) msg << "a must be positive; ";
  if (!(kappa >= 0.0)) msg << "kappa must be non-negative; ";
  if (!(b_slab > 0.0)) msg << "b must be positive; ";
  if (v0 != 0.0) msg << "only v0 = 0 (point-mass spike) is supported; ";
  if (!(sigma_beta > 0.0)) msg << "sigma_beta must be positive; ";
  if (!(lambda_variance > 0.0)) msg << "lambda_variance must be positive; ";
  if (!msg.str().empty()) throw ConfigError("hyperparameters: " + msg.str());
}

int LambdaState::active() const {
  int count = 0;
  for (int v : z) count += v;
  return count;
}

Eigen::VectorXd slab_probabilities(const Eigen::VectorXd& nu) {
  Eigen::VectorXd theta(nu.size());
  double acc = 1.0;
  for (Eigen::Index h = 0; h < nu.size(); ++h) {
    acc *= nu[h];
    theta[h] = acc;
  }
  return theta;
}

LambdaState sample_prior(const HyperParams& hyper, Rng& rng) {
  const int d = hyper.d;
  LambdaState s;
  s.nu.resize(d);
  for (int h = 0; h < d; ++h) s.nu[h] = beta_draw(rng, hyper.a, h == 0 ? hyper.kappa + 1.0 : 1.0);
  s.theta = slab_probabilities(s.nu);
  s.z.resize(d);
  s.sigma2.resize(d);
  s.lambda_tilde.resize(d);
  s.lambda.resize(d);
  const double mean_sigma2 = 2.0 * hyper.b_slab * hyper.b_slab;
  for (int h = 0; h < d; ++h) {
    s.z[h] = uniform01(rng) < s.theta[h] ? 1 : 0;
    s.sigma2[h] = std::exponential_distribution<double>(1.0 / mean_sigma2)(rng);
    s.lambda_tilde[h] = standard_normal(rng);
    s.lambda[h] = s.z[h] ? std::sqrt(s.sigma2[h]) * s.lambda_tilde[h] : 0.0;
  }
  return s;
}

PriorTerms log_prior_unconstrained(const ParamLayout& layout, const Eigen::VectorXd& q,
                                   std::span<const int> z, const HyperParams& hyper,
                                   Eigen::VectorXd* grad) {
  if (!q.allFinite()) {
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      if (!std::isfinite(q[k])) {
        throw NumericError("log prior: non-finite coordinate " + layout.coordinate_name(static_cast<int>(k)));
      }
    }
  }
  PriorTerms t;
  const int d = layout.dims();

  const auto beta = layout.beta(q);
  const double inv_sb2 = 1.0 / (hyper.sigma_beta * hyper.sigma_beta);
  t.beta = -0.5 * beta.squaredNorm() * inv_sb2;
  const auto b = layout.b(q);
  t.latent = -0.5 * b.squaredNorm();
  const auto lt = layout.lambda_tilde(q);
  t.lambda_tilde = -0.5 * lt.squaredNorm();
  if (grad) {
    layout.beta(*grad) -= beta * inv_sb2;
    layout.b(*grad) -= b;
    layout.lambda_tilde(*grad) -= lt;
  }

  if (layout.has_stick_block()) {
    const auto log_sigma = layout.log_sigma(q);
    const auto logit_nu = layout.logit_nu(q);
    const double inv_2b2 = 0.5 / (hyper.b_slab * hyper.b_slab);
    double log_theta = 0.0;
    // coeff[h] = d/d log(theta_h) of the indicator term.
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(d);
    for (int h = 0; h < d; ++h) {
      const double es = log_sigma[h];
      const double sigma2 = std::exp(2.0 * es);
      // p(sigma) = 2 sigma p_{sigma^2}(sigma^2) contributes one log sigma.
      t.scale_mixture += -sigma2 * inv_2b2 + es;
      t.scale_jacobian += es;

      const double en = logit_nu[h];
      const double log_nu = log_logistic(en);
      const double log_1m_nu = log1m_logistic(en);
      if (h == 0) t.sticks += hyper.kappa * log_1m_nu;
      t.sticks += (hyper.a - 1.0) * log_nu;
      t.stick_jacobian += log_nu + log_1m_nu;

      log_theta += log_nu;
      const double log_1m_theta = log1m_exp(log_theta);
      if (z[h]) {
        t.indicators += log_theta;
        coeff[h] = 1.0;
      } else {
        t.indicators += log_1m_theta;
        coeff[h] = -std::exp(log_theta - log_1m_theta);
      }
    }
    if (grad) {
      auto g_sigma = layout.log_sigma(*grad);
      auto g_nu = layout.logit_nu(*grad);
      double tail = 0.0;  // sum_{h >= l} coeff[h]
      for (int h = d - 1; h >= 0; --h) {
        tail += coeff[h];
        g_nu[h] += tail * (1.0 - logistic(logit_nu[h]));
      }
      for (int h = 0; h < d; ++h) {
        g_sigma[h] += -2.0 * std::exp(2.0 * log_sigma[h]) * inv_2b2 + 2.0;
        const double nu = logistic(logit_nu[h]);
        if (h == 0) g_nu[h] += -hyper.kappa * nu;
        g_nu[h] += (hyper.a - 1.0) * (1.0 - nu) + (1.0 - 2.0 * nu);
      }
    }
  }

  if (layout.samples_phi()) {
    const double e = q[layout.log_phi_offset()];
    t.dispersion = -softplus(2.0 * e) + e;
    if (grad) (*grad)[layout.log_phi_offset()] += 1.0 - 2.0 * logistic(2.0 * e);
  }
  if (layout.samples_power()) {
    const double e = q[layout.logit_power_offset()];
    t.power = log_logistic(e) + log1m_logistic(e);
    if (grad) (*grad)[layout.logit_power_offset()] += 1.0 - 2.0 * logistic(e);
  }
  return t;
}

}  // namespace glnem
