#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glnem/parameters.hpp"
#include "glnem/random.hpp"

namespace glnem {

struct HyperParams {
  int d = 8;                 // truncation level
  double a = 1.0 / 8.0;      // IBP concentration
  double kappa = 9.849;      // first-stick penalty, nu_1 ~ Beta(a, kappa + 1)
  double b_slab = 1.0;       // Laplace slab scale
  double v0 = 0.0;           // spike-to-slab scale ratio; only the point-mass spike is supported
  double sigma_beta = 10.0;  // beta_k ~ N(0, sigma_beta^2)
  double lambda_variance = 1.0;  // lambda_h ~ N(0, lambda_variance) under LambdaPrior::FixedGaussian

  // a = 1/d, kappa = d^1.1, b = sqrt(n/2), sigma_beta = 10, lambda_variance = n.
  static HyperParams defaults(int n, int d = 8);

  // delta in kappa = d^{1 + delta}.
  double delta() const;
  // Throws ConfigError on invalid settings.
  void validate() const;
};

struct LambdaState {
  Eigen::VectorXd nu;
  Eigen::VectorXd theta;
  std::vector<int> z;
  Eigen::VectorXd sigma2;
  Eigen::VectorXd lambda_tilde;
  Eigen::VectorXd lambda;  // z_h * sigma_h * lambda_tilde_h

  int active() const;
};

// Cumulative products theta_h = nu_1 * ... * nu_h.
Eigen::VectorXd slab_probabilities(const Eigen::VectorXd& nu);

LambdaState sample_prior(const HyperParams& hyper, Rng& rng);

// Additive pieces of the log prior on the unconstrained scale, each up to a
// constant. Indicators z are conditioned on, not sampled.
struct PriorTerms {
  double beta = 0.0;
  double latent = 0.0;          // -tr(B'B)/2
  double lambda_tilde = 0.0;
  double scale_mixture = 0.0;   // sigma^2 ~ Exp(1 / (2 b^2)), expressed in sigma
  double scale_jacobian = 0.0;  // sum log sigma_h
  double sticks = 0.0;          // kappa log(1 - nu_1) + (a - 1) sum log nu_h
  double stick_jacobian = 0.0;  // sum log[nu_h (1 - nu_h)]
  double indicators = 0.0;      // sum z log theta + (1 - z) log(1 - theta)
  double dispersion = 0.0;      // half-Cauchy(0, 1) on phi plus log-scale Jacobian
  double power = 0.0;           // uniform power plus logit Jacobian

  double total() const {
    return beta + latent + lambda_tilde + scale_mixture + scale_jacobian + sticks + stick_jacobian +
           indicators + dispersion + power;
  }
};

// When grad is non-null its entries for every prior coordinate are
// incremented by the derivative of the total.
PriorTerms log_prior_unconstrained(const ParamLayout& layout, const Eigen::VectorXd& q,
                                   std::span<const int> z, const HyperParams& hyper,
                                   Eigen::VectorXd* grad);

}  // namespace glnem
