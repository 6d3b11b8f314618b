#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "glnem/families.hpp"
#include "glnem/network.hpp"
#include "glnem/postprocess.hpp"
#include "glnem/random.hpp"

namespace glnem {

struct SimConfig {
  int n = 100;
  int d0 = 3;
  Family family;
  LinkKind link = LinkKind::Logit;
  double c = 1.0;  // lambda mixture location is +-c n
  AuxParams aux;
  Eigen::VectorXd beta0;  // first entry multiplies the all-ones covariate
  std::optional<double> zero_inflation_pi;
  bool diagonal_observed = false;

  // Defaults for the family: c, beta0 = (b1, -0.5, 0.5, 0, 0) with b1 = -1
  // (+1 for the Gaussian), canonical link, phi and power.
  static SimConfig defaults(FamilyKind family, int n = 100, int d0 = 3);
  void validate() const;
};

struct SimTruth {
  Eigen::VectorXd beta0;
  Eigen::MatrixXd u0;
  Eigen::VectorXd lambda0;
  int d0 = 0;
  Family family;
  LinkKind link = LinkKind::Logit;
  AuxParams aux;
  std::optional<double> zero_inflation_pi;

  // beta0' x_ij + [U0 Lambda0 U0']_ij for every (i, j).
  Eigen::MatrixXd linear_predictor(const NetworkData& data) const;
  Eigen::MatrixXd latent_matrix() const;
};

struct Simulated {
  NetworkData data;
  SimTruth truth;
};

Simulated generate_glnem(const SimConfig& cfg, Rng& rng);

// Zero-inflated Poisson: each dyad is zero with probability pi and Poisson
// with the GLNEM mean otherwise.
Simulated generate_zip(const SimConfig& cfg, double pi, Rng& rng);

// tr(U0' U_hat) / d0 for conformable bases.
double trace_correlation(const Eigen::MatrixXd& u0, const Eigen::MatrixXd& u_hat);

// ||A_hat - A0||_F^2 / ||A0||_F^2.
double relative_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

struct RecoveryMetrics {
  double trace_correlation = 0.0;
  double beta_error = 0.0;
  double latent_error = 0.0;
  double lambda_error = 0.0;
};

// Scores aligned draws against the truth: the d0 columns with the largest
// inclusion probabilities are aligned to U0 and compared; the latent matrix
// estimate is the posterior mean of U Lambda U' over all draws.
RecoveryMetrics recovery_metrics(const AlignedDraws& aligned, const SimTruth& truth);

}  // namespace glnem
