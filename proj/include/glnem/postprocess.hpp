#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glnem/sampler.hpp"

namespace glnem {

// Maximum-weight perfect assignment on a square matrix: result[r] is the
// column assigned to row r.
std::vector<int> hungarian_max(const Eigen::MatrixXd& weight);

struct Alignment {
  Eigen::MatrixXd u;
  Eigen::VectorXd lambda;
  // Column k of the aligned draw is sign[k] * raw column perm[k].
  std::vector<int> perm;
  std::vector<int> sign;
};

// Signed permutation of the columns of u_s that best matches u_ref under
// the cost |u_ref_k' u_s_j|. Signs apply to U only.
Alignment align_draw(const Eigen::MatrixXd& u_s, const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& u_ref);

struct MapReference {
  Eigen::MatrixXd u;
  int index = 0;
};
// Draw with the largest stored log posterior; ties go to the lowest index.
MapReference map_reference(const DrawStore& draws);

Eigen::VectorXd inclusion_probabilities(const DrawStore& draws);

struct DimensionPosterior {
  Eigen::VectorXd pmf;  // over 0..d
  int mode = 0;         // ties go to the smaller dimension
};
DimensionPosterior dimension_posterior(const DrawStore& draws);

struct AlignedDraws {
  DrawStore draws;  // U, lambda and Z columns relabeled per draw
  Eigen::MatrixXd reference;
  int reference_index = 0;
  std::vector<std::vector<int>> perms;
  std::vector<std::vector<int>> signs;
};
AlignedDraws align_draws(DrawStore draws);

struct Interval {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;   // 2.5% quantile
  double median = 0.0;
  double upper = 0.0;   // 97.5% quantile
};

// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);
Interval interval(std::span<const double> values);

// Effective sample size of a single chain from the autocorrelations,
// truncated by Geyer's initial monotone positive sequence.
double effective_sample_size(std::span<const double> values);
// Monte Carlo standard error of the mean.
double mcse_mean(std::span<const double> values);

struct Summary {
  std::vector<Interval> beta;
  std::vector<Interval> lambda;
  Interval phi;
  Interval power;
  bool has_phi = false;
  bool has_power = false;
  Eigen::VectorXd inclusion;
  DimensionPosterior dimension;
  Eigen::MatrixXd u_mean;  // Frechet mean of the aligned U draws
  int reference_index = 0;
  Eigen::VectorXd beta_ess;
};
Summary summarize(const AlignedDraws& aligned);

}  // namespace glnem
