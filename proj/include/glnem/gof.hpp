#pragma once

#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "glnem/network.hpp"
#include "glnem/random.hpp"
#include "glnem/sampler.hpp"

namespace glnem {

// 3 x triangles / connected triples of the graph with edges y_ij > 0,
// ignoring the diagonal; 0 when there are no triples.
double transitivity(const Eigen::MatrixXd& y);

enum class DegreeMode {
  Binary,    // number of j != i with y_ij > 0
  Weighted,  // sum over j != i of y_ij
};

Eigen::VectorXd degrees(const Eigen::MatrixXd& y, DegreeMode mode);
// Number of nodes per degree value.
std::map<double, int> degree_distribution(const Eigen::MatrixXd& y, DegreeMode mode);

// Network statistic evaluated on a full adjacency matrix.
using NetworkStatistic = std::function<double(const Eigen::MatrixXd& y)>;

// Draws a network from the family at a stored draw. The diagonal is drawn
// only when the data mark it observed and is left at zero otherwise.
Eigen::MatrixXd simulate_network(const Draw& draw, const DrawStore& draws, const NetworkData& data, Rng& rng);

struct GofReport {
  double observed = 0.0;
  std::vector<int> draw_index;
  std::vector<double> predictive;
  double lower = 0.0;   // 2.5% predictive quantile
  double median = 0.0;
  double upper = 0.0;   // 97.5% predictive quantile
  // Fraction of predictive values at least as large as the observed value.
  double upper_tail = 0.0;
};

// Indices of `count` distinct draws chosen uniformly, in increasing order.
std::vector<int> subsample_draws(int available, int count, Rng& rng);

GofReport posterior_predictive(const DrawStore& draws, const NetworkData& data, const NetworkStatistic& statistic,
                               int subsample, Rng& rng);

struct DegreePredictive {
  Eigen::VectorXd observed;                // per-node degrees of the data
  std::vector<int> draw_index;
  std::vector<Eigen::VectorXd> predictive; // per-node degrees of each replicate
};

DegreePredictive posterior_predictive_degrees(const DrawStore& draws, const NetworkData& data, DegreeMode mode,
                                              int subsample, Rng& rng);

}  // namespace glnem
