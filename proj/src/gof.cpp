#include "glnem/gof.hpp"

#include <algorithm>
#include <numeric>

#include "glnem/errors.hpp"
#include "glnem/families.hpp"
#include "glnem/postprocess.hpp"

namespace glnem {

namespace {

Eigen::MatrixXd binary_adjacency(const Eigen::MatrixXd& y) {
  Eigen::MatrixXd a = (y.array() > 0.0).cast<double>();
  a.diagonal().setZero();
  return a;
}

}  // namespace

double transitivity(const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd a = binary_adjacency(y);
  const Eigen::VectorXd k = a.rowwise().sum();
  double triples = 0.0;
  for (Eigen::Index i = 0; i < k.size(); ++i) triples += 0.5 * k[i] * (k[i] - 1.0);
  if (triples == 0.0) return 0.0;
  // trace(A^3) counts every triangle six times.
  const double closed = (a * a).cwiseProduct(a).sum();
  return 3.0 * (closed / 6.0) / triples;
}

Eigen::VectorXd degrees(const Eigen::MatrixXd& y, DegreeMode mode) {
  if (mode == DegreeMode::Binary) return binary_adjacency(y).rowwise().sum();
  Eigen::MatrixXd w = y;
  w.diagonal().setZero();
  return w.rowwise().sum();
}

std::map<double, int> degree_distribution(const Eigen::MatrixXd& y, DegreeMode mode) {
  std::map<double, int> out;
  const Eigen::VectorXd k = degrees(y, mode);
  for (Eigen::Index i = 0; i < k.size(); ++i) ++out[k[i]];
  return out;
}

Eigen::MatrixXd simulate_network(const Draw& draw, const DrawStore& draws, const NetworkData& data, Rng& rng) {
  const int n = data.nodes();
  const Family& family = draws.spec.family;
  const AuxParams aux{draw.phi, draw.power};
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j && !data.diagonal_observed) continue;
      double eta = 0.0;
      for (int c = 0; c < data.covariates(); ++c) eta += data.x[c](i, j) * draw.beta[c];
      for (Eigen::Index h = 0; h < draw.lambda.size(); ++h) eta += draw.lambda[h] * draw.u(i, h) * draw.u(j, h);
      const double v = sample(family, inverse_link(draws.spec.link, eta), aux, rng);
      y(i, j) = v;
      y(j, i) = v;
    }
  }
  return y;
}

std::vector<int> subsample_draws(int available, int count, Rng& rng) {
  if (available < 1) throw ConfigError("posterior predictive: no draws");
  if (count < 1) throw ConfigError("posterior predictive: subsample must be positive");
  std::vector<int> idx(available);
  std::iota(idx.begin(), idx.end(), 0);
  if (count >= available) return idx;
  // Partial Fisher-Yates.
  for (int k = 0; k < count; ++k) {
    std::uniform_int_distribution<int> pick(k, available - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

GofReport posterior_predictive(const DrawStore& draws, const NetworkData& data, const NetworkStatistic& statistic,
                               int subsample, Rng& rng) {
  GofReport report;
  report.observed = statistic(data.y);
  report.draw_index = subsample_draws(draws.size(), subsample, rng);
  report.predictive.reserve(report.draw_index.size());
  int above = 0;
  for (int s : report.draw_index) {
    const double v = statistic(simulate_network(draws.draws[s], draws, data, rng));
    report.predictive.push_back(v);
    above += v >= report.observed ? 1 : 0;
  }
  report.lower = quantile(report.predictive, 0.025);
  report.median = quantile(report.predictive, 0.5);
  report.upper = quantile(report.predictive, 0.975);
  report.upper_tail = static_cast<double>(above) / static_cast<double>(report.predictive.size());
  return report;
}

DegreePredictive posterior_predictive_degrees(const DrawStore& draws, const NetworkData& data, DegreeMode mode,
                                              int subsample, Rng& rng) {
  DegreePredictive out;
  out.observed = degrees(data.y, mode);
  out.draw_index = subsample_draws(draws.size(), subsample, rng);
  for (int s : out.draw_index) out.predictive.push_back(degrees(simulate_network(draws.draws[s], draws, data, rng), mode));
  return out;
}

}  // namespace glnem
