#include "glnem/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glnem/errors.hpp"
#include "glnem/manifold.hpp"

namespace glnem {

std::vector<int> hungarian_max(const Eigen::MatrixXd& weight) {
  const int n = static_cast<int>(weight.rows());
  if (weight.cols() != n) throw ConfigError("assignment matrix must be square");
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with potentials on the cost -weight; 1-based
  // with column 0 as the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(n);
  for (int j = 1; j <= n; ++j) out[p[j] - 1] = j - 1;
  return out;
}

Alignment align_draw(const Eigen::MatrixXd& u_s, const Eigen::VectorXd& lambda_s, const Eigen::MatrixXd& u_ref) {
  if (u_s.rows() != u_ref.rows() || u_s.cols() != u_ref.cols() || lambda_s.size() != u_s.cols()) {
    throw ConfigError("align_draw: non-conformable inputs");
  }
  const int d = static_cast<int>(u_s.cols());
  const Eigen::MatrixXd inner = u_ref.transpose() * u_s;
  Alignment out;
  out.perm = hungarian_max(inner.cwiseAbs());
  out.sign.resize(d);
  out.u.resize(u_s.rows(), d);
  out.lambda.resize(d);
  for (int k = 0; k < d; ++k) {
    const int j = out.perm[k];
    out.sign[k] = inner(k, j) < 0.0 ? -1 : 1;
    out.u.col(k) = out.sign[k] * u_s.col(j);
    out.lambda[k] = lambda_s[j];
  }
  return out;
}

MapReference map_reference(const DrawStore& draws) {
  if (draws.draws.empty()) throw ConfigError("map_reference: no draws");
  int best = 0;
  for (int s = 1; s < draws.size(); ++s) {
    if (draws.draws[s].logpost > draws.draws[best].logpost) best = s;
  }
  return {draws.draws[best].u, best};
}

Eigen::VectorXd inclusion_probabilities(const DrawStore& draws) {
  if (draws.draws.empty()) throw ConfigError("inclusion_probabilities: no draws");
  const int d = static_cast<int>(draws.draws.front().z.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (const Draw& dr : draws.draws) {
    for (int h = 0; h < d; ++h) out[h] += dr.z[h];
  }
  return out / static_cast<double>(draws.size());
}

DimensionPosterior dimension_posterior(const DrawStore& draws) {
  if (draws.draws.empty()) throw ConfigError("dimension_posterior: no draws");
  const int d = static_cast<int>(draws.draws.front().z.size());
  DimensionPosterior out;
  out.pmf = Eigen::VectorXd::Zero(d + 1);
  for (const Draw& dr : draws.draws) {
    int k = 0;
    for (int v : dr.z) k += v;
    out.pmf[k] += 1.0;
  }
  out.pmf /= static_cast<double>(draws.size());
  out.mode = 0;
  for (int k = 1; k <= d; ++k) {
    if (out.pmf[k] > out.pmf[out.mode]) out.mode = k;
  }
  return out;
}

AlignedDraws align_draws(DrawStore draws) {
  AlignedDraws out;
  const MapReference ref = map_reference(draws);
  out.reference = ref.u;
  out.reference_index = ref.index;
  out.perms.reserve(draws.draws.size());
  out.signs.reserve(draws.draws.size());
  for (Draw& dr : draws.draws) {
    Alignment a = align_draw(dr.u, dr.lambda, out.reference);
    std::vector<int> z(dr.z.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = dr.z[a.perm[k]];
    dr.u = std::move(a.u);
    dr.lambda = std::move(a.lambda);
    dr.z = std::move(z);
    out.perms.push_back(std::move(a.perm));
    out.signs.push_back(std::move(a.sign));
  }
  out.draws = std::move(draws);
  return out;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw ConfigError("quantile: no values");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Interval interval(std::span<const double> values) {
  Interval out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.mean = mean;
  out.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::vector<double> copy(values.begin(), values.end());
  out.lower = quantile(copy, 0.025);
  out.median = quantile(copy, 0.5);
  out.upper = quantile(std::move(copy), 0.975);
  return out;
}

double effective_sample_size(std::span<const double> values) {
  const int n = static_cast<int>(values.size());
  if (n < 4) return n;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double c0 = 0.0;
  for (double v : values) c0 += (v - mean) * (v - mean);
  c0 /= n;
  if (c0 <= 0.0) return n;
  auto rho = [&](int lag) {
    double acc = 0.0;
    for (int t = 0; t + lag < n; ++t) acc += (values[t] - mean) * (values[t + lag] - mean);
    return acc / n / c0;
  };
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; 2 * k + 1 < n; ++k) {
    double gamma = rho(2 * k) + rho(2 * k + 1);
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev);
    prev = gamma;
    sum += gamma;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(static_cast<double>(n)));
  return n / tau;
}

double mcse_mean(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const Interval iv = interval(values);
  return iv.sd / std::sqrt(effective_sample_size(values));
}

Summary summarize(const AlignedDraws& aligned) {
  const DrawStore& ds = aligned.draws;
  if (ds.draws.empty()) throw ConfigError("summarize: no draws");
  Summary out;
  const int s_count = ds.size();
  const int p = static_cast<int>(ds.draws.front().beta.size());
  const int d = static_cast<int>(ds.draws.front().lambda.size());
  std::vector<double> buf(s_count);
  out.beta_ess.resize(p);
  for (int k = 0; k < p; ++k) {
    for (int s = 0; s < s_count; ++s) buf[s] = ds.draws[s].beta[k];
    out.beta.push_back(interval(buf));
    out.beta_ess[k] = effective_sample_size(buf);
  }
  for (int h = 0; h < d; ++h) {
    for (int s = 0; s < s_count; ++s) buf[s] = ds.draws[s].lambda[h];
    out.lambda.push_back(interval(buf));
  }
  out.has_phi = ds.spec.family.has_dispersion();
  if (out.has_phi) {
    for (int s = 0; s < s_count; ++s) buf[s] = ds.draws[s].phi;
    out.phi = interval(buf);
  }
  out.has_power = ds.spec.family.samples_power();
  if (out.has_power) {
    for (int s = 0; s < s_count; ++s) buf[s] = ds.draws[s].power;
    out.power = interval(buf);
  }
  out.inclusion = inclusion_probabilities(ds);
  out.dimension = dimension_posterior(ds);
  out.reference_index = aligned.reference_index;
  if (d > 0) {
    std::vector<Eigen::MatrixXd> us;
    us.reserve(s_count);
    for (const Draw& dr : ds.draws) us.push_back(dr.u);
    out.u_mean = frechet_mean(us);
  } else {
    out.u_mean.resize(ds.nodes, 0);
  }
  return out;
}

}  // namespace glnem
