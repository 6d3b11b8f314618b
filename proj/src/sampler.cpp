#include "glnem/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "glnem/errors.hpp"
#include "glnem/parallel.hpp"
#include "glnem/special.hpp"

namespace glnem {

void SamplerConfig::validate() const {
  if (warmup < 0) throw ConfigError("sampler.warmup must be non-negative");
  if (draws < 1) throw ConfigError("sampler.draws must be positive");
  if (chains < 1) throw ConfigError("sampler.chains must be positive");
  if (thin < 1) throw ConfigError("sampler.thin must be positive");
  if (init_iterations < 0) throw ConfigError("sampler.init_iterations must be non-negative");
  if (!(init_radius > 0.0)) throw ConfigError("sampler.init_radius must be positive");
  if (!(max_init_divergent_fraction > 0.0 && max_init_divergent_fraction <= 1.0)) {
    throw ConfigError("sampler.max_init_divergent_fraction must lie in (0, 1]");
  }
  if (threads < 0) throw ConfigError("sampler.threads must be non-negative");
  if (hmc.max_depth < 1) throw ConfigError("sampler.max_depth must be positive");
  if (hmc.static_steps < 0) throw ConfigError("sampler.static_steps must be non-negative");
  if (!(hmc.target_accept > 0.0 && hmc.target_accept < 1.0)) {
    throw ConfigError("sampler.target_accept must lie in (0, 1)");
  }
}

ParamState derive_state(const GlnemModel& model, Eigen::VectorXd q, std::vector<int> z) {
  ParamState s;
  const ParamLayout& layout = model.layout();
  const ConstrainedParams c = model.constrain(q, z);
  s.u = c.u;
  s.beta = c.beta;
  s.aux = c.aux;
  s.lambda.z = z;
  s.lambda.lambda = c.lambda;
  s.lambda.lambda_tilde = layout.lambda_tilde(q);
  const Eigen::VectorXd scale = model.lambda_scale(q);
  s.lambda.sigma2 = scale.array().square();
  if (layout.has_stick_block()) {
    s.lambda.nu = layout.logit_nu(q).unaryExpr([](double e) { return logistic(e); });
    s.lambda.theta = slab_probabilities(s.lambda.nu);
  }
  s.q = std::move(q);
  s.z = std::move(z);
  return s;
}

Eigen::MatrixXd DrawStore::pointwise_matrix() const {
  if (draws.empty()) return {};
  Eigen::MatrixXd out(draws.size(), draws.front().pointwise.size());
  for (std::size_t s = 0; s < draws.size(); ++s) {
    if (draws[s].pointwise.size() != out.cols()) throw NumericError("draws carry no per-dyad log-likelihood");
    out.row(static_cast<Eigen::Index>(s)) = draws[s].pointwise.transpose();
  }
  return out;
}

double log_likelihood(const GlnemModel& model, const ParamState& state, Eigen::VectorXd* per_dyad) {
  ConstrainedParams c{state.u, state.lambda.lambda, state.beta, state.aux};
  return model.log_likelihood(c, per_dyad);
}

Eigen::VectorXd grad_log_posterior(const GlnemModel& model, const Eigen::VectorXd& q, std::span<const int> z) {
  Eigen::VectorXd grad;
  model.log_posterior(q, z, &grad);
  return grad;
}

namespace {

LogDensityFn target_for(const GlnemModel& model, std::span<const int> z) {
  return [&model, z](const Eigen::VectorXd& q, Eigen::VectorXd& grad) { return model.log_posterior(q, z, &grad); };
}

// log(1 - exp(x)) for x <= 0.
double log1m_exp(double x) {
  if (x >= 0.0) return -INFINITY;
  return x > -0.693147 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

}  // namespace

HmcTransition hmc_update(const GlnemModel& model, std::span<const int> z, HmcKernel& kernel, HmcPoint& point,
                         Rng& rng) {
  return kernel.transition(target_for(model, z), point, rng);
}

GibbsScan gibbs_update_z(const GlnemModel& model, const Eigen::VectorXd& q, std::vector<int>& z, Rng& rng) {
  const ParamLayout& layout = model.layout();
  const int d = layout.dims();
  GibbsScan scan;
  scan.order.resize(d);
  scan.probability.assign(d, 0.0);
  if (d == 0) return scan;
  std::iota(scan.order.begin(), scan.order.end(), 0);
  std::shuffle(scan.order.begin(), scan.order.end(), rng);

  const ConstrainedParams params = model.constrain(q, z);
  Eigen::VectorXd eta = model.linear_predictor(params);
  const Eigen::VectorXd scale = model.lambda_scale(q);
  const auto lt = layout.lambda_tilde(q);
  Eigen::VectorXd log_theta(d);
  if (layout.has_stick_block()) {
    const auto logit_nu = layout.logit_nu(q);
    double acc = 0.0;
    for (int h = 0; h < d; ++h) {
      acc += log_logistic(logit_nu[h]);
      log_theta[h] = acc;
    }
  } else {
    log_theta.setZero();
  }

  for (int h : scan.order) {
    const double lt_h = log_theta[h];
    const double l1m_h = log1m_exp(lt_h);
    const double c = scale[h] * lt[h];
    const Eigen::VectorXd delta = c * model.latent_column(params.u, h);
    double prob;
    if (l1m_h == -INFINITY) {
      prob = 1.0;
    } else if (lt_h == -INFINITY) {
      prob = 0.0;
    } else {
      const Eigen::VectorXd eta_on = z[h] ? eta : Eigen::VectorXd(eta + delta);
      const Eigen::VectorXd eta_off = z[h] ? Eigen::VectorXd(eta - delta) : eta;
      const double l_on = model.log_likelihood(eta_on, params.aux);
      const double l_off = model.log_likelihood(eta_off, params.aux);
      double log_odds = l_on - l_off + lt_h - l1m_h;
      if (std::isnan(log_odds)) log_odds = l_on == l_off ? lt_h - l1m_h : (l_on > l_off ? INFINITY : -INFINITY);
      prob = logistic(log_odds);
    }
    scan.probability[h] = prob;
    const int next = uniform01(rng) < prob ? 1 : 0;
    if (next != z[h]) {
      if (next) eta += delta;
      else eta -= delta;
      z[h] = next;
    }
  }
  return scan;
}

InitResult initialize(const GlnemModel& model, const SamplerConfig& config, HmcKernel& kernel, Rng& rng) {
  const ParamLayout& layout = model.layout();
  std::vector<int> z(layout.dims(), 1);
  const LogDensityFn fn = target_for(model, z);
  std::uniform_real_distribution<double> unif(-config.init_radius, config.init_radius);

  HmcPoint point;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    Eigen::VectorXd q(layout.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = unif(rng);
    ok = evaluate(fn, q, point);
  }
  if (!ok) throw NumericError("initialization failed: no finite log posterior among 100 uniform draws");

  InitResult out;
  if (config.init_iterations > 0) {
    kernel.init_step_size(fn, point, rng);
    kernel.begin_adaptation(config.init_iterations);
    for (int it = 0; it < config.init_iterations; ++it) {
      const HmcTransition t = kernel.transition(fn, point, rng);
      out.divergences += t.divergent ? 1 : 0;
      kernel.adapt(fn, point, t, rng);
    }
    kernel.end_adaptation();
    if (out.divergences > config.max_init_divergent_fraction * config.init_iterations) {
      throw NumericError("initialization failed: " + std::to_string(out.divergences) + " of " +
                         std::to_string(config.init_iterations) + " iterations diverged");
    }
  }
  out.state = derive_state(model, point.q, z);
  return out;
}

DrawStore run_chain(const GlnemModel& model, const SamplerConfig& config, int chain) {
  config.validate();
  const ParamLayout& layout = model.layout();
  const bool sample_z = layout.has_stick_block() && layout.dims() > 0;
  Rng rng = make_rng(config.seed + static_cast<std::uint64_t>(chain));
  HmcKernel kernel(layout.size(), config.hmc);

  DrawStore store;
  store.spec = model.spec();
  store.hyper = model.hyper();
  store.config = config;
  store.nodes = layout.nodes();
  store.covariates = layout.covariates();
  store.dyads = model.dyads();

  InitResult init = initialize(model, config, kernel, rng);
  Eigen::VectorXd q = std::move(init.state.q);
  std::vector<int> z = std::move(init.state.z);

  ChainDiagnostics diag;
  diag.chain = chain;
  diag.init_divergences = init.divergences;

  HmcPoint point;
  if (!evaluate(target_for(model, z), q, point)) throw NumericError("chain started at a point with zero density");
  if (config.init_iterations == 0) kernel.init_step_size(target_for(model, z), point, rng);

  const int total = config.warmup + config.draws * config.thin;
  store.draws.reserve(config.draws);
  kernel.begin_adaptation(config.warmup);
  double accept_sum = 0.0;
  double depth_sum = 0.0;
  for (int it = 0; it < total; ++it) {
    const LogDensityFn fn = target_for(model, z);
    const double eps = kernel.step_size();
    const HmcTransition t = kernel.transition(fn, point, rng);
    const bool warm = it < config.warmup;
    if (warm) {
      kernel.adapt(fn, point, t, rng);
      if (it == config.warmup - 1) kernel.end_adaptation();
      diag.warmup_divergences += t.divergent ? 1 : 0;
    } else {
      diag.divergences += t.divergent ? 1 : 0;
      accept_sum += t.accept_stat;
      depth_sum += t.depth;
      diag.max_depth_hits += t.depth >= config.hmc.max_depth ? 1 : 0;
    }

    if (sample_z) {
      gibbs_update_z(model, point.q, z, rng);
      if (!evaluate(target_for(model, z), point.q, point)) {
        throw NumericError("indicator update produced a point with zero density");
      }
    }

    if (warm || (it - config.warmup) % config.thin != 0) continue;
    Draw draw;
    draw.chain = chain;
    const ConstrainedParams c = model.constrain(point.q, z);
    draw.beta = c.beta;
    draw.lambda = c.lambda;
    draw.z = z;
    draw.u = c.u;
    draw.phi = c.aux.phi;
    draw.power = c.aux.power;
    Eigen::VectorXd per_dyad;
    draw.loglik = model.log_likelihood(c, &per_dyad);
    if (config.store_pointwise) draw.pointwise = std::move(per_dyad);
    draw.logpost = point.logp;
    draw.accept_stat = t.accept_stat;
    draw.step_size = eps;
    draw.tree_depth = t.depth;
    draw.divergent = t.divergent;
    store.draws.push_back(std::move(draw));
  }
  const double kept = static_cast<double>(config.draws * config.thin);
  diag.step_size = kernel.step_size();
  diag.inv_metric = kernel.inv_metric();
  diag.mean_accept = accept_sum / kept;
  diag.mean_tree_depth = depth_sum / kept;
  store.chains.push_back(std::move(diag));
  return store;
}

int default_thread_count() {
  if (const char* env = std::getenv("GLNEM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("GLNEM_THREADS must be a positive integer, got '") + env + "'");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

DrawStore run_chains(const GlnemModel& model, const SamplerConfig& config) {
  config.validate();
  const int threads = config.threads > 0 ? config.threads : default_thread_count();
  std::vector<DrawStore> results(config.chains);
  parallel_for(config.chains, threads, [&](int c) { results[c] = run_chain(model, config, c); });
  DrawStore out = std::move(results[0]);
  for (int c = 1; c < config.chains; ++c) {
    for (auto& d : results[c].draws) out.draws.push_back(std::move(d));
    out.chains.push_back(std::move(results[c].chains[0]));
  }
  return out;
}

}  // namespace glnem
