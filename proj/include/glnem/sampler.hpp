#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glnem/hmc.hpp"
#include "glnem/model.hpp"
#include "glnem/random.hpp"
#include "glnem/ssibp_prior.hpp"

namespace glnem {

struct SamplerConfig {
  int warmup = 5000;
  int draws = 5000;
  int chains = 1;
  std::uint64_t seed = 1;
  int thin = 1;
  // Adaptive HMC iterations with every Z_h = 1 before the main warmup.
  int init_iterations = 500;
  double init_radius = 2.0;
  // Fraction of divergent initialization iterations that aborts the run.
  double max_init_divergent_fraction = 0.9;
  HmcOptions hmc;
  // Keep the per-dyad log-likelihood of every stored draw.
  bool store_pointwise = true;
  // Upper bound on concurrently running chains; 0 defers to GLNEM_THREADS
  // and then to the hardware.
  int threads = 0;

  void validate() const;
};

// Full sampler state: the unconstrained block, the indicators, and their
// constrained images.
struct ParamState {
  Eigen::VectorXd q;
  std::vector<int> z;

  Eigen::MatrixXd u;
  LambdaState lambda;
  Eigen::VectorXd beta;
  AuxParams aux;
};

ParamState derive_state(const GlnemModel& model, Eigen::VectorXd q, std::vector<int> z);

struct Draw {
  int chain = 0;
  Eigen::VectorXd beta;
  Eigen::VectorXd lambda;
  std::vector<int> z;
  Eigen::MatrixXd u;
  double phi = 1.0;
  double power = 1.5;
  double loglik = 0.0;
  double logpost = 0.0;
  Eigen::VectorXd pointwise;  // per observed dyad, in GlnemModel::dyads() order
  double accept_stat = 0.0;
  double step_size = 0.0;
  int tree_depth = 0;
  bool divergent = false;
};

struct ChainDiagnostics {
  int chain = 0;
  double step_size = 0.0;
  Eigen::VectorXd inv_metric;
  int init_divergences = 0;
  int warmup_divergences = 0;
  int divergences = 0;
  double mean_accept = 0.0;
  double mean_tree_depth = 0.0;
  int max_depth_hits = 0;
};

struct DrawStore {
  ModelSpec spec;
  HyperParams hyper;
  SamplerConfig config;
  int nodes = 0;
  int covariates = 0;
  std::vector<Dyad> dyads;
  std::vector<Draw> draws;
  std::vector<ChainDiagnostics> chains;

  int dims() const { return hyper.d; }
  int size() const { return static_cast<int>(draws.size()); }
  // S x D matrix of stored per-dyad log-likelihoods.
  Eigen::MatrixXd pointwise_matrix() const;
};

double log_likelihood(const GlnemModel& model, const ParamState& state, Eigen::VectorXd* per_dyad = nullptr);

Eigen::VectorXd grad_log_posterior(const GlnemModel& model, const Eigen::VectorXd& q, std::span<const int> z);

// One HMC transition of the continuous block given z. point must hold the
// log density and gradient at point.q under z.
HmcTransition hmc_update(const GlnemModel& model, std::span<const int> z, HmcKernel& kernel, HmcPoint& point,
                         Rng& rng);

// Gibbs scan over the indicators in a fresh random permutation. Returns the
// visit order and, indexed by h, the inclusion probability used at the visit.
struct GibbsScan {
  std::vector<int> order;
  std::vector<double> probability;
};
GibbsScan gibbs_update_z(const GlnemModel& model, const Eigen::VectorXd& q, std::vector<int>& z, Rng& rng);

struct InitResult {
  ParamState state;
  int divergences = 0;
};

// Uniform draw on (-radius, radius) for every unconstrained coordinate, then
// config.init_iterations adaptive HMC iterations with all Z_h = 1. The
// kernel keeps its tuning.
InitResult initialize(const GlnemModel& model, const SamplerConfig& config, HmcKernel& kernel, Rng& rng);

DrawStore run_chain(const GlnemModel& model, const SamplerConfig& config, int chain = 0);

// Chains run concurrently with RNG streams seeded by seed + chain index;
// draws are concatenated in chain order.
DrawStore run_chains(const GlnemModel& model, const SamplerConfig& config);

// Thread cap from GLNEM_THREADS, else the hardware concurrency.
int default_thread_count();

}  // namespace glnem
