#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glnem/families.hpp"
#include "glnem/network.hpp"
#include "glnem/parameters.hpp"
#include "glnem/ssibp_prior.hpp"

namespace glnem {

struct ModelSpec {
  Family family;
  LinkKind link = LinkKind::Logit;
  // Fixed values of phi / power; also the fallback when they are not sampled.
  AuxParams aux;
  LambdaPrior lambda_prior = LambdaPrior::SpikeSlabIbp;

  // Throws ConfigError for incompatible family/link pairs or bad aux values.
  void validate() const;
};

// Model parameters on their natural scales.
struct ConstrainedParams {
  Eigen::MatrixXd u;       // n x d, centered semi-orthogonal
  Eigen::VectorXd lambda;  // d
  Eigen::VectorXd beta;    // p
  AuxParams aux;
};

// Log posterior of the continuous block given the indicators, and the
// likelihood pieces the Gibbs step and the post-processing need.
class GlnemModel {
 public:
  GlnemModel(const NetworkData& data, ModelSpec spec, HyperParams hyper);

  const ParamLayout& layout() const { return layout_; }
  const ModelSpec& spec() const { return spec_; }
  const HyperParams& hyper() const { return hyper_; }
  const NetworkData& data() const { return data_; }
  const std::vector<Dyad>& dyads() const { return dyads_; }
  int dyad_count() const { return static_cast<int>(dyads_.size()); }

  ConstrainedParams constrain(const Eigen::VectorXd& q, std::span<const int> z) const;
  AuxParams aux_from(const Eigen::VectorXd& q) const;
  Eigen::VectorXd lambda_from(const Eigen::VectorXd& q, std::span<const int> z) const;
  // sigma_h = exp(log sigma_h) under the spike-and-slab prior; sqrt(variance) otherwise.
  Eigen::VectorXd lambda_scale(const Eigen::VectorXd& q) const;

  // Linear predictor on the observed dyads.
  Eigen::VectorXd linear_predictor(const ConstrainedParams& params) const;
  // Linear predictor for an arbitrary dyad, observed or not.
  double linear_predictor_at(const ConstrainedParams& params, Dyad dyad) const;
  // u_ih * u_jh over the observed dyads.
  Eigen::VectorXd latent_column(const Eigen::MatrixXd& u, int h) const;

  double log_likelihood(const Eigen::VectorXd& eta, const AuxParams& aux,
                        Eigen::VectorXd* per_dyad = nullptr) const;
  double log_likelihood(const ConstrainedParams& params, Eigen::VectorXd* per_dyad = nullptr) const;

  // Log density of the unconstrained block given z, up to a constant. When
  // grad is non-null it is resized and filled. Throws NumericError if the
  // gradient is non-finite, naming the coordinate.
  double log_posterior(const Eigen::VectorXd& q, std::span<const int> z,
                       Eigen::VectorXd* grad = nullptr) const;

 private:
  NetworkData data_;
  ModelSpec spec_;
  HyperParams hyper_;
  ParamLayout layout_;
  std::vector<Dyad> dyads_;
  Eigen::VectorXd y_;   // observed values in dyad order
  Eigen::MatrixXd xd_;  // dyads x p covariate rows
  Eigen::VectorXd log_y_factorial_;  // cached for the Poisson log-link path

  DensityGradient dyad_density(int k, double eta, const AuxParams& aux, bool with_aux) const;
};

}  // namespace glnem
