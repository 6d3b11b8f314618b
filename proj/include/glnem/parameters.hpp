#pragma once

#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace glnem {

enum class LambdaPrior {
  // Truncated spike-and-slab IBP with a Laplace slab (scale mixture form).
  SpikeSlabIbp,
  // lambda_h ~ N(0, variance) independently; used by fixed-dimension baselines.
  FixedGaussian,
};

// Offsets of the unconstrained coordinates in the flat HMC vector:
//   B (n x d, column-major) | beta (p) | lambda_tilde (d) |
//   log sigma (d) | logit nu (d) | log phi (0/1) | logit power (0/1)
// The sigma and nu blocks are empty under LambdaPrior::FixedGaussian.
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(int n, int d, int p, LambdaPrior prior, bool sample_phi, bool sample_power);

  int nodes() const { return n_; }
  int dims() const { return d_; }
  int covariates() const { return p_; }
  LambdaPrior prior() const { return prior_; }
  bool samples_phi() const { return sample_phi_; }
  bool samples_power() const { return sample_power_; }
  bool has_stick_block() const { return prior_ == LambdaPrior::SpikeSlabIbp; }

  int size() const { return size_; }
  int b_offset() const { return 0; }
  int beta_offset() const { return beta_; }
  int lambda_tilde_offset() const { return lambda_tilde_; }
  int log_sigma_offset() const { return log_sigma_; }
  int logit_nu_offset() const { return logit_nu_; }
  int log_phi_offset() const { return log_phi_; }
  int logit_power_offset() const { return logit_power_; }

  Eigen::Map<const Eigen::MatrixXd> b(const Eigen::VectorXd& q) const {
    return Eigen::Map<const Eigen::MatrixXd>(q.data(), n_, d_);
  }
  Eigen::Map<Eigen::MatrixXd> b(Eigen::VectorXd& q) const {
    return Eigen::Map<Eigen::MatrixXd>(q.data(), n_, d_);
  }
  template <class Vec>
  auto beta(Vec& q) const { return q.segment(beta_, p_); }
  template <class Vec>
  auto lambda_tilde(Vec& q) const { return q.segment(lambda_tilde_, d_); }
  template <class Vec>
  auto log_sigma(Vec& q) const { return q.segment(log_sigma_, has_stick_block() ? d_ : 0); }
  template <class Vec>
  auto logit_nu(Vec& q) const { return q.segment(logit_nu_, has_stick_block() ? d_ : 0); }

  // Human-readable coordinate name, e.g. "B[3,1]" or "logit_nu[0]".
  std::string coordinate_name(int index) const;

 private:
  int n_ = 0, d_ = 0, p_ = 0;
  LambdaPrior prior_ = LambdaPrior::SpikeSlabIbp;
  bool sample_phi_ = false, sample_power_ = false;
  int beta_ = 0, lambda_tilde_ = 0, log_sigma_ = 0, logit_nu_ = 0;
  int log_phi_ = -1, logit_power_ = -1;
  int size_ = 0;
};

double power_from_unconstrained(double eta);
double power_to_unconstrained(double power);

}  // namespace glnem
