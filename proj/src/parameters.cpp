#include "glnem/parameters.hpp"

#include <cmath>

#include "glnem/families.hpp"
#include "glnem/special.hpp"

namespace glnem {

ParamLayout::ParamLayout(int n, int d, int p, LambdaPrior prior, bool sample_phi, bool sample_power)
    : n_(n), d_(d), p_(p), prior_(prior), sample_phi_(sample_phi), sample_power_(sample_power) {
  int offset = n * d;
  beta_ = offset;
  offset += p;
  lambda_tilde_ = offset;
  offset += d;
  log_sigma_ = offset;
  if (has_stick_block()) offset += d;
  logit_nu_ = offset;
  if (has_stick_block()) offset += d;
  if (sample_phi) log_phi_ = offset++;
  if (sample_power) logit_power_ = offset++;
  size_ = offset;
}

std::string ParamLayout::coordinate_name(int index) const {
  auto indexed = [](const char* name, int k) { return std::string(name) + "[" + std::to_string(k) + "]"; };
  if (index < beta_) {
    return "B[" + std::to_string(index % n_) + "," + std::to_string(index / n_) + "]";
  }
  if (index < lambda_tilde_) return indexed("beta", index - beta_);
  if (index < log_sigma_) return indexed("lambda_tilde", index - lambda_tilde_);
  if (has_stick_block() && index < logit_nu_) return indexed("log_sigma", index - log_sigma_);
  if (has_stick_block() && index < logit_nu_ + d_) return indexed("logit_nu", index - logit_nu_);
  if (index == log_phi_) return "log_phi";
  if (index == logit_power_) return "logit_power";
  return indexed("coordinate", index);
}

double power_from_unconstrained(double eta) {
  return kMinPower + (kMaxPower - kMinPower) * logistic(eta);
}

double power_to_unconstrained(double power) {
  const double u = (power - kMinPower) / (kMaxPower - kMinPower);
  return std::log(u) - std::log1p(-u);
}

}  // namespace glnem
