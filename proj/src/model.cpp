#include "glnem/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glnem/errors.hpp"
#include "glnem/manifold.hpp"
#include "glnem/special.hpp"

namespace glnem {

void ModelSpec::validate() const {
  if (!link_compatible(family.kind, link)) {
    throw ConfigError("link '" + std::string(to_string(link)) + "' is not supported for family '" +
                      std::string(to_string(family.kind)) + "'");
  }
  if (family.has_dispersion() && !(aux.phi > 0.0)) throw ConfigError("dispersion phi must be positive");
  if (family.kind == FamilyKind::Tweedie && !(aux.power >= kMinPower && aux.power <= kMaxPower)) {
    throw ConfigError("tweedie power must lie in [1.01, 1.99]");
  }
}

GlnemModel::GlnemModel(const NetworkData& data, ModelSpec spec, HyperParams hyper)
    : data_(data), spec_(spec), hyper_(hyper) {
  spec_.validate();
  hyper_.validate();
  data_.validate();
  const int n = data_.nodes();
  const int p = data_.covariates();
  if (hyper_.d > 0 && n < hyper_.d + 1) {
    throw ConfigError("truncation d=" + std::to_string(hyper_.d) + " needs at least d + 1 nodes");
  }
  layout_ = ParamLayout(n, hyper_.d, p, spec_.lambda_prior, spec_.family.samples_dispersion(),
                        spec_.family.samples_power());
  dyads_ = observed_dyads(data_);
  const int count = static_cast<int>(dyads_.size());
  y_.resize(count);
  xd_.resize(count, p);
  AuxParams probe = spec_.aux;
  const double probe_mu = spec_.family.kind == FamilyKind::Bernoulli ? 0.5 : 1.0;
  for (int k = 0; k < count; ++k) {
    const auto [i, j] = dyads_[k];
    y_[k] = data_.y(i, j);
    for (int c = 0; c < p; ++c) xd_(k, c) = data_.x[c](i, j);
    try {
      check_support(spec_.family.kind, y_[k], probe_mu, probe);
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg << "dyad (" << i << ", " << j << "): " << e.what();
      throw DataError(msg.str());
    }
  }
  if (spec_.family.kind == FamilyKind::Poisson && spec_.link == LinkKind::Log) {
    log_y_factorial_ = y_.unaryExpr([](double v) { return log_factorial(v); });
  }
}

DensityGradient GlnemModel::dyad_density(int k, double eta, const AuxParams& aux, bool with_aux) const {
  if (log_y_factorial_.size() == 0) return log_density_eta(spec_.family.kind, spec_.link, y_[k], eta, aux, with_aux);
  // Same as the generic Poisson path without the per-call lgamma.
  DensityGradient g;
  const double e = std::clamp(eta, -kEtaClamp, kEtaClamp);
  const double mu = std::exp(e);
  g.value = y_[k] * e - mu - log_y_factorial_[k];
  g.d_mu = std::abs(eta) > kEtaClamp ? 0.0 : y_[k] - mu;
  return g;
}

AuxParams GlnemModel::aux_from(const Eigen::VectorXd& q) const {
  AuxParams aux = spec_.aux;
  if (!spec_.family.has_dispersion()) aux.phi = 1.0;
  if (layout_.samples_phi()) aux.phi = std::exp(q[layout_.log_phi_offset()]);
  if (layout_.samples_power()) aux.power = power_from_unconstrained(q[layout_.logit_power_offset()]);
  return aux;
}

Eigen::VectorXd GlnemModel::lambda_scale(const Eigen::VectorXd& q) const {
  if (layout_.has_stick_block()) return layout_.log_sigma(q).array().exp();
  return Eigen::VectorXd::Constant(layout_.dims(), std::sqrt(hyper_.lambda_variance));
}

Eigen::VectorXd GlnemModel::lambda_from(const Eigen::VectorXd& q, std::span<const int> z) const {
  Eigen::VectorXd lambda = lambda_scale(q).cwiseProduct(layout_.lambda_tilde(q));
  for (int h = 0; h < layout_.dims(); ++h) {
    if (!z[h]) lambda[h] = 0.0;
  }
  return lambda;
}

ConstrainedParams GlnemModel::constrain(const Eigen::VectorXd& q, std::span<const int> z) const {
  ConstrainedParams out;
  const int d = layout_.dims();
  out.u = d > 0 ? centered_orthogonalize(Eigen::MatrixXd(layout_.b(q)))
                : Eigen::MatrixXd(layout_.nodes(), 0);
  out.lambda = lambda_from(q, z);
  out.beta = layout_.beta(q);
  out.aux = aux_from(q);
  return out;
}

Eigen::VectorXd GlnemModel::linear_predictor(const ConstrainedParams& params) const {
  Eigen::VectorXd eta = xd_ * params.beta;
  const int d = static_cast<int>(params.lambda.size());
  if (d == 0) return eta;
  // Reused across calls: fresh n x n temporaries page-fault on every call.
  thread_local Eigen::MatrixXd m;
  m.noalias() = (params.u * params.lambda.asDiagonal()) * params.u.transpose();
  for (int k = 0; k < static_cast<int>(dyads_.size()); ++k) eta[k] += m(dyads_[k].i, dyads_[k].j);
  return eta;
}

double GlnemModel::linear_predictor_at(const ConstrainedParams& params, Dyad dyad) const {
  double eta = 0.0;
  for (int c = 0; c < data_.covariates(); ++c) eta += data_.x[c](dyad.i, dyad.j) * params.beta[c];
  for (Eigen::Index h = 0; h < params.lambda.size(); ++h) {
    eta += params.lambda[h] * params.u(dyad.i, h) * params.u(dyad.j, h);
  }
  return eta;
}

Eigen::VectorXd GlnemModel::latent_column(const Eigen::MatrixXd& u, int h) const {
  Eigen::VectorXd out(dyads_.size());
  for (int k = 0; k < static_cast<int>(dyads_.size()); ++k) out[k] = u(dyads_[k].i, h) * u(dyads_[k].j, h);
  return out;
}

double GlnemModel::log_likelihood(const Eigen::VectorXd& eta, const AuxParams& aux,
                                  Eigen::VectorXd* per_dyad) const {
  if (per_dyad) per_dyad->resize(eta.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    const double v = dyad_density(static_cast<int>(k), eta[k], aux, false).value;
    total += v;
    if (per_dyad) (*per_dyad)[k] = v;
  }
  return total;
}

double GlnemModel::log_likelihood(const ConstrainedParams& params, Eigen::VectorXd* per_dyad) const {
  return log_likelihood(linear_predictor(params), params.aux, per_dyad);
}

double GlnemModel::log_posterior(const Eigen::VectorXd& q, std::span<const int> z,
                                 Eigen::VectorXd* grad) const {
  const int n = layout_.nodes();
  const int d = layout_.dims();
  const int count = static_cast<int>(dyads_.size());
  if (q.size() != layout_.size()) throw NumericError("log_posterior: parameter vector has the wrong size");

  CenteredQr qr;
  ConstrainedParams params;
  if (d > 0) {
    qr = centered_qr(Eigen::MatrixXd(layout_.b(q)));
    params.u = qr.basis();
  } else {
    params.u.resize(n, 0);
  }
  const Eigen::VectorXd scale = lambda_scale(q);
  params.lambda = lambda_from(q, z);
  params.beta = layout_.beta(q);
  params.aux = aux_from(q);

  const Eigen::VectorXd eta = linear_predictor(params);
  const bool with_aux = grad && (layout_.samples_phi() || layout_.samples_power());

  double loglik = 0.0;
  Eigen::VectorXd g_eta(grad ? count : 0);
  double g_phi = 0.0;
  double g_power = 0.0;
  for (int k = 0; k < count; ++k) {
    const DensityGradient g = dyad_density(k, eta[k], params.aux, with_aux);
    loglik += g.value;
    if (grad) {
      g_eta[k] = g.d_mu;
      g_phi += g.d_phi;
      g_power += g.d_power;
    }
  }

  if (!grad) {
    return loglik + log_prior_unconstrained(layout_, q, z, hyper_, nullptr).total();
  }

  grad->setZero(layout_.size());
  layout_.beta(*grad) = xd_.transpose() * g_eta;

  if (d > 0) {
    // Symmetric n x n matrix of dyad gradients; a self-dyad counts twice so
    // that G U gives the adjoint of U and u_h' G u_h / 2 that of lambda_h.
    thread_local Eigen::MatrixXd g;
    g.setZero(n, n);
    for (int k = 0; k < count; ++k) {
      const int i = dyads_[k].i;
      const int j = dyads_[k].j;
      g(i, j) += g_eta[k];
      g(j, i) += g_eta[k];
    }
    const Eigen::MatrixXd gu = g * params.u;
    const Eigen::VectorXd g_lambda = 0.5 * params.u.cwiseProduct(gu).colwise().sum().transpose();
    const Eigen::MatrixXd u_bar = gu * params.lambda.asDiagonal();
    layout_.b(*grad) = centered_orthogonalize_pullback(qr, u_bar);

    const auto lt = layout_.lambda_tilde(q);
    auto g_lt = layout_.lambda_tilde(*grad);
    for (int h = 0; h < d; ++h) {
      if (!z[h]) continue;
      g_lt[h] = scale[h] * g_lambda[h];
      if (layout_.has_stick_block()) layout_.log_sigma(*grad)[h] = scale[h] * lt[h] * g_lambda[h];
    }
  }

  if (layout_.samples_phi()) (*grad)[layout_.log_phi_offset()] = g_phi * params.aux.phi;
  if (layout_.samples_power()) {
    const double s = logistic(q[layout_.logit_power_offset()]);
    (*grad)[layout_.logit_power_offset()] = g_power * (kMaxPower - kMinPower) * s * (1.0 - s);
  }

  const double lp = loglik + log_prior_unconstrained(layout_, q, z, hyper_, grad).total();
  if (!grad->allFinite()) {
    for (Eigen::Index c = 0; c < grad->size(); ++c) {
      if (!std::isfinite((*grad)[c])) {
        throw NumericError("non-finite gradient at coordinate " +
                           layout_.coordinate_name(static_cast<int>(c)));
      }
    }
  }
  return lp;
}

}  // namespace glnem
