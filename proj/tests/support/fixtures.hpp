#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "glnem/families.hpp"
#include "glnem/model.hpp"
#include "glnem/network.hpp"
#include "glnem/random.hpp"

namespace fixture {

inline glnem::ModelSpec spec_for(glnem::FamilyKind kind, glnem::LambdaPrior prior = glnem::LambdaPrior::SpikeSlabIbp) {
  glnem::ModelSpec s;
  s.family.kind = kind;
  s.link = glnem::canonical_link(kind);
  s.aux = {1.3, 1.4};
  s.lambda_prior = prior;
  return s;
}

// Symmetric network: intercept plus (p - 1) uniform covariates and a
// response drawn from the family at a modest random linear predictor.
inline glnem::NetworkData random_network(int n, int p, const glnem::ModelSpec& spec, glnem::Rng& rng,
                                         bool diagonal = false) {
  glnem::NetworkData data;
  data.diagonal_observed = diagonal;
  data.y = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < p; ++k) data.x.push_back(Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double eta = 0.0;
      for (int k = 0; k < p; ++k) {
        const double v = k == 0 ? 1.0 : 2.0 * glnem::uniform01(rng) - 1.0;
        data.x[k](i, j) = data.x[k](j, i) = v;
        eta += 0.3 * v;
      }
      eta += 0.5 * glnem::standard_normal(rng);
      const double y = glnem::sample(spec.family, glnem::inverse_link(spec.link, eta), spec.aux, rng);
      data.y(i, j) = data.y(j, i) = (i == j && !diagonal) ? 0.0 : y;
    }
  }
  return data;
}

inline Eigen::VectorXd random_q(int size, glnem::Rng& rng, double scale) {
  Eigen::VectorXd q(size);
  for (int k = 0; k < size; ++k) q[k] = scale * glnem::standard_normal(rng);
  return q;
}

// Total probability of a Tweedie law: the zero atom plus the integral of the
// continuous part over (0, 50 mu].
inline double tweedie_total_mass(double mu, double phi, double power) {
  glnem::Family f;
  f.kind = glnem::FamilyKind::Tweedie;
  const glnem::AuxParams aux{phi, power};
  auto dens = [&](double y) { return y <= 0.0 ? 0.0 : std::exp(glnem::log_density(f, y, mu, aux)); };
  const double upper = 50.0 * mu;
  const int pieces = 400;
  const double w = upper / pieces;
  boost::math::quadrature::tanh_sinh<double> ts;
  double mass = std::exp(glnem::log_density(f, 0.0, mu, aux));
  mass += ts.integrate(dens, 0.0, w);  // endpoint singularity when alpha < 1
  for (int k = 1; k < pieces; ++k) {
    mass += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(dens, k * w, (k + 1) * w, 10, 1e-10);
  }
  return mass;
}

}  // namespace fixture
