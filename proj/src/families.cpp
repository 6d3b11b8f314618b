#include "glnem/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "glnem/errors.hpp"
#include "glnem/special.hpp"

namespace glnem {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
// Terms of the Tweedie series below max - kTweedieDrop are dropped.
constexpr double kTweedieDrop = 37.0;
constexpr int kTweedieMaxTerms = 10'000'000;
// Below this count, rising-factorial sums are cheaper than lgamma/digamma.
constexpr double kDirectSumLimit = 64.0;

bool is_integer(double y) { return std::floor(y) == y; }

double clamp_eta(double eta) { return std::clamp(eta, -kEtaClamp, kEtaClamp); }

// lgamma(y + r) - lgamma(r) for non-negative integer y.
double log_rising(double r, double y) {
  if (y < kDirectSumLimit) {
    double acc = 0.0;
    for (int m = 0; m < static_cast<int>(y); ++m) acc += std::log(r + m);
    return acc;
  }
  return lgamma_safe(y + r) - lgamma_safe(r);
}

// digamma(y + r) - digamma(r) for non-negative integer y.
double digamma_rising(double r, double y) {
  if (y < kDirectSumLimit) {
    double acc = 0.0;
    for (int m = 0; m < static_cast<int>(y); ++m) acc += 1.0 / (r + m);
    return acc;
  }
  return boost::math::digamma(y + r) - boost::math::digamma(r);
}

[[noreturn]] void support_error(FamilyKind family, const std::string& what) {
  std::ostringstream msg;
  msg << to_string(family) << " family: " << what;
  throw DomainError(msg.str());
}

}  // namespace

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Bernoulli: return "bernoulli";
    case FamilyKind::Gaussian: return "gaussian";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::NegativeBinomial: return "negbin";
    case FamilyKind::Tweedie: return "tweedie";
  }
  return "unknown";
}

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::Identity: return "identity";
    case LinkKind::Log: return "log";
    case LinkKind::Logit: return "logit";
    case LinkKind::Probit: return "probit";
    case LinkKind::CLogLog: return "cloglog";
  }
  return "unknown";
}

FamilyKind parse_family(std::string_view name) {
  if (name == "bernoulli") return FamilyKind::Bernoulli;
  if (name == "gaussian") return FamilyKind::Gaussian;
  if (name == "poisson") return FamilyKind::Poisson;
  if (name == "negbin" || name == "negative_binomial") return FamilyKind::NegativeBinomial;
  if (name == "tweedie") return FamilyKind::Tweedie;
  throw ConfigError("unknown family '" + std::string(name) + "'");
}

LinkKind parse_link(std::string_view name) {
  if (name == "identity") return LinkKind::Identity;
  if (name == "log") return LinkKind::Log;
  if (name == "logit") return LinkKind::Logit;
  if (name == "probit") return LinkKind::Probit;
  if (name == "cloglog") return LinkKind::CLogLog;
  throw ConfigError("unknown link '" + std::string(name) + "'");
}

LinkKind canonical_link(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Bernoulli: return LinkKind::Logit;
    case FamilyKind::Gaussian: return LinkKind::Identity;
    default: return LinkKind::Log;
  }
}

bool link_compatible(FamilyKind family, LinkKind link) {
  switch (family) {
    case FamilyKind::Bernoulli:
      return link == LinkKind::Logit || link == LinkKind::Probit || link == LinkKind::CLogLog;
    case FamilyKind::Gaussian:
      return link == LinkKind::Identity || link == LinkKind::Log;
    default:
      return link == LinkKind::Log;
  }
}

double inverse_link(LinkKind link, double eta) {
  switch (link) {
    case LinkKind::Identity:
      return eta;
    case LinkKind::Log:
      return std::exp(clamp_eta(eta));
    case LinkKind::Logit: {
      const double e = clamp_eta(eta);
      return e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
    }
    case LinkKind::Probit:
      return std::clamp(0.5 * std::erfc(-eta / kSqrt2), kMuFloor, 1.0 - kMuFloor);
    case LinkKind::CLogLog:
      return std::clamp(-std::expm1(-std::exp(clamp_eta(eta))), kMuFloor, 1.0 - kMuFloor);
  }
  return eta;
}

double inverse_link_derivative(LinkKind link, double eta) {
  switch (link) {
    case LinkKind::Identity:
      return 1.0;
    case LinkKind::Log:
      return std::abs(eta) > kEtaClamp ? 0.0 : std::exp(eta);
    case LinkKind::Logit: {
      if (std::abs(eta) > kEtaClamp) return 0.0;
      const double mu = inverse_link(LinkKind::Logit, eta);
      return mu * (1.0 - mu);
    }
    case LinkKind::Probit: {
      const double raw = 0.5 * std::erfc(-eta / kSqrt2);
      if (raw < kMuFloor || raw > 1.0 - kMuFloor) return 0.0;
      return std::exp(-0.5 * eta * eta - kLogSqrt2Pi);
    }
    case LinkKind::CLogLog: {
      if (std::abs(eta) > kEtaClamp) return 0.0;
      const double raw = -std::expm1(-std::exp(eta));
      if (raw < kMuFloor || raw > 1.0 - kMuFloor) return 0.0;
      return std::exp(eta - std::exp(eta));
    }
  }
  return 1.0;
}

double link(LinkKind link, double mu) {
  switch (link) {
    case LinkKind::Identity: return mu;
    case LinkKind::Log: return std::log(mu);
    case LinkKind::Logit: return std::log(mu) - std::log1p(-mu);
    case LinkKind::Probit: return -kSqrt2 * boost::math::erfc_inv(2.0 * mu);
    case LinkKind::CLogLog: return std::log(-std::log1p(-mu));
  }
  return mu;
}

void check_support(FamilyKind family, double y, double mu, const AuxParams& aux) {
  if (!std::isfinite(y)) support_error(family, "non-finite observation");
  if (!std::isfinite(mu)) support_error(family, "non-finite mean");
  switch (family) {
    case FamilyKind::Bernoulli:
      if (y != 0.0 && y != 1.0) support_error(family, "observation must be 0 or 1");
      if (!(mu > 0.0 && mu < 1.0)) support_error(family, "mean must lie in (0, 1)");
      break;
    case FamilyKind::Gaussian:
      if (!(aux.phi > 0.0)) support_error(family, "variance must be positive");
      break;
    case FamilyKind::Poisson:
      if (y < 0.0 || !is_integer(y)) support_error(family, "observation must be a non-negative integer");
      if (!(mu > 0.0)) support_error(family, "mean must be positive");
      break;
    case FamilyKind::NegativeBinomial:
      if (y < 0.0 || !is_integer(y)) support_error(family, "observation must be a non-negative integer");
      if (!(mu > 0.0)) support_error(family, "mean must be positive");
      if (!(aux.phi > 0.0)) support_error(family, "dispersion must be positive");
      break;
    case FamilyKind::Tweedie:
      if (y < 0.0) support_error(family, "observation must be non-negative");
      if (!(mu > 0.0)) support_error(family, "mean must be positive");
      if (!(aux.phi > 0.0)) support_error(family, "dispersion must be positive");
      if (!(aux.power > 1.0 && aux.power < 2.0)) support_error(family, "power must lie in (1, 2)");
      break;
  }
}

TweedieSeries tweedie_series(double y, double phi, double power, bool with_moments) {
  const double p1 = power - 1.0;
  const double p2 = 2.0 - power;
  const double alpha = p2 / p1;
  const double log_z = alpha * std::log(y) - std::log(phi) / p1 - alpha * std::log(p1) - std::log(p2);
  auto term = [&](int j) {
    return j * log_z - lgamma_safe(j + 1.0) - lgamma_safe(j * alpha);
  };

  const double start = std::max(1.0, std::pow(y, p2) / (phi * p2));
  if (!std::isfinite(start) || start > kTweedieMaxTerms) {
    std::ostringstream msg;
    msg << "tweedie series: dominant index " << start << " out of range (y=" << y << ", phi=" << phi
        << ", power=" << power << ")";
    throw NumericError(msg.str());
  }
  int peak = static_cast<int>(std::lround(start));
  double peak_term = term(peak);
  // log W_j is concave in j; climb to the discrete maximum.
  while (true) {
    const double next = term(peak + 1);
    if (next <= peak_term) break;
    ++peak;
    peak_term = next;
  }
  while (peak > 1) {
    const double prev = term(peak - 1);
    if (prev <= peak_term) break;
    --peak;
    peak_term = prev;
  }

  const double floor_term = peak_term - kTweedieDrop;
  int lo = peak;
  while (lo > 1 && term(lo - 1) >= floor_term) --lo;
  int hi = peak;
  while (term(hi + 1) >= floor_term) {
    ++hi;
    if (hi - lo > kTweedieMaxTerms) {
      std::ostringstream msg;
      msg << "tweedie series: window exceeded " << kTweedieMaxTerms << " terms (y=" << y
          << ", phi=" << phi << ", power=" << power << ")";
      throw NumericError(msg.str());
    }
  }

  double sum = 0.0;
  double sum_j = 0.0;
  double sum_jpsi = 0.0;
  for (int j = lo; j <= hi; ++j) {
    const double w = std::exp(term(j) - peak_term);
    sum += w;
    if (with_moments) {
      sum_j += w * j;
      sum_jpsi += w * j * boost::math::digamma(j * alpha);
    }
  }
  TweedieSeries out;
  out.log_sum = peak_term + std::log(sum);
  out.first = lo;
  out.last = hi;
  if (with_moments) {
    out.mean_index = sum_j / sum;
    out.mean_digamma = sum_jpsi / sum;
  }
  return out;
}

double tweedie_log_normalizer(double y, double phi, double power) {
  if (!(y > 0.0)) throw DomainError("tweedie family: normalizer requires y > 0");
  if (!(phi > 0.0)) throw DomainError("tweedie family: dispersion must be positive");
  if (!(power > 1.0 && power < 2.0)) throw DomainError("tweedie family: power must lie in (1, 2)");
  return tweedie_series(y, phi, power, false).log_sum - std::log(y);
}

DensityGradient log_density_gradient(FamilyKind family, double y, double mu, const AuxParams& aux,
                                     bool with_aux) {
  DensityGradient g;
  const double phi = aux.phi;
  switch (family) {
    case FamilyKind::Bernoulli:
      g.value = y == 1.0 ? std::log(mu) : std::log1p(-mu);
      g.d_mu = y == 1.0 ? 1.0 / mu : -1.0 / (1.0 - mu);
      break;
    case FamilyKind::Gaussian: {
      const double r = y - mu;
      g.value = -kLogSqrt2Pi - 0.5 * std::log(phi) - 0.5 * r * r / phi;
      g.d_mu = r / phi;
      if (with_aux) g.d_phi = -0.5 / phi + 0.5 * r * r / (phi * phi);
      break;
    }
    case FamilyKind::Poisson:
      g.value = (y > 0.0 ? y * std::log(mu) : 0.0) - mu - log_factorial(y);
      g.d_mu = y / mu - 1.0;
      break;
    case FamilyKind::NegativeBinomial: {
      const double r = 1.0 / phi;
      const double log_r_mu = std::log(r + mu);
      g.value = log_rising(r, y) - log_factorial(y) - r * std::log1p(mu / r) +
                (y > 0.0 ? y * (std::log(mu) - log_r_mu) : 0.0);
      g.d_mu = y / mu - (y + r) / (r + mu);
      if (with_aux) {
        const double d_r = digamma_rising(r, y) - std::log1p(mu / r) + (mu - y) / (r + mu);
        g.d_phi = -r * r * d_r;
      }
      break;
    }
    case FamilyKind::Tweedie: {
      const double p = aux.power;
      const double p1 = p - 1.0;
      const double p2 = 2.0 - p;
      const double log_mu = std::log(mu);
      const double mu_p1 = std::exp(p1 * log_mu);  // mu^{p-1}
      const double mu_p2 = std::exp(p2 * log_mu);  // mu^{2-p}
      const double t2 = -mu_p2 / (phi * p2);
      g.d_mu = (y - mu) / (phi * mu_p1 * mu);
      if (y == 0.0) {
        g.value = t2;
        if (with_aux) {
          g.d_phi = -t2 / phi;
          g.d_power = mu_p2 / phi * (log_mu / p2 - 1.0 / (p2 * p2));
        }
        break;
      }
      const double t1 = -y / (phi * p1 * mu_p1);
      const TweedieSeries series = tweedie_series(y, phi, p, with_aux);
      g.value = t1 + t2 + series.log_sum - std::log(y);
      if (with_aux) {
        const double alpha = p2 / p1;
        const double d_alpha = -1.0 / (p1 * p1);  // also d(1/(p-1))/dp
        g.d_phi = -(t1 + t2) / phi - series.mean_index / (p1 * phi);
        const double d_log_z = d_alpha * (std::log(y) - std::log(p1)) - alpha / p1 -
                               d_alpha * std::log(phi) + 1.0 / p2;
        const double d_t1 = y / (phi * mu_p1) * (log_mu / p1 + 1.0 / (p1 * p1));
        const double d_t2 = mu_p2 / phi * (log_mu / p2 - 1.0 / (p2 * p2));
        g.d_power = d_t1 + d_t2 + series.mean_index * d_log_z - d_alpha * series.mean_digamma;
      }
      break;
    }
  }
  return g;
}

double log_density(const Family& family, double y, double mu, const AuxParams& aux) {
  check_support(family.kind, y, mu, aux);
  return log_density_gradient(family.kind, y, mu, aux, false).value;
}

DensityGradient log_density_eta(FamilyKind family, LinkKind link, double y, double eta,
                                const AuxParams& aux, bool with_aux) {
  if (family == FamilyKind::Bernoulli && link == LinkKind::Logit) {
    DensityGradient g;
    const double e = clamp_eta(eta);
    // log(1 + e^e) computed without overflow.
    const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    g.value = y * e - softplus;
    g.d_mu = std::abs(eta) > kEtaClamp ? 0.0 : y - inverse_link(LinkKind::Logit, e);
    return g;
  }
  if (family == FamilyKind::Poisson && link == LinkKind::Log) {
    DensityGradient g;
    const double e = clamp_eta(eta);
    const double mu = std::exp(e);
    g.value = y * e - mu - log_factorial(y);
    g.d_mu = std::abs(eta) > kEtaClamp ? 0.0 : y - mu;
    return g;
  }
  if (family == FamilyKind::Gaussian && link == LinkKind::Identity) {
    return log_density_gradient(family, y, eta, aux, with_aux);
  }
  const double mu = inverse_link(link, eta);
  DensityGradient g = log_density_gradient(family, y, mu, aux, with_aux);
  g.d_mu *= inverse_link_derivative(link, eta);
  return g;
}

double variance(const Family& family, double mu, const AuxParams& aux) {
  switch (family.kind) {
    case FamilyKind::Bernoulli: return mu * (1.0 - mu);
    case FamilyKind::Gaussian: return aux.phi;
    case FamilyKind::Poisson: return mu;
    case FamilyKind::NegativeBinomial: return mu + aux.phi * mu * mu;
    case FamilyKind::Tweedie: return aux.phi * std::pow(mu, aux.power);
  }
  return 0.0;
}

namespace {

double poisson_draw(Rng& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

}  // namespace

double sample(const Family& family, double mu, const AuxParams& aux, Rng& rng) {
  switch (family.kind) {
    case FamilyKind::Bernoulli:
      return uniform01(rng) < mu ? 1.0 : 0.0;
    case FamilyKind::Gaussian:
      return mu + std::sqrt(aux.phi) * standard_normal(rng);
    case FamilyKind::Poisson:
      return poisson_draw(rng, mu);
    case FamilyKind::NegativeBinomial: {
      if (aux.phi <= 0.0) return poisson_draw(rng, mu);
      const double r = 1.0 / aux.phi;
      return poisson_draw(rng, gamma_draw(rng, r, mu / r));
    }
    case FamilyKind::Tweedie: {
      // Compound Poisson-gamma: N ~ Poisson(rate), Y | N ~ Gamma(N * shape, scale).
      const double p1 = aux.power - 1.0;
      const double p2 = 2.0 - aux.power;
      const double rate = std::pow(mu, p2) / (aux.phi * p2);
      const double count = poisson_draw(rng, rate);
      if (count == 0.0) return 0.0;
      const double shape = p2 / p1;
      const double scale = aux.phi * p1 * std::pow(mu, p1);
      return gamma_draw(rng, count * shape, scale);
    }
  }
  return 0.0;
}

double log_factorial(double y) {
  static constexpr int kTable = 1024;
  static const std::array<double, kTable> table = [] {
    std::array<double, kTable> t{};
    t[0] = 0.0;
    for (int k = 1; k < kTable; ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
    return t;
  }();
  if (y >= 0.0 && y < kTable && is_integer(y)) return table[static_cast<int>(y)];
  return lgamma_safe(y + 1.0);
}

}  // namespace glnem
