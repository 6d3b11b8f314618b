#pragma once

#include <string>
#include <string_view>

#include "glnem/random.hpp"

namespace glnem {

enum class FamilyKind { Bernoulli, Gaussian, Poisson, NegativeBinomial, Tweedie };
enum class LinkKind { Identity, Log, Logit, Probit, CLogLog };

inline constexpr double kMinPower = 1.01;
inline constexpr double kMaxPower = 1.99;
// Exponential-type links clamp the predictor to this range before inversion.
inline constexpr double kEtaClamp = 30.0;
// Probability-valued means are kept inside [kMuFloor, 1 - kMuFloor].
inline constexpr double kMuFloor = 1e-12;

struct Family {
  FamilyKind kind = FamilyKind::Bernoulli;
  // When false, the dispersion is sampled. Bernoulli and Poisson always have
  // phi = 1 and ignore this flag.
  bool dispersion_known = false;

  bool has_dispersion() const {
    return kind == FamilyKind::Gaussian || kind == FamilyKind::NegativeBinomial ||
           kind == FamilyKind::Tweedie;
  }
  bool samples_dispersion() const { return has_dispersion() && !dispersion_known; }
  bool samples_power() const { return kind == FamilyKind::Tweedie; }
};

struct AuxParams {
  double phi = 1.0;    // dispersion; the variance for the Gaussian family
  double power = 1.5;  // Tweedie variance power in [kMinPower, kMaxPower]
};

std::string_view to_string(FamilyKind kind);
std::string_view to_string(LinkKind kind);
FamilyKind parse_family(std::string_view name);
LinkKind parse_link(std::string_view name);
LinkKind canonical_link(FamilyKind kind);
bool link_compatible(FamilyKind family, LinkKind link);

double inverse_link(LinkKind link, double eta);
// d mu / d eta, consistent with the clamping applied in inverse_link.
double inverse_link_derivative(LinkKind link, double eta);
double link(LinkKind link, double mu);

// Throws DomainError naming the family if (y, mu, aux) is outside the support.
void check_support(FamilyKind family, double y, double mu, const AuxParams& aux);

double log_density(const Family& family, double y, double mu, const AuxParams& aux);

// Log density together with its partial derivatives in the mean and the
// auxiliary parameters. The aux derivatives are filled only on request.
struct DensityGradient {
  double value = 0.0;
  double d_mu = 0.0;
  double d_phi = 0.0;
  double d_power = 0.0;
};
DensityGradient log_density_gradient(FamilyKind family, double y, double mu, const AuxParams& aux,
                                     bool with_aux);

// Log density and d/d eta for a (family, link) pair evaluated at the linear
// predictor. Canonical pairs use closed forms that stay finite in the tails.
DensityGradient log_density_eta(FamilyKind family, LinkKind link, double y, double eta,
                                const AuxParams& aux, bool with_aux);

// k(y, phi) of the Tweedie density for y > 0: log of the Dunn-Smyth series
// sum_j W_j minus log y. The density is exp{(y theta - b(theta)) / phi + k}.
double tweedie_log_normalizer(double y, double phi, double power);

struct TweedieSeries {
  double log_sum = 0.0;      // log sum_j W_j
  double mean_index = 0.0;   // E_w[j] under weights W_j / sum W
  double mean_digamma = 0.0; // E_w[j * digamma(j * alpha)]
  int first = 0;
  int last = 0;
};
TweedieSeries tweedie_series(double y, double phi, double power, bool with_moments);

double variance(const Family& family, double mu, const AuxParams& aux);

double sample(const Family& family, double mu, const AuxParams& aux, Rng& rng);

// ln(y!) for non-negative integer-valued y, tabulated for small arguments.
double log_factorial(double y);

}  // namespace glnem
