#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "glnem/errors.hpp"
#include "glnem/families.hpp"

using namespace glnem;

namespace {

Family fam(FamilyKind k) {
  Family f;
  f.kind = k;
  return f;
}

const std::vector<std::pair<FamilyKind, LinkKind>> kPairs = {
    {FamilyKind::Bernoulli, LinkKind::Logit},   {FamilyKind::Bernoulli, LinkKind::Probit},
    {FamilyKind::Bernoulli, LinkKind::CLogLog}, {FamilyKind::Gaussian, LinkKind::Identity},
    {FamilyKind::Gaussian, LinkKind::Log},      {FamilyKind::Poisson, LinkKind::Log},
    {FamilyKind::NegativeBinomial, LinkKind::Log}, {FamilyKind::Tweedie, LinkKind::Log},
};

}  // namespace

TEST_CASE("inverse_link examples") {
  CHECK(inverse_link(LinkKind::Logit, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(inverse_link(LinkKind::Log, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(inverse_link(LinkKind::Probit, 1.6449) - 0.95) < 1e-4);
  CHECK(std::abs(inverse_link(LinkKind::Probit, 1.6449) - oracle::normal_cdf_series(1.6449)) < 1e-12);
  CHECK(inverse_link(LinkKind::Identity, -3.5) == -3.5);
}

TEST_CASE("inverse links are increasing and clamp exponential overflow") {
  for (LinkKind l : {LinkKind::Identity, LinkKind::Log, LinkKind::Logit, LinkKind::Probit, LinkKind::CLogLog}) {
    double prev = -INFINITY;
    for (double eta = -20.0; eta <= 20.0; eta += 0.01) {
      const double mu = inverse_link(l, eta);
      CHECK(std::isfinite(mu));
      CHECK(mu >= prev);
      prev = mu;
    }
  }
  CHECK(inverse_link(LinkKind::Log, 1000.0) == doctest::Approx(std::exp(30.0)));
  CHECK(inverse_link(LinkKind::Logit, 1000.0) < 1.0);
  CHECK(inverse_link(LinkKind::Probit, -1000.0) >= kMuFloor);
  CHECK(inverse_link(LinkKind::Probit, 1000.0) <= 1.0 - kMuFloor);
  CHECK(inverse_link(LinkKind::CLogLog, -1000.0) >= kMuFloor);
  CHECK(inverse_link(LinkKind::CLogLog, 1000.0) <= 1.0 - kMuFloor);
}

TEST_CASE("link round trip away from saturation") {
  // Probability links are tested where the mean is not saturated: mu in
  // [1e-10, 1 - 1e-4]. Beyond that 1 - mu carries fewer than 12 digits.
  for (LinkKind l : {LinkKind::Identity, LinkKind::Log, LinkKind::Logit, LinkKind::Probit, LinkKind::CLogLog}) {
    int tested = 0;
    for (double eta = -20.0; eta <= 20.0; eta += 0.05) {
      const double mu = inverse_link(l, eta);
      const bool prob = l == LinkKind::Logit || l == LinkKind::Probit || l == LinkKind::CLogLog;
      if (prob && (mu < 1e-10 || mu > 1.0 - 1e-4)) continue;
      ++tested;
      CHECK(std::abs(link(l, mu) - eta) <= 1e-10 * std::max(1.0, std::abs(eta)));
    }
    CHECK(tested > 100);
  }
}

TEST_CASE("inverse_link_derivative matches finite differences") {
  for (LinkKind l : {LinkKind::Identity, LinkKind::Log, LinkKind::Logit, LinkKind::Probit, LinkKind::CLogLog}) {
    for (double eta = -4.0; eta <= 4.0; eta += 0.37) {
      const double h = 1e-6;
      const double fd = (inverse_link(l, eta + h) - inverse_link(l, eta - h)) / (2 * h);
      CHECK(inverse_link_derivative(l, eta) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("log_density examples") {
  CHECK(log_density(fam(FamilyKind::Bernoulli), 1.0, 0.5, {}) == doctest::Approx(std::log(0.5)));
  CHECK(log_density(fam(FamilyKind::Poisson), 0.0, 2.0, {}) == doctest::Approx(-2.0));
  CHECK(log_density(fam(FamilyKind::Tweedie), 0.0, 1.0, {1.0, 1.5}) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("log_density agrees with distribution oracles") {
  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double mu = std::exp(4.0 * u(rng) - 2.0);
    const double phi = std::exp(3.0 * u(rng) - 1.5);
    const double y = std::floor(10.0 * u(rng));
    CHECK(log_density(fam(FamilyKind::Poisson), y, mu, {}) == doctest::Approx(oracle::poisson_log_pmf(y, mu)).epsilon(1e-12));
    CHECK(log_density(fam(FamilyKind::NegativeBinomial), y, mu, {phi, 1.5}) ==
          doctest::Approx(oracle::nb2_log_pmf(y, mu, phi)).epsilon(1e-11));
    const double yg = 6.0 * u(rng) - 3.0;
    CHECK(log_density(fam(FamilyKind::Gaussian), yg, mu, {phi, 1.5}) ==
          doctest::Approx(oracle::normal_log_pdf(yg, mu, phi)).epsilon(1e-12));
    const double p = u(rng) * 0.98 + 0.01;
    CHECK(log_density(fam(FamilyKind::Bernoulli), 0.0, p, {}) == doctest::Approx(std::log1p(-p)).epsilon(1e-13));
  }
}

TEST_CASE("support violations name the family") {
  auto message = [](FamilyKind k, double y, double mu) {
    try {
      log_density(fam(k), y, mu, {1.0, 1.5});
    } catch (const DomainError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(FamilyKind::Bernoulli, 2.0, 0.5).find("bernoulli") != std::string::npos);
  CHECK(message(FamilyKind::Poisson, 1.5, 1.0).find("poisson") != std::string::npos);
  CHECK(message(FamilyKind::NegativeBinomial, -1.0, 1.0).find("negbin") != std::string::npos);
  CHECK(message(FamilyKind::Tweedie, -0.1, 1.0).find("tweedie") != std::string::npos);
  CHECK(message(FamilyKind::Poisson, 1.0, -1.0).find("poisson") != std::string::npos);
  CHECK(message(FamilyKind::Gaussian, 1.0, 1.0).empty());
}

TEST_CASE("tweedie series equals brute-force latent count summation") {
  Rng rng = make_rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Family f = fam(FamilyKind::Tweedie);
  int positive = 0;
  for (int k = 0; k < 500; ++k) {
    const double mu = std::exp(4.0 * u(rng) - 2.0);
    const double phi = std::exp(3.0 * u(rng) - 1.5);
    const double power = kMinPower + (kMaxPower - kMinPower) * u(rng);
    double y = sample(f, mu, {phi, power}, rng);
    if (y == 0.0) y = mu * (0.1 + u(rng));
    ++positive;
    const double got = log_density(f, y, mu, {phi, power});
    const double want = oracle::tweedie_brute_log_density(y, mu, phi, power);
    INFO("y=" << y << " mu=" << mu << " phi=" << phi << " power=" << power);
    CHECK(std::abs(std::expm1(got - want)) <= 1e-8);
  }
  CHECK(positive == 500);
  // The fixed example: y = 1, phi = 1, power = 1.5.
  CHECK(std::abs(std::expm1(log_density(f, 1.0, 1.0, {1.0, 1.5}) - oracle::tweedie_brute_log_density(1.0, 1.0, 1.0, 1.5))) <= 1e-8);
}

TEST_CASE("tweedie total mass is one") {
  CHECK(fixture::tweedie_total_mass(1.0, 1.0, 1.5) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fixture::tweedie_total_mass(3.0, 0.5, 1.3) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fixture::tweedie_total_mass(0.5, 2.0, 1.8) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fixture::tweedie_total_mass(1.0, 1.0, 1.01) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("tweedie normalizer rejects non-positive y") {
  CHECK_THROWS(tweedie_log_normalizer(0.0, 1.0, 1.5));
}

TEST_CASE("variance examples") {
  CHECK(variance(fam(FamilyKind::Bernoulli), 0.5, {}) == doctest::Approx(0.25));
  CHECK(variance(fam(FamilyKind::NegativeBinomial), 2.0, {0.5, 1.5}) == doctest::Approx(4.0));
  CHECK(variance(fam(FamilyKind::Tweedie), 2.0, {10.0, 1.6}) == doctest::Approx(10.0 * std::pow(2.0, 1.6)));
  CHECK(variance(fam(FamilyKind::Gaussian), 7.0, {9.0, 1.5}) == doctest::Approx(9.0));
  CHECK(variance(fam(FamilyKind::Poisson), 3.0, {}) == doctest::Approx(3.0));
}

TEST_CASE("sample examples") {
  Rng rng = make_rng(5);
  for (int k = 0; k < 1000; ++k) CHECK(sample(fam(FamilyKind::Bernoulli), 1.0, {}, rng) == 1.0);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) sum += sample(fam(FamilyKind::Poisson), 4.0, {}, rng);
  CHECK(std::abs(sum / n - 4.0) < 0.05);
  int zeros = 0;
  for (int k = 0; k < n; ++k) zeros += sample(fam(FamilyKind::Tweedie), 1.0, {1.0, 1.5}, rng) == 0.0;
  CHECK(std::abs(static_cast<double>(zeros) / n - std::exp(-2.0)) < 0.01);
}

TEST_CASE("sample moments match mean and variance within 4 standard errors") {
  Rng rng = make_rng(77);
  struct Case {
    FamilyKind k;
    double mu;
    AuxParams aux;
  };
  const std::vector<Case> cases = {{FamilyKind::Bernoulli, 0.3, {}},
                                   {FamilyKind::Gaussian, -1.5, {9.0, 1.5}},
                                   {FamilyKind::Poisson, 2.5, {}},
                                   {FamilyKind::NegativeBinomial, 2.0, {0.5, 1.5}},
                                   {FamilyKind::Tweedie, 2.0, {1.5, 1.6}},
                                   {FamilyKind::Tweedie, 0.7, {0.8, 1.2}}};
  const int n = 100000;
  for (const Case& c : cases) {
    const Family f = fam(c.k);
    std::vector<double> x(n);
    for (double& v : x) v = sample(f, c.mu, c.aux, rng);
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
      m2 += (v - m) * (v - m);
      m4 += std::pow(v - m, 4);
    }
    m2 /= n - 1;
    m4 /= n;
    const double var = variance(f, c.mu, c.aux);
    INFO("family " << to_string(c.k));
    CHECK(std::abs(m - c.mu) <= 4.0 * std::sqrt(var / n));
    CHECK(std::abs(m2 - var) <= 4.0 * std::sqrt((m4 - m2 * m2) / n));
  }
}

TEST_CASE("eta gradients match central finite differences") {
  Rng rng = make_rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& [k, l] : kPairs) {
    const Family f = fam(k);
    for (int rep = 0; rep < 20; ++rep) {
      const double eta = l == LinkKind::Log ? 3.0 * u(rng) - 1.5 : 5.0 * u(rng) - 2.5;
      AuxParams aux{std::exp(2.0 * u(rng) - 1.0), 1.05 + 0.9 * u(rng)};
      double y = sample(f, inverse_link(l, eta), aux, rng);
      if (k == FamilyKind::Gaussian && l == LinkKind::Log) y = std::abs(y);
      const DensityGradient g = log_density_eta(k, l, y, eta, aux, true);
      const double h = 1e-5;
      auto val = [&](double e, AuxParams a) { return log_density_eta(k, l, y, e, a, false).value; };
      INFO(to_string(k) << "/" << to_string(l) << " y=" << y << " eta=" << eta);
      CHECK(g.value == doctest::Approx(log_density(f, y, inverse_link(l, eta), aux)).epsilon(1e-10));
      const double fd_eta = (val(eta + h, aux) - val(eta - h, aux)) / (2 * h);
      CHECK(std::abs(g.d_mu - fd_eta) <= 1e-6 * std::max(std::abs(fd_eta), 1e-2));
      if (f.has_dispersion()) {
        AuxParams ap = aux, am = aux;
        ap.phi += h;
        am.phi -= h;
        const double fd_phi = (val(eta, ap) - val(eta, am)) / (2 * h);
        CHECK(std::abs(g.d_phi - fd_phi) <= 1e-6 * std::max(std::abs(fd_phi), 1e-2));
      }
      if (k == FamilyKind::Tweedie) {
        AuxParams ap = aux, am = aux;
        ap.power += h;
        am.power -= h;
        const double fd_pow = (val(eta, ap) - val(eta, am)) / (2 * h);
        CHECK(std::abs(g.d_power - fd_pow) <= 1e-6 * std::max(std::abs(fd_pow), 1e-2));
      }
    }
  }
}

TEST_CASE("names round trip and compatibility") {
  for (FamilyKind k : {FamilyKind::Bernoulli, FamilyKind::Gaussian, FamilyKind::Poisson, FamilyKind::NegativeBinomial,
                       FamilyKind::Tweedie}) {
    CHECK(parse_family(to_string(k)) == k);
    CHECK(link_compatible(k, canonical_link(k)));
  }
  CHECK_THROWS_AS(parse_family("beta"), ConfigError);
  CHECK_THROWS_AS(parse_link("loglog"), ConfigError);
  CHECK_FALSE(link_compatible(FamilyKind::Gaussian, LinkKind::Logit));
  CHECK_FALSE(link_compatible(FamilyKind::Poisson, LinkKind::Identity));
}

TEST_CASE("log_factorial matches lgamma") {
  for (double y : {0.0, 1.0, 5.0, 20.0, 170.0, 1000.0, 123456.0}) {
    CHECK(log_factorial(y) == doctest::Approx(std::lgamma(y + 1.0)).epsilon(1e-13));
  }
}
