#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "glnem/errors.hpp"
#include "glnem/manifold.hpp"
#include "glnem/random.hpp"

using namespace glnem;

namespace {

Eigen::MatrixXd gaussian(int n, int d, Rng& rng) {
  Eigen::MatrixXd b(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) b(i, k) = standard_normal(rng);
  return b;
}

double orth_residual(const Eigen::MatrixXd& u) {
  const Eigen::MatrixXd g = u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols());
  return g.cwiseAbs().maxCoeff();
}

double centering_residual(const Eigen::MatrixXd& u) { return u.colwise().sum().cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("hand Gram-Schmidt example") {
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 1.0;
  const Eigen::MatrixXd u = centered_orthogonalize(b);
  CHECK(u(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(u(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("members are fixed points") {
  Rng rng = make_rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd a = oracle::random_centered_basis(12, 4, rng);
    CHECK((centered_orthogonalize(a) - a).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("matches Gram-Schmidt oracle") {
  Rng rng = make_rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd b = gaussian(10, 3, rng);
    const Eigen::MatrixXd u = centered_orthogonalize(b);
    CHECK((u - oracle::gram_schmidt_centered(b)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(orth_residual(u) <= 1e-12);
    CHECK(centering_residual(u) <= 1e-12);
    CHECK(is_member(u, 1e-10));
  }
}

TEST_CASE("membership invariants over random shapes") {
  Rng rng = make_rng(5);
  std::uniform_int_distribution<int> dd(1, 10);
  for (int rep = 0; rep < 1000; ++rep) {
    const int d = dd(rng);
    const int n = std::uniform_int_distribution<int>(d + 1, 200)(rng);
    const Eigen::MatrixXd u = centered_orthogonalize(gaussian(n, d, rng));
    REQUIRE(orth_residual(u) <= 1e-10);
    REQUIRE(centering_residual(u) <= 1e-10);
  }
}

TEST_CASE("degenerate inputs throw") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(5, 1);
  CHECK_THROWS_AS(centered_orthogonalize(constant), DegenerateInputError);
  Eigen::MatrixXd dup(5, 2);
  dup.col(0) << 1, 2, 3, 4, 5;
  dup.col(1) = 2.0 * dup.col(0);
  CHECK_THROWS_AS(centered_orthogonalize(dup), DegenerateInputError);
  CHECK_THROWS_AS(centered_orthogonalize(Eigen::MatrixXd::Random(3, 3)), DegenerateInputError);
}

TEST_CASE("pullback matches finite differences") {
  Rng rng = make_rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 8, d = 3;
    const Eigen::MatrixXd w = gaussian(n, d, rng);
    const Eigen::MatrixXd v = gaussian(n, d, rng);
    // f(U) = <W, U> + 0.5 * sum (V o U)^2 exercises a non-linear cotangent.
    auto f_of_u = [&](const Eigen::MatrixXd& u) { return (w.array() * u.array()).sum() + 0.5 * (v.array() * u.array()).square().sum(); };
    const Eigen::MatrixXd b = gaussian(n, d, rng);
    const CenteredQr qr = centered_qr(b);
    const Eigen::MatrixXd u = qr.basis();
    const Eigen::MatrixXd u_bar = w + (v.array().square() * u.array()).matrix();
    const Eigen::MatrixXd g = centered_orthogonalize_pullback(qr, u_bar);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    auto f = [&](const Eigen::VectorXd& xv) {
      return f_of_u(centered_orthogonalize(Eigen::Map<const Eigen::MatrixXd>(xv.data(), n, d)));
    };
    const Eigen::VectorXd fd = oracle::fd_gradient(f, x);
    const Eigen::VectorXd an = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    CHECK(oracle::rel_err(an, fd, 1e-8) <= 1e-5);
  }
}

TEST_CASE("centered_qr has a positive diagonal and reproduces the input") {
  Rng rng = make_rng(7);
  const Eigen::MatrixXd b = gaussian(9, 4, rng);
  const CenteredQr qr = centered_qr(b);
  Eigen::MatrixXd a(9, 5);
  a.col(0).setOnes();
  a.rightCols(4) = b;
  CHECK((qr.q * qr.r - a).cwiseAbs().maxCoeff() <= 1e-12);
  for (int k = 0; k < 5; ++k) CHECK(qr.r(k, k) > 0.0);
  CHECK(qr.r.triangularView<Eigen::StrictlyLower>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frechet mean examples") {
  Rng rng = make_rng(8);
  const Eigen::MatrixXd u = oracle::random_centered_basis(15, 3, rng);
  std::vector<Eigen::MatrixXd> same(5, u);
  CHECK((frechet_mean(same) - u).cwiseAbs().maxCoeff() <= 1e-12);
  std::vector<Eigen::MatrixXd> pair{u, u * Eigen::MatrixXd::Identity(3, 3)};
  CHECK((frechet_mean(pair) - u).cwiseAbs().maxCoeff() <= 1e-12);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<Eigen::MatrixXd> draws{oracle::random_centered_basis(15, 3, rng), oracle::random_centered_basis(15, 3, rng)};
    const Eigen::MatrixXd m = frechet_mean(draws);
    CHECK(orth_residual(m) <= 1e-10);
    CHECK(centering_residual(m) <= 1e-10);
    // Polar factor oracle.
    const Eigen::MatrixXd avg = 0.5 * (draws[0] + draws[1]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(avg, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CHECK((m - svd.matrixU() * svd.matrixV().transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  std::vector<Eigen::MatrixXd> cancel{u, -u};
  CHECK_THROWS_AS(frechet_mean(cancel), DegenerateInputError);
  CHECK_THROWS(frechet_mean(std::vector<Eigen::MatrixXd>{}));
}

TEST_CASE("is_member examples") {
  Eigen::MatrixXd e(4, 2);
  e << 1, 1, -1, 1, 1, -1, -1, -1;
  e /= 2.0;
  CHECK(is_member(e, 1e-8));
  CHECK_FALSE(is_member(Eigen::MatrixXd::Ones(4, 1) / 2.0, 1e-8));
  Rng rng = make_rng(9);
  CHECK(is_member(centered_orthogonalize(gaussian(30, 5, rng)), 1e-10));
}
