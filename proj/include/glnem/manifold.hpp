#pragma once

#include <span>

#include <Eigen/Dense>

namespace glnem {

// Thin QR of [1_n, B] with a positive diagonal in R. The latent basis is the
// trailing d columns of q.
struct CenteredQr {
  Eigen::MatrixXd q;  // n x (d + 1)
  Eigen::MatrixXd r;  // (d + 1) x (d + 1), upper triangular

  Eigen::MatrixXd basis() const { return q.rightCols(q.cols() - 1); }
};

CenteredQr centered_qr(const Eigen::MatrixXd& b);

// Maps an unconstrained n x d matrix onto the centered semi-orthogonal
// matrices {U : U'U = I, U'1 = 0}. Throws DegenerateInputError when
// [1_n, B] is rank deficient or n < d + 1.
Eigen::MatrixXd centered_orthogonalize(const Eigen::MatrixXd& b);

// Reverse-mode pullback of centered_orthogonalize: given dL/dU returns dL/dB.
Eigen::MatrixXd centered_orthogonalize_pullback(const CenteredQr& qr, const Eigen::MatrixXd& u_bar);

// Orthogonal polar factor of the element-wise mean of the draws.
Eigen::MatrixXd frechet_mean(std::span<const Eigen::MatrixXd> draws);

bool is_member(const Eigen::MatrixXd& u, double tol);

}  // namespace glnem
