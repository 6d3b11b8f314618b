#include "glnem/manifold.hpp"

#include <sstream>

#include "glnem/errors.hpp"

namespace glnem {

namespace {

constexpr double kRankTol = 1e-10;

}  // namespace

CenteredQr centered_qr(const Eigen::MatrixXd& b) {
  const Eigen::Index n = b.rows();
  const Eigen::Index m = b.cols() + 1;
  if (n < m) {
    std::ostringstream msg;
    msg << "centered_orthogonalize: need n >= d + 1, got n=" << n << ", d=" << b.cols();
    throw DegenerateInputError(msg.str());
  }
  Eigen::MatrixXd a(n, m);
  a.col(0).setOnes();
  a.rightCols(m - 1) = b;

  Eigen::HouseholderQR<Eigen::MatrixXd> householder(a);
  CenteredQr out;
  out.q = householder.householderQ() * Eigen::MatrixXd::Identity(n, m);
  out.r = householder.matrixQR().topRows(m).triangularView<Eigen::Upper>();

  const double scale = out.r.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < m; ++k) {
    const double rkk = out.r(k, k);
    if (!(std::abs(rkk) > kRankTol * std::max(scale, 1.0))) {
      std::ostringstream msg;
      msg << "centered_orthogonalize: [1, B] is rank deficient at column " << k;
      throw DegenerateInputError(msg.str());
    }
    if (rkk < 0.0) {
      out.q.col(k) *= -1.0;
      out.r.row(k) *= -1.0;
    }
  }
  return out;
}

Eigen::MatrixXd centered_orthogonalize(const Eigen::MatrixXd& b) { return centered_qr(b).basis(); }

Eigen::MatrixXd centered_orthogonalize_pullback(const CenteredQr& qr, const Eigen::MatrixXd& u_bar) {
  const Eigen::Index m = qr.q.cols();
  Eigen::MatrixXd q_bar = Eigen::MatrixXd::Zero(qr.q.rows(), m);
  q_bar.rightCols(m - 1) = u_bar;

  // With R_bar = 0: M = -Q_bar' Q, A_bar = (Q_bar + Q copyltu(M)) R^{-T}.
  const Eigen::MatrixXd mm = -q_bar.transpose() * qr.q;
  Eigen::MatrixXd sym = mm.triangularView<Eigen::Lower>();
  sym.triangularView<Eigen::StrictlyUpper>() = mm.transpose().triangularView<Eigen::StrictlyUpper>();
  const Eigen::MatrixXd lhs = q_bar + qr.q * sym;
  // X R^{-T}: solve R X' = lhs'.
  const Eigen::MatrixXd a_bar =
      qr.r.triangularView<Eigen::Upper>().solve(lhs.transpose()).transpose();
  return a_bar.rightCols(m - 1);
}

Eigen::MatrixXd frechet_mean(std::span<const Eigen::MatrixXd> draws) {
  if (draws.empty()) throw DegenerateInputError("frechet_mean: no draws");
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(draws.front().rows(), draws.front().cols());
  for (const auto& u : draws) mean += u;
  mean /= static_cast<double>(draws.size());
  if (mean.cols() == 0) return mean;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mean, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > kRankTol * std::max(sv.maxCoeff(), 1.0))) {
    throw DegenerateInputError("frechet_mean: element-wise mean is rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

bool is_member(const Eigen::MatrixXd& u, double tol) {
  const Eigen::Index d = u.cols();
  if (d == 0) return true;
  const double ortho = (u.transpose() * u - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  const double center = u.colwise().sum().cwiseAbs().maxCoeff();
  return ortho <= tol && center <= tol;
}

}  // namespace glnem
