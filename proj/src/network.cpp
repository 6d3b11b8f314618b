#include "glnem/network.hpp"

#include <sstream>

#include "glnem/errors.hpp"

namespace glnem {

bool NetworkData::observed(int i, int j) const {
  if (i == j && !diagonal_observed) return false;
  return !mask || (*mask)(i, j);
}

void NetworkData::validate(double tol) const {
  const Eigen::Index n = y.rows();
  if (y.cols() != n) throw DataError("adjacency matrix must be square");
  auto check_symmetric = [&](const Eigen::MatrixXd& m, const std::string& what) {
    if (m.rows() != n || m.cols() != n) throw DataError(what + " has the wrong shape");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (std::abs(m(i, j) - m(j, i)) > tol) {
          std::ostringstream msg;
          msg << what << " is not symmetric at (" << i << ", " << j << ")";
          throw DataError(msg.str());
        }
      }
    }
  };
  check_symmetric(y, "adjacency matrix");
  for (std::size_t k = 0; k < x.size(); ++k) check_symmetric(x[k], "covariate " + std::to_string(k + 1));
  if (mask) {
    if (mask->rows() != n || mask->cols() != n) throw DataError("mask has the wrong shape");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if ((*mask)(i, j) != (*mask)(j, i)) throw DataError("mask is not symmetric");
      }
    }
  }
}

std::vector<Dyad> observed_dyads(const NetworkData& data) {
  std::vector<Dyad> out;
  const int n = data.nodes();
  out.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (data.observed(i, j)) out.push_back({i, j});
    }
  }
  return out;
}

std::vector<Dyad> observed_off_diagonal(const NetworkData& data) {
  std::vector<Dyad> out;
  for (const Dyad& dy : observed_dyads(data)) {
    if (dy.i != dy.j) out.push_back(dy);
  }
  return out;
}

NetworkData hold_out(const NetworkData& data, std::span<const Dyad> held_out) {
  NetworkData out = data;
  if (!out.mask) out.mask = MaskMatrix::Constant(data.nodes(), data.nodes(), true);
  for (const Dyad& dy : held_out) {
    (*out.mask)(dy.i, dy.j) = false;
    (*out.mask)(dy.j, dy.i) = false;
  }
  return out;
}

}  // namespace glnem
