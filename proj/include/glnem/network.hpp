#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace glnem {

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Dyad {
  int i = 0;
  int j = 0;
  friend bool operator==(const Dyad&, const Dyad&) = default;
};

// Undirected weighted network with p dyadic covariate matrices.
struct NetworkData {
  Eigen::MatrixXd y;
  std::vector<Eigen::MatrixXd> x;
  bool diagonal_observed = false;
  // Symmetric observation mask; absent means every dyad is observed.
  std::optional<MaskMatrix> mask;

  int nodes() const { return static_cast<int>(y.rows()); }
  int covariates() const { return static_cast<int>(x.size()); }
  bool observed(int i, int j) const;

  // Throws DataError on shape mismatch or asymmetry beyond tol.
  void validate(double tol = 1e-12) const;
};

// Observed dyads with i <= j in row-major order; the diagonal is included
// only when diagonal_observed is set.
std::vector<Dyad> observed_dyads(const NetworkData& data);

// Observed dyads with i < j.
std::vector<Dyad> observed_off_diagonal(const NetworkData& data);

// Copy of data with the given dyads marked unobserved.
NetworkData hold_out(const NetworkData& data, std::span<const Dyad> held_out);

}  // namespace glnem
