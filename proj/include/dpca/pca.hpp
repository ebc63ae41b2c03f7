#pragma once

#include "dpca/matrix.hpp"

#include <iosfwd>
#include <vector>

namespace dpca {

/// Column-orthonormal n x k basis of a principal subspace.
class Subspace {
 public:
  /// Throws Numerical if `basis` is not column-orthonormal within `tol`, and
  /// Usage if it has no columns.
  explicit Subspace(Matrix basis, double tol = 1e-10);

  const Matrix& basis() const { return basis_; }
  Eigen::Index dim() const { return basis_.cols(); }
  Eigen::Index ambient_dim() const { return basis_.rows(); }

 private:
  Matrix basis_;
};

struct PcaModel {
  Matrix components;  // n x q, columns are PCs
  Vector singular_values;
  Vector variance_fractions;

  /// Top-k components as a subspace.
  Subspace principal_subspace(Eigen::Index k) const;
};

/// Requires column-centered input (means below 1e-8 * max |entry|).
PcaModel fit_pca(const Matrix& centered);

/// Smallest k >= 1 whose cumulative variance fraction reaches `threshold`.
Eigen::Index select_dimension(const PcaModel& model, double threshold);

struct ScreeRow {
  Eigen::Index rank;  // 1-based
  double variance;    // sigma_i^2
  double cumulative_fraction;
};

std::vector<ScreeRow> scree(const PcaModel& model);
void write_scree_csv(std::ostream& out, const std::vector<ScreeRow>& rows);

struct Decomposition {
  Matrix normal;
  Matrix residual;
};

Decomposition decompose(const Matrix& m, const Subspace& sub);

/// Squared norm of each row's component orthogonal to `sub`.
Vector residual_scores(const Matrix& m, const Subspace& sub);

}  // namespace dpca
