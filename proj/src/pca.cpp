#include "dpca/pca.hpp"

#include "dpca/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dpca {

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols())
    throw_usage("subspace basis must be n x k with 1 <= k <= n");
  const double err = orthonormality_error(basis_);
  if (!(err <= tol)) {
    std::ostringstream os;
    os << "subspace basis is not column-orthonormal (error " << err << ")";
    throw_numerical(os.str());
  }
}

Subspace PcaModel::principal_subspace(Eigen::Index k) const {
  if (k < 1 || k > components.cols())
    throw_usage("principal subspace dimension out of range");
  return Subspace(components.leftCols(k));
}

PcaModel fit_pca(const Matrix& centered) {
  validate_matrix(centered);
  const double scale = centered.cwiseAbs().maxCoeff();
  const double worst_mean = centered.colwise().mean().cwiseAbs().maxCoeff();
  if (worst_mean > 1e-8 * scale)
    throw_data("fit_pca requires column-centered input");

  SvdResult svd = thin_svd(centered);
  PcaModel model;
  model.components = std::move(svd.right);
  model.singular_values = std::move(svd.singular_values);
  Vector energy = model.singular_values.array().square();
  const double total = energy.sum();
  if (total > 0.0) {
    model.variance_fractions = energy / total;
  } else {
    // all-zero data: put everything on the first component
    model.variance_fractions = Vector::Zero(energy.size());
    model.variance_fractions[0] = 1.0;
  }
  return model;
}

Eigen::Index select_dimension(const PcaModel& model, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw_usage("variance threshold must lie in (0, 1]");
  const auto q = model.variance_fractions.size();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    cumulative += model.variance_fractions[i];
    if (cumulative >= threshold - 1e-12) return i + 1;
  }
  return q;
}

std::vector<ScreeRow> scree(const PcaModel& model) {
  std::vector<ScreeRow> rows;
  const auto q = model.singular_values.size();
  rows.reserve(q);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    cumulative += model.variance_fractions[i];
    const double s = model.singular_values[i];
    rows.push_back({i + 1, s * s, cumulative});
  }
  if (!rows.empty()) rows.back().cumulative_fraction = 1.0;
  return rows;
}

void write_scree_csv(std::ostream& out, const std::vector<ScreeRow>& rows) {
  out << "rank,variance,cumulative_fraction\n" << std::setprecision(17);
  for (const auto& r : rows)
    out << r.rank << ',' << r.variance << ',' << r.cumulative_fraction << '\n';
}

namespace {

void check_dims(const Matrix& m, const Subspace& sub) {
  validate_matrix(m);
  if (sub.ambient_dim() != m.cols()) {
    std::ostringstream os;
    os << "subspace ambient dimension " << sub.ambient_dim()
       << " does not match matrix width " << m.cols();
    throw_data(os.str());
  }
}

}  // namespace

Decomposition decompose(const Matrix& m, const Subspace& sub) {
  check_dims(m, sub);
  const Matrix& v = sub.basis();
  Decomposition d;
  d.normal = (m * v) * v.transpose();
  d.residual = m - d.normal;
  return d;
}

Vector residual_scores(const Matrix& m, const Subspace& sub) {
  check_dims(m, sub);
  const Matrix& v = sub.basis();
  Matrix residual = m - (m * v) * v.transpose();
  return residual.rowwise().squaredNorm();
}

}  // namespace dpca
