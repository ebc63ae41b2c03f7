#include "dpca/matrix.hpp"

#include "dpca/error.hpp"

#include <cmath>
#include <sstream>

namespace dpca {

void validate_matrix(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    std::ostringstream os;
    os << "matrix must be at least 1x1, got " << m.rows() << "x" << m.cols();
    throw_data(os.str());
  }
  if (!m.allFinite()) throw_data("matrix contains non-finite entries");
}

void validate_data(const DataMatrix& dm) {
  validate_matrix(dm.values);
  if (!dm.col_names.empty() &&
      dm.col_names.size() != static_cast<size_t>(dm.values.cols()))
    throw_data("column name count does not match column count");
}

NormalizedMatrix center_columns(const Matrix& m) {
  validate_matrix(m);
  NormalizedMatrix out;
  out.stats.means = m.colwise().mean().transpose();
  out.data = m.rowwise() - out.stats.means.transpose();
  // second pass removes the rounding residue of the first mean
  Vector residue = out.data.colwise().mean().transpose();
  out.data.rowwise() -= residue.transpose();
  out.stats.means += residue;
  out.stats.stds =
      (out.data.colwise().squaredNorm() / static_cast<double>(m.rows()))
          .cwiseSqrt()
          .transpose();
  out.stats.constant.resize(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    out.stats.constant[j] = out.stats.stds[j] == 0.0;
  return out;
}

NormalizedMatrix zscore_columns(const Matrix& m) {
  NormalizedMatrix out = center_columns(m);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (out.stats.constant[j]) {
      out.data.col(j).setZero();
    } else {
      out.data.col(j) /= out.stats.stds[j];
    }
  }
  return out;
}

NormalizedMatrix normalize_columns(const Matrix& m, Normalization how) {
  return how == Normalization::ZScore ? zscore_columns(m) : center_columns(m);
}

Matrix apply_column_stats(const Matrix& m, const ColumnStats& stats,
                          Normalization how) {
  if (stats.means.size() != m.cols())
    throw_data("column statistics do not match matrix width");
  Matrix out = m.rowwise() - stats.means.transpose();
  if (how == Normalization::ZScore) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (stats.constant[j]) {
        out.col(j).setZero();
      } else {
        out.col(j) /= stats.stds[j];
      }
    }
  }
  return out;
}

SvdResult thin_svd(const Matrix& m) {
  validate_matrix(m);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw_numerical("SVD did not converge");

  SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index c = 0; c < out.right.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.right.rows(); ++i) {
      double a = std::abs(out.right(i, c));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.right(arg, c) < 0.0) {
      out.right.col(c) *= -1.0;
      out.left.col(c) *= -1.0;
    }
  }
  return out;
}

Vector singular_values(const Matrix& m) {
  validate_matrix(m);
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success)
    throw_numerical("SVD did not converge");
  return svd.singularValues();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols()
       << " * " << b.rows() << "x" << b.cols() << ")";
    throw_data(os.str());
  }
  return a * b;
}

double orthonormality_error(const Matrix& basis) {
  if (basis.cols() == 0) return 0.0;
  Matrix g = basis.transpose() * basis;
  g -= Matrix::Identity(g.rows(), g.cols());
  return g.cwiseAbs().maxCoeff();
}

}  // namespace dpca
