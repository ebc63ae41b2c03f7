#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observations in rows, features in columns, with optional feature labels.
struct DataMatrix {
  Matrix values;
  std::vector<std::string> col_names;  // empty or one per column
};

/// Throws Data unless m >= 1, n >= 1 and every entry is finite.
void validate_matrix(const Matrix& m);
void validate_data(const DataMatrix& dm);

struct ColumnStats {
  Vector means;
  Vector stds;                 // population standard deviation (divide by m)
  std::vector<bool> constant;  // std == 0; such columns map to zero under z-scoring
};

struct NormalizedMatrix {
  Matrix data;
  ColumnStats stats;
};

enum class Normalization { Center, ZScore };

NormalizedMatrix center_columns(const Matrix& m);
NormalizedMatrix zscore_columns(const Matrix& m);
NormalizedMatrix normalize_columns(const Matrix& m, Normalization how);

/// Subtracts `stats.means` and, for z-scoring, divides non-constant columns by
/// `stats.stds`. Constant columns become zero.
Matrix apply_column_stats(const Matrix& m, const ColumnStats& stats,
                          Normalization how);

/// Thin SVD: left is m x q, right is n x q, q = min(m, n), values nonincreasing.
/// Sign convention: the largest-magnitude entry of every right singular
/// vector is positive (first such entry on ties); the left vector gets the
/// matching sign.
struct SvdResult {
  Matrix left;
  Vector singular_values;
  Matrix right;
};

SvdResult thin_svd(const Matrix& m);

/// Singular values only, nonincreasing.
Vector singular_values(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);

/// max |(B^T B - I)_ij|.
double orthonormality_error(const Matrix& basis);

}  // namespace dpca
