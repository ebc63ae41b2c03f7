#include "dpca/metrics.hpp"

#include "dpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dpca {
namespace {

constexpr double kOrthoTol = 1e-8;

void check_pair(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw_data("principal angles: ambient dimensions differ");
  if (orthonormality_error(a.basis()) > kOrthoTol ||
      orthonormality_error(b.basis()) > kOrthoTol)
    throw_numerical("principal angles: basis is not column-orthonormal");
}

}  // namespace

std::vector<double> principal_angles(const Subspace& a, const Subspace& b) {
  check_pair(a, b);
  // Cosines come from the singular values of A^T B (clamped to [0, 1]).
  // arccos is ill-conditioned near 0, so angles below pi/4 are taken from the
  // sines instead: the singular values of (I - A A^T) B.
  const Subspace& wide = a.dim() >= b.dim() ? a : b;
  const Subspace& narrow = a.dim() >= b.dim() ? b : a;
  const auto k = narrow.dim();

  Vector cosines = singular_values(wide.basis().transpose() * narrow.basis());
  Matrix outside = narrow.basis() -
                   wide.basis() * (wide.basis().transpose() * narrow.basis());
  Vector sines = singular_values(outside);  // nonincreasing

  std::vector<double> angles(static_cast<size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = std::clamp(cosines[i], 0.0, 1.0);
    if (c * c < 0.5) {
      angles[i] = std::acos(c);
    } else {
      const double s = std::clamp(sines[k - 1 - i], 0.0, 1.0);
      angles[i] = std::asin(s);
    }
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double geodesic_distance(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim())
    throw_usage("geodesic distance needs subspaces of equal dimension");
  double sum = 0.0;
  for (double t : principal_angles(a, b)) sum += t * t;
  return std::sqrt(sum);
}

}  // namespace dpca
