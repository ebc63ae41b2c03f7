#pragma once

#include "dpca/pca.hpp"

#include <vector>

namespace dpca {

/// Principal angles in [0, pi/2], nondecreasing; length min(k_a, k_b).
std::vector<double> principal_angles(const Subspace& a, const Subspace& b);

/// sqrt(sum theta_i^2). Both subspaces must have the same dimension.
double geodesic_distance(const Subspace& a, const Subspace& b);

}  // namespace dpca
