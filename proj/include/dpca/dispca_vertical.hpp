#pragma once

#include "dpca/matrix.hpp"
#include "dpca/pca.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dpca::vertical {

/// Uplink from one monitor holding a column block: its top-r loadings and the
/// block projected onto them.
struct LocalSummary {
  std::uint32_t monitor_id = 0;
  Matrix right_vectors;  // n_i x r
  Matrix projection;     // m x r, block * right_vectors

  Eigen::Index r() const { return right_vectors.cols(); }
  Eigen::Index n_i() const { return right_vectors.rows(); }
  Eigen::Index m() const { return projection.rows(); }
  /// Float values on the wire: m*r + n_i*r.
  std::uint64_t payload_values() const;
};

struct Aggregate {
  Matrix q;              // n x (s*r), block diagonal of the loadings
  Matrix p;              // m x (s*r), concatenated projections
  Matrix w_k;            // (s*r) x k, top-k right singular vectors of p
  Matrix v_hat_k;        // n x k, q * w_k
  Matrix x_est;          // m x n, p * q^T
  Vector p_singular_values;
};

LocalSummary local_summarize(const Matrix& block, Eigen::Index r,
                             std::uint32_t monitor_id = 0);

/// Assembles the DFC estimate in monitor-id order. The projections are not
/// re-centered: callers feed globally centered blocks.
Aggregate aggregate(std::span<const LocalSummary> summaries, Eigen::Index k);

Subspace principal_subspace(const Aggregate& agg);

/// Squared row norms of x_est (I - v_hat_k v_hat_k^T).
Vector residual_est(const Aggregate& agg);

/// Wire format, little-endian: u32 monitor_id, u32 r, u32 n_i, u64 m,
/// f64[n_i*r] right vectors column-major, f64[m*r] projection column-major.
std::vector<std::uint8_t> encode(const LocalSummary& s);
LocalSummary decode(std::span<const std::uint8_t> bytes);

inline constexpr size_t kHeaderBytes = 20;

}  // namespace dpca::vertical
