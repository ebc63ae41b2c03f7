#pragma once

#include "dpca/matrix.hpp"
#include "dpca/pca.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dpca::horizontal {

/// Uplink from one monitor holding a row block: its top-r singular values and
/// right singular vectors.
struct LocalSummary {
  std::uint32_t monitor_id = 0;
  Vector singular_values;  // length r
  Matrix right_vectors;    // n x r

  Eigen::Index r() const { return singular_values.size(); }
  Eigen::Index n() const { return right_vectors.rows(); }
  /// Float values on the wire: r + n*r.
  std::uint64_t payload_values() const;
};

/// DFC state after stacking diag(sigma_i) V_i^T blocks.
struct Aggregate {
  Matrix stacked;                // (s*r) x n, monitor-id order
  Matrix global_right_vectors;   // n x q, q = min(s*r, n)
  Vector global_singular_values;
};

LocalSummary local_summarize(const Matrix& block, Eigen::Index r,
                             std::uint32_t monitor_id = 0);

Aggregate aggregate(std::span<const LocalSummary> summaries);

Subspace principal_subspace(const Aggregate& agg, Eigen::Index k);

/// Wire format, little-endian: u32 monitor_id, u32 r, u32 n, f64[r] sigma,
/// f64[n*r] right vectors column-major.
std::vector<std::uint8_t> encode(const LocalSummary& s);
LocalSummary decode(std::span<const std::uint8_t> bytes);

inline constexpr size_t kHeaderBytes = 12;

}  // namespace dpca::horizontal
