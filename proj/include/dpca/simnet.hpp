#pragma once

#include "dpca/matrix.hpp"
#include "dpca/pca.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpca::simnet {

enum class Mode { Horizontal, Vertical };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Block b covers rows (horizontal) or columns (vertical)
/// [boundaries[b], boundaries[b + 1]).
struct Partitioning {
  Mode mode = Mode::Horizontal;
  size_t s = 1;
  std::vector<Eigen::Index> boundaries;

  Eigen::Index block_size(size_t b) const {
    return boundaries[b + 1] - boundaries[b];
  }
};

/// Blocks of nearest-integer(total / s) with the remainder in the last block.
Partitioning partition(Eigen::Index rows, Eigen::Index cols, Mode mode,
                       size_t s);

std::vector<Matrix> split(const Matrix& m, const Partitioning& parts);

struct Prepass {
  ColumnStats stats;
  std::vector<Matrix> blocks;  // normalized with the global stats
  std::uint64_t values_sent = 0;
};

/// Computes global column statistics from per-monitor partial sums and
/// normalizes every block with them. Horizontal monitors send column sums,
/// then (z-scoring only) sums of squared deviations about the global mean.
Prepass center_prepass(const std::vector<Matrix>& blocks, Mode mode,
                       Normalization how = Normalization::Center);

struct ProtocolConfig {
  Mode mode = Mode::Horizontal;
  size_t s = 1;
  Eigen::Index r = 1;
  Eigen::Index k = 1;
  Normalization normalization = Normalization::Center;
  bool parallel = false;  // one thread per monitor
};

struct ProtocolRun {
  ProtocolConfig config;
  Partitioning partitioning;
  std::uint64_t values_sent = 0;     // uplinked summary payload values
  std::uint64_t prepass_values = 0;  // normalization round, reported apart
  std::uint64_t m = 0, n = 0;
  Matrix subspace;                   // n x k
  Vector scores;                     // length m
  double gd_to_centralized = 0.0;

  double normalized_cost() const {
    return static_cast<double>(values_sent) / static_cast<double>(m * n);
  }
};

/// Centralized reference for a run: the normalized matrix and its PCA.
struct Centralized {
  Matrix normalized;
  PcaModel model;
};

Centralized centralized(const Matrix& m, Normalization how);

/// Partition, normalize, summarize at monitors, aggregate at the DFC and
/// score. `reference`, when given, must be centralized(m, normalization).
ProtocolRun run_protocol(const Matrix& m, const ProtocolConfig& config,
                         const Centralized* reference = nullptr);

/// Valid r range [lo, hi] for a partition; lo is the least r giving a
/// k-dimensional estimate.
struct RRange {
  Eigen::Index lo = 1, hi = 0;
};
RRange feasible_r(const Partitioning& parts, Eigen::Index m, Eigen::Index n,
                  Eigen::Index k);

struct MinRRow {
  Mode mode;
  size_t s;
  double d_star;
  std::optional<Eigen::Index> r_star;  // empty: no feasible r
  double cost = 0.0;                   // analytic c_hor / c_ver at r_star
};

/// For each s, the least r (ascending scan starting at min(k, max r)) with
/// gd_to_centralized <= d_star.
std::vector<MinRRow> sweep_min_r(const Matrix& m, Mode mode,
                                 const std::vector<size_t>& s_values,
                                 double d_star, Eigen::Index k,
                                 Normalization how = Normalization::Center);

nlohmann::json to_json(const ProtocolRun& run);

}  // namespace dpca::simnet
