#include "dpca/dispca_vertical.hpp"

#include "dpca/error.hpp"
#include "dpca/matrix_io.hpp"

#include <algorithm>
#include <sstream>

namespace dpca::vertical {

std::uint64_t LocalSummary::payload_values() const {
  const auto rr = static_cast<std::uint64_t>(r());
  return static_cast<std::uint64_t>(m()) * rr +
         static_cast<std::uint64_t>(n_i()) * rr;
}

LocalSummary local_summarize(const Matrix& block, Eigen::Index r,
                             std::uint32_t monitor_id) {
  validate_matrix(block);
  const auto limit = std::min(block.rows(), block.cols());
  if (r < 1 || r > limit) {
    std::ostringstream os;
    os << "monitor " << monitor_id << ": r = " << r << " outside [1, " << limit
       << "]";
    throw_usage(os.str());
  }
  SvdResult svd = thin_svd(block);
  LocalSummary s;
  s.monitor_id = monitor_id;
  s.right_vectors = svd.right.leftCols(r);
  s.projection = block * s.right_vectors;
  return s;
}

Aggregate aggregate(std::span<const LocalSummary> summaries, Eigen::Index k) {
  if (summaries.empty()) throw_data("aggregate: no summaries");
  const auto s = summaries.size();
  std::vector<const LocalSummary*> ordered(s, nullptr);
  for (const auto& sum : summaries) {
    if (sum.monitor_id >= s) throw_data("aggregate: monitor id out of range");
    if (ordered[sum.monitor_id])
      throw_data("aggregate: duplicate monitor id " +
                 std::to_string(sum.monitor_id));
    ordered[sum.monitor_id] = &sum;
  }

  const auto r = ordered[0]->r();
  const auto m = ordered[0]->m();
  Eigen::Index n = 0;
  for (const auto* sum : ordered) {
    if (sum->m() != m) throw_data("aggregate: monitors disagree on row count");
    if (sum->r() != r || sum->projection.cols() != r)
      throw_data("aggregate: monitors disagree on r");
    n += sum->n_i();
  }
  const auto width = static_cast<Eigen::Index>(s) * r;
  if (k < 1 || k > std::min(width, m)) {
    std::ostringstream os;
    os << "k = " << k << " outside [1, " << std::min(width, m) << "]";
    throw_usage(os.str());
  }

  Aggregate agg;
  agg.q = Matrix::Zero(n, width);
  agg.p.resize(m, width);
  Eigen::Index row = 0;
  for (size_t i = 0; i < s; ++i) {
    const auto col = static_cast<Eigen::Index>(i) * r;
    agg.q.block(row, col, ordered[i]->n_i(), r) = ordered[i]->right_vectors;
    agg.p.middleCols(col, r) = ordered[i]->projection;
    row += ordered[i]->n_i();
  }

  SvdResult svd = thin_svd(agg.p);
  agg.p_singular_values = std::move(svd.singular_values);
  agg.w_k = svd.right.leftCols(k);
  agg.v_hat_k = agg.q * agg.w_k;
  agg.x_est = agg.p * agg.q.transpose();

  const double err = orthonormality_error(agg.q);
  if (err > 1e-10)
    throw_numerical("aggregate: block loading matrix is not orthonormal");
  return agg;
}

Subspace principal_subspace(const Aggregate& agg) {
  return Subspace(agg.v_hat_k);
}

Vector residual_est(const Aggregate& agg) {
  return residual_scores(agg.x_est, principal_subspace(agg));
}

std::vector<std::uint8_t> encode(const LocalSummary& s) {
  ByteWriter w;
  w.u32(s.monitor_id);
  w.u32(static_cast<std::uint32_t>(s.r()));
  w.u32(static_cast<std::uint32_t>(s.n_i()));
  w.u64(static_cast<std::uint64_t>(s.m()));
  for (Eigen::Index c = 0; c < s.r(); ++c)
    for (Eigen::Index i = 0; i < s.n_i(); ++i) w.f64(s.right_vectors(i, c));
  for (Eigen::Index c = 0; c < s.r(); ++c)
    for (Eigen::Index i = 0; i < s.m(); ++i) w.f64(s.projection(i, c));
  return std::move(w).bytes();
}

LocalSummary decode(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes);
  LocalSummary s;
  s.monitor_id = rd.u32();
  const Eigen::Index r = rd.u32();
  const Eigen::Index n_i = rd.u32();
  const auto m = static_cast<Eigen::Index>(rd.u64());
  if (rd.remaining() != static_cast<size_t>(m * r + n_i * r) * 8)
    throw_data("vertical summary: payload size does not match header");
  s.right_vectors.resize(n_i, r);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < n_i; ++i) s.right_vectors(i, c) = rd.f64();
  s.projection.resize(m, r);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < m; ++i) s.projection(i, c) = rd.f64();
  return s;
}

}  // namespace dpca::vertical
