#include "dpca/dispca_horizontal.hpp"

#include "dpca/error.hpp"
#include "dpca/matrix_io.hpp"

#include <algorithm>
#include <sstream>

namespace dpca::horizontal {

std::uint64_t LocalSummary::payload_values() const {
  const auto rr = static_cast<std::uint64_t>(r());
  return rr + static_cast<std::uint64_t>(n()) * rr;
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
  s.singular_values = svd.singular_values.head(r);
  s.right_vectors = svd.right.leftCols(r);
  return s;
}

Aggregate aggregate(std::span<const LocalSummary> summaries) {
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
  const auto n = ordered[0]->n();
  for (const auto* sum : ordered) {
    if (sum->r() != r || sum->n() != n || sum->right_vectors.cols() != r)
      throw_data("aggregate: summaries disagree on r or n");
  }

  Aggregate agg;
  agg.stacked.resize(static_cast<Eigen::Index>(s) * r, n);
  for (size_t i = 0; i < s; ++i) {
    agg.stacked.middleRows(static_cast<Eigen::Index>(i) * r, r) =
        ordered[i]->singular_values.asDiagonal() *
        ordered[i]->right_vectors.transpose();
  }
  SvdResult svd = thin_svd(agg.stacked);
  agg.global_right_vectors = std::move(svd.right);
  agg.global_singular_values = std::move(svd.singular_values);
  return agg;
}

Subspace principal_subspace(const Aggregate& agg, Eigen::Index k) {
  if (k < 1 || k > agg.global_right_vectors.cols()) {
    std::ostringstream os;
    os << "k = " << k << " outside [1, " << agg.global_right_vectors.cols()
       << "]";
    throw_usage(os.str());
  }
  return Subspace(agg.global_right_vectors.leftCols(k));
}

std::vector<std::uint8_t> encode(const LocalSummary& s) {
  ByteWriter w;
  w.u32(s.monitor_id);
  w.u32(static_cast<std::uint32_t>(s.r()));
  w.u32(static_cast<std::uint32_t>(s.n()));
  for (Eigen::Index i = 0; i < s.r(); ++i) w.f64(s.singular_values[i]);
  for (Eigen::Index c = 0; c < s.r(); ++c)
    for (Eigen::Index i = 0; i < s.n(); ++i) w.f64(s.right_vectors(i, c));
  return std::move(w).bytes();
}

LocalSummary decode(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes);
  LocalSummary s;
  s.monitor_id = rd.u32();
  const Eigen::Index r = rd.u32();
  const Eigen::Index n = rd.u32();
  if (rd.remaining() != static_cast<size_t>(r + n * r) * 8)
    throw_data("horizontal summary: payload size does not match header");
  s.singular_values.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) s.singular_values[i] = rd.f64();
  s.right_vectors.resize(n, r);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < n; ++i) s.right_vectors(i, c) = rd.f64();
  return s;
}

}  // namespace dpca::horizontal
