#include "dpca/detection.hpp"

#include "dpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dpca::detection {

size_t GroundTruth::positives() const {
  return static_cast<size_t>(std::count(labels.begin(), labels.end(), true));
}

GroundTruth make_ground_truth(std::span<const double> scores,
                              double percentile) {
  if (!(percentile > 0.0 && percentile < 1.0))
    throw_usage("ground-truth percentile must lie in (0, 1)");
  if (scores.size() < 2) throw_data("ground truth needs at least two rows");
  const size_t m = scores.size();
  // the 1e-9 guard keeps products like 0.1 * 200 from rounding up a row
  auto count = static_cast<size_t>(
      std::ceil(percentile * static_cast<double>(m) - 1e-9));
  count = std::clamp<size_t>(count, 1, m);

  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  GroundTruth truth{std::vector<bool>(m, false), percentile};
  for (size_t i = 0; i < count; ++i) truth.labels[order[i]] = true;
  return truth;
}

RocCurve roc_curve(std::span<const double> scores, const GroundTruth& truth) {
  if (scores.size() != truth.labels.size())
    throw_data("roc_curve: score and label counts differ");
  const size_t pos = truth.positives();
  const size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0)
    throw_data("roc_curve: ground truth must contain both classes");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  size_t tp = 0, fp = 0;
  for (size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      if (truth.labels[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
    curve.thresholds.push_back(t);
  }
  return curve;
}

double equal_error_rate(const RocCurve& curve) {
  if (curve.points.empty()) throw_data("equal_error_rate: empty curve");
  double best_gap = std::numeric_limits<double>::infinity();
  double best_far = 1.0;
  for (const auto& p : curve.points) {
    const double gap = std::abs(p.far - (1.0 - p.tpr));
    if (gap < best_gap || (gap == best_gap && p.far < best_far)) {
      best_gap = gap;
      best_far = p.far;
    }
  }
  return best_far;
}

std::vector<bool> detect(std::span<const double> scores, double threshold) {
  std::vector<bool> flags(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) flags[i] = scores[i] > threshold;
  return flags;
}

double far_to_flag(std::span<const double> scores, const GroundTruth& truth,
                   size_t row) {
  if (scores.size() != truth.labels.size() || row >= scores.size())
    throw_data("far_to_flag: bad row or length mismatch");
  size_t neg = 0, above = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (truth.labels[i]) continue;
    ++neg;
    if (scores[i] >= scores[row]) ++above;
  }
  if (neg == 0) throw_data("far_to_flag: ground truth has no negatives");
  return static_cast<double>(above) / static_cast<double>(neg);
}

}  // namespace dpca::detection
