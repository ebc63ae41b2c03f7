#pragma once

#include <span>
#include <vector>

namespace dpca::detection {

struct GroundTruth {
  std::vector<bool> labels;
  double percentile = 0.0;

  size_t positives() const;
};

/// Labels the top ceil(percentile * m) scores as anomalous; equal scores are
/// labeled in ascending row order.
GroundTruth make_ground_truth(std::span<const double> scores, double percentile);

struct RocPoint {
  double far;
  double tpr;
};

/// Point i flags every row scoring >= thresholds[i]. The first point uses
/// +inf (nothing flagged), the last uses the minimum score (everything).
struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<double> thresholds;
};

RocCurve roc_curve(std::span<const double> scores, const GroundTruth& truth);

/// FAR at the point minimizing |FAR - (1 - TPR)|, smaller FAR on ties.
double equal_error_rate(const RocCurve& curve);

/// flag[i] = scores[i] > threshold.
std::vector<bool> detect(std::span<const double> scores, double threshold);

/// Fraction of negatives scoring at least as high as row `row`, i.e. the
/// false-alarm rate paid to flag that row.
double far_to_flag(std::span<const double> scores, const GroundTruth& truth,
                   size_t row);

}  // namespace dpca::detection
