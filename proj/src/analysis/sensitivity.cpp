#include <algorithm>
#include <cmath>
#include <numeric>

#include "eventflux/analysis.hpp"
#include "eventflux/error.hpp"
#include "eventflux/philox.hpp"

namespace eventflux::analysis {

namespace {

std::vector<double> accuracies_of(std::span<const RunRecord> records) {
  std::vector<double> acc;
  acc.reserve(records.size());
  for (const auto& r : records) {
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0))
      throw Error(ErrorKind::Argument, "run " + r.run_id + ": accuracy " + std::to_string(r.accuracy) +
                                           " outside [0, 1]");
    acc.push_back(r.accuracy);
  }
  return acc;
}

PerKEntry score_clustering(const KMeansResult& km, std::size_t k, std::size_t max_index,
                           double max_accuracy) {
  PerKEntry entry;
  entry.k = k;
  entry.centers = km.centers;
  entry.sizes = km.sizes;

  const std::size_t top = km.assignments[max_index];
  const double top_center = km.centers[top];
  // Most populated cluster; ties go to the center farthest from the top cluster.
  std::size_t popular = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (km.sizes[c] > km.sizes[popular] ||
        (km.sizes[c] == km.sizes[popular] &&
         std::abs(km.centers[c] - top_center) > std::abs(km.centers[popular] - top_center)))
      popular = c;
  }
  entry.most_populated_center = km.centers[popular];
  entry.max_cluster_center = top_center;
  entry.metric = popular == top ? 0.0 : std::abs(km.centers[popular] - top_center) / max_accuracy;
  return entry;
}

}  // namespace

const char* to_string(Split split) noexcept {
  return split == Split::Validation ? "validation" : "test";
}

SensitivityReport hp_sensitivity(std::span<const double> accuracies, std::size_t kmax,
                                 std::uint64_t seed) {
  if (accuracies.size() < 2)
    throw Error(ErrorKind::Argument, "hp_sensitivity: at least 2 runs are required");
  if (kmax < kSensitivityMinK) throw Error(ErrorKind::Argument, "hp_sensitivity: kmax must be at least 2");
  if (!std::all_of(accuracies.begin(), accuracies.end(), [](double v) { return std::isfinite(v); }))
    throw Error(ErrorKind::Argument, "hp_sensitivity: non-finite accuracy");

  // Sorting makes the result a function of the multiset of accuracies only.
  std::vector<double> sorted(accuracies.begin(), accuracies.end());
  std::sort(sorted.begin(), sorted.end());
  const double max_accuracy = sorted.back();
  if (!(max_accuracy > 0.0))
    throw Error(ErrorKind::Degenerate, "hp_sensitivity: maximum accuracy is 0, metric undefined");

  SensitivityReport report;
  report.max_accuracy = max_accuracy;
  std::vector<double> uniq(sorted);
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < kSensitivityMinK) {
    report.degenerate = true;
    report.most_populated_center = max_accuracy;
    report.max_cluster_center = max_accuracy;
    return report;
  }

  const std::size_t kcap = std::min(kmax, uniq.size());
  const std::size_t max_index = sorted.size() - 1;
  bool first = true;
  for (std::size_t k = kSensitivityMinK; k <= kcap; ++k) {
    const KMeansResult km = kmeans_1d(sorted, k, mix64(seed) ^ k);
    PerKEntry entry = score_clustering(km, k, max_index, max_accuracy);
    if (first || entry.metric > report.metric) {
      report.metric = entry.metric;
      report.best_k = k;
      report.most_populated_center = entry.most_populated_center;
      report.max_cluster_center = entry.max_cluster_center;
      first = false;
    }
    report.per_k.push_back(std::move(entry));
  }
  return report;
}

SensitivityReport hp_sensitivity(std::span<const RunRecord> records, std::size_t kmax,
                                 std::uint64_t seed) {
  const auto acc = accuracies_of(records);
  return hp_sensitivity(std::span<const double>(acc), kmax, seed);
}

AccuracySummary mean_accuracy_summary(std::span<const double> accuracies) {
  if (accuracies.empty()) throw Error(ErrorKind::Argument, "mean_accuracy_summary: no runs");
  const double n = static_cast<double>(accuracies.size());
  AccuracySummary s;
  s.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
  s.max = *std::max_element(accuracies.begin(), accuracies.end());
  if (accuracies.size() > 1) {
    double ss = 0.0;
    for (double a : accuracies) ss += (a - s.mean) * (a - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
    s.stddev_defined = true;
  }
  if (s.mean == 0.0)
    throw Error(ErrorKind::Degenerate, "mean_accuracy_summary: mean accuracy is 0, improvement undefined");
  s.improvement_percent = 100.0 * (s.max - s.mean) / s.mean;
  return s;
}

AccuracySummary mean_accuracy_summary(std::span<const RunRecord> records) {
  const auto acc = accuracies_of(records);
  return mean_accuracy_summary(std::span<const double>(acc));
}

}  // namespace eventflux::analysis
