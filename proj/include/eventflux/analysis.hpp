#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace eventflux::analysis {

// ---------------------------------------------------------------------------
// 1-D k-means
// ---------------------------------------------------------------------------

struct KMeansResult {
  std::vector<double> centers;            // ascending
  std::vector<std::size_t> assignments;   // index into centers, per input value
  std::vector<std::size_t> sizes;
  double inertia = 0.0;                   // within-cluster sum of squares
  int iterations = 0;
};

inline constexpr int kKMeansMaxIterations = 300;
inline constexpr int kKMeansRestarts = 10;

/// Up to 2048 distinct values: the optimal clustering, found exactly as the
/// best contiguous split of the sorted values (near-ties go to the earliest
/// split). Larger inputs: Lloyd iterations from k-means++ seeds, best of
/// `restarts` runs by inertia, stopping when no assignment changes (or after
/// 300 iterations); a cluster that empties is reseeded with the point
/// farthest from its current center. `iterations` is 0 for the exact path.
/// Throws Degenerate when k exceeds the number of distinct values.
KMeansResult kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed,
                       int restarts = kKMeansRestarts);

// ---------------------------------------------------------------------------
// Hyperparameter sensitivity
// ---------------------------------------------------------------------------

enum class Split { Validation, Test };

const char* to_string(Split split) noexcept;

struct RunRecord {
  std::string run_id;
  Split split = Split::Validation;
  std::int64_t seed = 0;
  double accuracy = 0.0;
  double learning_rate = 0.0;
  std::int64_t batch_size = 0;
  double weight_decay = 0.0;
  std::map<std::string, std::string> extras;
};

struct PerKEntry {
  std::size_t k = 0;
  double metric = 0.0;
  std::vector<double> centers;
  std::vector<std::size_t> sizes;
  double most_populated_center = 0.0;
  double max_cluster_center = 0.0;
};

struct SensitivityReport {
  double metric = 0.0;
  std::size_t best_k = 2;
  std::vector<PerKEntry> per_k;
  double max_accuracy = 0.0;
  double most_populated_center = 0.0;
  double max_cluster_center = 0.0;
  bool degenerate = false;  // fewer than two distinct accuracies
};

inline constexpr std::size_t kSensitivityMinK = 2;
inline constexpr std::size_t kSensitivityMaxK = 10;

/// Clusters the accuracies for every k in [2, kmax] (capped at the number of
/// distinct values) and measures |center(most populated) - center(cluster
/// holding the largest accuracy)| / max accuracy. Reports the largest value.
/// Ties for "most populated" resolve to the center farthest from the
/// max-accuracy cluster.
SensitivityReport hp_sensitivity(std::span<const double> accuracies,
                                 std::size_t kmax = kSensitivityMaxK, std::uint64_t seed = 0);
SensitivityReport hp_sensitivity(std::span<const RunRecord> records,
                                 std::size_t kmax = kSensitivityMaxK, std::uint64_t seed = 0);

struct AccuracySummary {
  double mean = 0.0;
  double stddev = 0.0;       // sample (n - 1) standard deviation
  bool stddev_defined = false;
  double max = 0.0;
  double improvement_percent = 0.0;  // 100 * (max - mean) / mean
};

AccuracySummary mean_accuracy_summary(std::span<const double> accuracies);
AccuracySummary mean_accuracy_summary(std::span<const RunRecord> records);

// ---------------------------------------------------------------------------
// Gradient diversity
// ---------------------------------------------------------------------------

struct GradientSet {
  std::string layer_id;
  std::vector<std::vector<float>> vectors;

  std::size_t dimension() const noexcept { return vectors.empty() ? 0 : vectors.front().size(); }
};

/// Cosine similarity of every pair i < j, in lexicographic (i, j) order.
/// Output length M(M-1)/2. Throws Degenerate on a zero-norm vector.
std::vector<double> pairwise_cosine(const GradientSet& grads, unsigned threads = 1);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

inline constexpr std::size_t kCosineHistogramBins = 50;

/// Equal-width bins over [lo, hi], half-open except the last. Values outside
/// the range are clamped into the first or last bin.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins, double lo,
                                    double hi);

// ---------------------------------------------------------------------------
// Significance
// ---------------------------------------------------------------------------

/// Natural log of P[X >= correct] for X ~ Binomial(trials, chance).
double log_binomial_tail(std::uint64_t correct, std::uint64_t trials, double chance);

/// One-tailed exact binomial p-value P[X >= correct]. Underflows to 0 for
/// extremely small tails; use log_binomial_tail there.
double binomial_above_chance(std::uint64_t correct, std::uint64_t trials, double chance);

/// Formats exp(log_p) as d.ddde[+-]XX without leaving log space.
std::string format_p_value(double log_p);

}  // namespace eventflux::analysis
