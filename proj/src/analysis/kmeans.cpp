#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eventflux/analysis.hpp"
#include "eventflux/error.hpp"
#include "eventflux/philox.hpp"

namespace eventflux::analysis {

namespace {

// Distinct values in ascending order with their multiplicities. Lloyd runs
// over these groups so centers are exact weighted means.
struct Groups {
  std::vector<double> value;
  std::vector<double> weight;
};

Groups group_values(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Groups g;
  for (double v : sorted) {
    if (g.value.empty() || g.value.back() != v) {
      g.value.push_back(v);
      g.weight.push_back(0.0);
    }
    g.weight.back() += 1.0;
  }
  return g;
}

struct Run {
  std::vector<double> centers;
  std::vector<std::size_t> assignments;  // per group
  double inertia = 0.0;
  int iterations = 0;
};

std::vector<double> seed_plus_plus(const Groups& g, std::size_t k, CounterRng& rng) {
  const std::size_t n = g.value.size();
  const double total_weight = std::accumulate(g.weight.begin(), g.weight.end(), 0.0);
  // First center: a uniformly chosen point, i.e. a group chosen by weight.
  std::size_t first = 0;
  {
    const double target = static_cast<double>(rng.below(static_cast<std::uint64_t>(total_weight)));
    double cumulative = 0.0;
    while (first + 1 < n && cumulative + g.weight[first] <= target) cumulative += g.weight[first++];
  }
  std::vector<double> centers{g.value[first]};
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (g.value[i] - centers[0]) * (g.value[i] - centers[0]);

  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += g.weight[i] * d2[i];
    const double target = rng.uniform() * total;
    std::size_t pick = n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] == 0.0) continue;
      pick = i;
      cumulative += g.weight[i] * d2[i];
      if (cumulative > target) break;
    }
    // pick < n because fewer than k centers cannot cover k distinct values.
    const double c = g.value[pick];
    centers.push_back(c);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (g.value[i] - c) * (g.value[i] - c));
  }
  return centers;
}

std::size_t nearest(const std::vector<double>& centers, double v) {
  std::size_t best = 0;
  double best_d = std::abs(v - centers[0]);
  for (std::size_t c = 1; c < centers.size(); ++c) {
    const double d = std::abs(v - centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

/// Moves the group farthest from its center into each empty cluster.
void repair_empty(const Groups& g, std::vector<double>& centers, std::vector<std::size_t>& assignments,
                  std::vector<std::size_t>& members) {
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (members[c] != 0) continue;
    std::size_t far = g.value.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < g.value.size(); ++i) {
      if (members[assignments[i]] < 2) continue;
      const double d = std::abs(g.value[i] - centers[assignments[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == g.value.size()) continue;  // unreachable while k <= distinct values
    --members[assignments[far]];
    assignments[far] = c;
    members[c] = 1;
    centers[c] = g.value[far];
  }
}

double inertia_of(const Groups& g, const std::vector<double>& centers, const std::vector<std::size_t>& assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < g.value.size(); ++i) {
    const double d = g.value[i] - centers[assignments[i]];
    total += g.weight[i] * d * d;
  }
  return total;
}

Run lloyd(const Groups& g, std::vector<double> centers) {
  const std::size_t n = g.value.size();
  const std::size_t k = centers.size();
  Run run;
  run.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) run.assignments[i] = nearest(centers, g.value[i]);

  std::vector<std::size_t> members(k);
  std::vector<double> sums(k), weights(k);
  for (int iter = 1; iter <= kKMeansMaxIterations; ++iter) {
    run.iterations = iter;
    std::fill(members.begin(), members.end(), 0);
    for (std::size_t a : run.assignments) ++members[a];
    repair_empty(g, centers, run.assignments, members);

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(weights.begin(), weights.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[run.assignments[i]] += g.value[i] * g.weight[i];
      weights[run.assignments[i]] += g.weight[i];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (weights[c] > 0) centers[c] = sums[c] / weights[c];

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = nearest(centers, g.value[i]);
      if (a != run.assignments[i]) {
        run.assignments[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  run.inertia = inertia_of(g, centers, run.assignments);
  run.centers = std::move(centers);
  return run;
}

// Above this many distinct values the exact split is skipped (cost k * n^2)
// and Lloyd restarts decide alone.
constexpr std::size_t kExactPartitionLimit = 2048;

/// Optimal contiguous k-split of the sorted groups by dynamic programming.
/// Splits whose costs agree to within a relative 1e-11 count as tied and the
/// earliest cut wins, so the choice survives rescaling of the input.
Run optimal_partition(const Groups& g, std::size_t k) {
  const std::size_t n = g.value.size();
  double mean = 0.0, total_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += g.value[i] * g.weight[i];
    total_w += g.weight[i];
  }
  mean /= total_w;
  // Centered prefix sums keep the cancellation in cost() small.
  std::vector<double> w(n + 1, 0.0), s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = g.value[i] - mean;
    w[i + 1] = w[i] + g.weight[i];
    s1[i + 1] = s1[i] + g.weight[i] * d;
    s2[i + 1] = s2[i] + g.weight[i] * d * d;
  }
  auto cost = [&](std::size_t a, std::size_t b) {  // groups [a, b)
    const double sv = s1[b] - s1[a];
    return std::max(0.0, (s2[b] - s2[a]) - sv * sv / (w[b] - w[a]));
  };
  const double tie = 1e-11 * s2[n];
  const double inf = std::numeric_limits<double>::infinity();
  // best[j][b]: minimal cost of splitting groups [0, b) into j parts.
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
    for (std::size_t b = j; b <= n - (k - j); ++b)
      for (std::size_t a = j - 1; a < b; ++a) {
        if (best[j - 1][a] == inf) continue;
        const double v = best[j - 1][a] + cost(a, b);
        if (v < best[j][b] - tie) {
          best[j][b] = v;
          cut[j][b] = a;
        }
      }

  Run run;
  run.centers.resize(k);
  run.assignments.resize(n);
  std::size_t b = n;
  for (std::size_t j = k; j >= 1; --j) {
    const std::size_t a = cut[j][b];
    double sum = 0.0, weight = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      sum += g.value[i] * g.weight[i];
      weight += g.weight[i];
      run.assignments[i] = j - 1;
    }
    run.centers[j - 1] = sum / weight;
    b = a;
  }
  run.inertia = inertia_of(g, run.centers, run.assignments);
  return run;
}

}  // namespace

KMeansResult kmeans_1d(std::span<const double> values, std::size_t k, std::uint64_t seed,
                       int restarts) {
  if (values.empty()) throw Error(ErrorKind::Argument, "kmeans_1d: no values");
  if (k < 1) throw Error(ErrorKind::Argument, "kmeans_1d: k must be at least 1");
  if (restarts < 1) throw Error(ErrorKind::Argument, "kmeans_1d: restarts must be at least 1");
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
    throw Error(ErrorKind::Argument, "kmeans_1d: non-finite value");
  const Groups groups = group_values(values);
  const std::size_t distinct = groups.value.size();
  if (k > distinct)
    throw Error(ErrorKind::Degenerate, "kmeans_1d: k = " + std::to_string(k) + " exceeds the " +
                                           std::to_string(distinct) + " distinct values");

  Run best;
  if (distinct <= kExactPartitionLimit) {
    // Lloyd can settle in a local optimum; in 1-D the global one is a
    // contiguous split and is cheap to find for moderate inputs.
    best = optimal_partition(groups, k);
  } else {
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
      CounterRng rng(mix64(seed ^ mix64(k)), static_cast<std::uint64_t>(r));
      Run run = lloyd(groups, seed_plus_plus(groups, k, rng));
      if (run.inertia < best.inertia) best = std::move(run);
    }
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return best.centers[a] < best.centers[b]; });
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;

  KMeansResult out;
  out.centers.resize(k);
  out.sizes.assign(k, 0);
  for (std::size_t r = 0; r < k; ++r) out.centers[r] = best.centers[order[r]];
  out.assignments.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = std::lower_bound(groups.value.begin(), groups.value.end(), values[i]);
    out.assignments[i] = rank[best.assignments[static_cast<std::size_t>(it - groups.value.begin())]];
    ++out.sizes[out.assignments[i]];
  }
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  return out;
}

}  // namespace eventflux::analysis
