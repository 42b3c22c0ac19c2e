#pragma once

// Independent reference implementations used only by tests. None of these
// call into the code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <tuple>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "eventflux/event.hpp"
#include "eventflux/represent.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Frame accumulation
// ---------------------------------------------------------------------------

/// Temporal filter written straight from its definition.
inline double kernel_value(const eventflux::KernelSpec& k, double u, int C) {
  using eventflux::KernelKind;
  switch (k.kind) {
    case KernelKind::Delta: {
      if (C == 1) return 1.0;
      const double spacing = 1.0 / (C - 1);
      return (-0.5 * spacing <= u && u < 0.5 * spacing) ? 1.0 : 0.0;
    }
    case KernelKind::Triangular:
      if (C == 1) return 1.0;
      return std::max(0.0, 1.0 - std::fabs(u) * (C - 1));
    case KernelKind::Gaussian:
      return std::exp(-u * u / (2.0 * k.sigma * k.sigma));
    case KernelKind::Mlp: {
      const auto& net = *k.mlp;
      std::vector<double> act{u};
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        std::vector<double> next(layer.cols);
        for (std::size_t j = 0; j < layer.cols; ++j) {
          double z = layer.bias[j];
          for (std::size_t i = 0; i < layer.rows; ++i) z += act[i] * layer.weights[i * layer.cols + j];
          next[j] = (l + 1 < net.layers.size() && z < 0.0) ? 0.1 * z : z;
        }
        act = std::move(next);
      }
      return act[0];
    }
  }
  return 0.0;
}

inline double tau_of(const eventflux::EventStream& s, const eventflux::Event& e, bool normalize) {
  return normalize ? double(e.t - s.t_start) / double(s.t_end - s.t_start) : double(e.t);
}

inline double ref_time(int c, int C) { return C > 1 ? double(c) / double(C - 1) : 0.0; }

/// Weight of bin c for an event at tau. The delta filter selects the bin
/// whose half-open interval [c - 1/2, c + 1/2) in units of the bin spacing
/// contains tau.
inline double filter_weight(const eventflux::KernelSpec& k, double tau, int c, int C) {
  if (k.kind == eventflux::KernelKind::Delta && C > 1) {
    const double scaled = tau * (C - 1);
    return (scaled >= c - 0.5 && scaled < c + 0.5) ? 1.0 : 0.0;
  }
  return kernel_value(k, tau - ref_time(c, C), C);
}

/// Literal quadruple loop over (polarity, channel, y, x) with an inner sum
/// over every event and indicator tests. Cost grows with cells x events;
/// meant for small sensors.
inline std::vector<double> est_quadruple_loop(const eventflux::EventStream& s, int C,
                                              const eventflux::KernelSpec& k, bool normalize) {
  const std::size_t N = s.events.size();
  std::vector<double> tau(N);
  std::vector<std::vector<double>> f(N, std::vector<double>(C));
  for (std::size_t i = 0; i < N; ++i) {
    tau[i] = tau_of(s, s.events[i], normalize);
    for (int c = 0; c < C; ++c) f[i][c] = filter_weight(k, tau[i], c, C);
  }
  std::vector<double> out(std::size_t(2) * C * s.height * s.width, 0.0);
  std::size_t cell = 0;
  for (int p = 0; p < 2; ++p)
    for (int c = 0; c < C; ++c)
      for (std::uint32_t y = 0; y < s.height; ++y)
        for (std::uint32_t x = 0; x < s.width; ++x, ++cell) {
          double v = 0.0;
          for (std::size_t i = 0; i < N; ++i) {
            const auto& e = s.events[i];
            const int group = e.p == 1 ? 1 : 0;
            if (e.x == x && e.y == y && group == p) v += tau[i] * f[i][c];
          }
          out[cell] = v;
        }
  return out;
}

/// Same sum, with events bucketed per (polarity, y, x) first so that each cell
/// only visits its own events (in stream order). Scales to 10^4 events.
inline std::vector<double> est_bucketed(const eventflux::EventStream& s, int C,
                                        const eventflux::KernelSpec& k, bool normalize) {
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    buckets[{e.p == 1 ? 1 : 0, e.y, e.x}].push_back(i);
  }
  std::vector<double> out(std::size_t(2) * C * s.height * s.width, 0.0);
  for (const auto& [key, idx] : buckets) {
    const auto [p, y, x] = key;
    for (int c = 0; c < C; ++c) {
      double v = 0.0;
      for (std::size_t i : idx) {
        const double tau = tau_of(s, s.events[i], normalize);
        v += tau * filter_weight(k, tau, c, C);
      }
      out[((std::size_t(p) * C + c) * s.height + y) * s.width + x] = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 1-D clustering
// ---------------------------------------------------------------------------

struct Partition {
  double sse = 0.0;
  std::vector<double> centers;
  std::vector<std::size_t> sizes;
};

/// Optimal k-clustering of 1-D data by enumerating every contiguous split of
/// the sorted distinct values (with multiplicity). Exponential; small inputs only.
inline Partition best_contiguous_partition(std::vector<double> values, std::size_t k) {
  std::sort(values.begin(), values.end());
  std::vector<double> uniq;
  std::vector<std::size_t> mult;
  for (double v : values) {
    if (uniq.empty() || uniq.back() != v) {
      uniq.push_back(v);
      mult.push_back(0);
    }
    ++mult.back();
  }
  const std::size_t g = uniq.size();
  Partition best;
  best.sse = INFINITY;
  std::vector<std::size_t> cuts(k - 1);
  std::iota(cuts.begin(), cuts.end(), std::size_t{1});
  while (true) {
    Partition cur;
    std::size_t begin = 0;
    for (std::size_t part = 0; part < k; ++part) {
      const std::size_t end = part + 1 < k ? cuts[part] : g;
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t u = begin; u < end; ++u) {
        sum += uniq[u] * double(mult[u]);
        n += mult[u];
      }
      const double mean = sum / double(n);
      for (std::size_t u = begin; u < end; ++u) cur.sse += double(mult[u]) * (uniq[u] - mean) * (uniq[u] - mean);
      cur.centers.push_back(mean);
      cur.sizes.push_back(n);
      begin = end;
    }
    if (cur.sse < best.sse) best = cur;
    // next combination of k-1 cut positions from {1, ..., g-1}
    std::ptrdiff_t pos = std::ptrdiff_t(k) - 2;
    while (pos >= 0 && cuts[pos] == g - (k - 1) + std::size_t(pos)) --pos;
    if (pos < 0) break;
    ++cuts[pos];
    for (std::size_t q = std::size_t(pos) + 1; q < k - 1; ++q) cuts[q] = cuts[q - 1] + 1;
  }
  return best;
}

/// Sensitivity metric computed from exhaustively optimal clusterings.
inline double sensitivity_metric(const std::vector<double>& acc, std::size_t kmax = 10) {
  std::vector<double> uniq(acc);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2) return 0.0;
  const double max_acc = uniq.back();
  double best = 0.0;
  for (std::size_t k = 2; k <= std::min(kmax, uniq.size()); ++k) {
    const Partition part = best_contiguous_partition(acc, k);
    const std::size_t top = k - 1;  // contiguous, so the last part holds the maximum
    std::size_t pop = 0;
    for (std::size_t c = 1; c < k; ++c) {
      const bool more = part.sizes[c] > part.sizes[pop];
      const bool tie_farther = part.sizes[c] == part.sizes[pop] &&
                               std::fabs(part.centers[c] - part.centers[top]) >
                                   std::fabs(part.centers[pop] - part.centers[top]);
      if (more || tie_farther) pop = c;
    }
    best = std::max(best, std::fabs(part.centers[pop] - part.centers[top]) / max_acc);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Binomial tail with exact rational arithmetic
// ---------------------------------------------------------------------------

using BigInt = boost::multiprecision::cpp_int;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

/// ln P[X >= k] for every k in [0, n], X ~ Binomial(n, num/den), computed as
/// an exact rational sum then logged at 50 digits.
inline std::vector<BigFloat> log_binomial_tails(unsigned n, unsigned num, unsigned den) {
  std::vector<BigInt> term(n + 1);
  BigInt binom = 1;
  for (unsigned i = 0; i <= n; ++i) {
    if (i > 0) binom = binom * (n - i + 1) / i;
    term[i] = binom * boost::multiprecision::pow(BigInt(num), i) *
              boost::multiprecision::pow(BigInt(den - num), n - i);
  }
  const BigFloat log_total = BigFloat(n) * log(BigFloat(den));
  std::vector<BigFloat> out(n + 1);
  BigInt suffix = 0;
  for (int k = int(n); k >= 0; --k) {
    suffix += term[k];
    out[k] = log(BigFloat(suffix)) - log_total;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Goodness of fit and two-sample tests
// ---------------------------------------------------------------------------

/// Pearson chi-square p-value against equal expected counts.
inline double chi_square_uniform_p(const std::vector<std::size_t>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / double(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (double(c) - expected) * (double(c) - expected) / expected;
  const double dof = double(counts.size() - 1);
  return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

/// Two-sided Mann-Whitney U test, normal approximation with tie correction.
inline double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::pair<double, int>> all;
  for (double v : a) all.push_back({v, 0});
  for (double v : b) all.push_back({v, 1});
  std::sort(all.begin(), all.end());
  const double n1 = double(a.size()), n2 = double(b.size()), n = n1 + n2;
  double rank_sum_a = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = (double(i) + double(j) + 1.0) / 2.0;
    const double t = double(j - i);
    tie_term += t * t * t - t;
    for (std::size_t q = i; q < j; ++q)
      if (all[q].second == 0) rank_sum_a += avg_rank;
    i = j;
  }
  const double u = rank_sum_a - n1 * (n1 + 1) / 2.0;
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)));
  if (var <= 0.0) return 1.0;
  const double z = (std::fabs(u - mean) - 0.5) / std::sqrt(var);
  return std::erfc(std::max(z, 0.0) / std::sqrt(2.0));
}

// ---------------------------------------------------------------------------
// Random fixtures
// ---------------------------------------------------------------------------

inline eventflux::EventStream random_stream(std::mt19937_64& rng, std::size_t n, std::uint32_t w,
                                            std::uint32_t h, eventflux::Timestamp t0,
                                            eventflux::Timestamp t1) {
  eventflux::EventStream s;
  s.width = w;
  s.height = h;
  s.t_start = t0;
  s.t_end = t1;
  s.video_id = "rand" + std::to_string(rng() % 100000);
  std::uniform_int_distribution<std::uint32_t> xs(0, w - 1), ys(0, h - 1);
  std::uniform_int_distribution<eventflux::Timestamp> ts(t0, t1);
  s.events.resize(n);
  for (auto& e : s.events) {
    e.x = static_cast<std::uint16_t>(xs(rng));
    e.y = static_cast<std::uint16_t>(ys(rng));
    e.t = ts(rng);
    e.p = (rng() & 1) ? 1 : -1;
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });
  return s;
}

inline eventflux::MlpWeights random_mlp(std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<float> nd(0.0f, float(scale));
  auto net = eventflux::MlpWeights::zeros();
  for (auto& layer : net.layers) {
    for (auto& w : layer.weights) w = nd(rng);
    for (auto& b : layer.bias) b = nd(rng);
  }
  return net;
}

}  // namespace oracle
