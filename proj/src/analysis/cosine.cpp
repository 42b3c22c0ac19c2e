#include <algorithm>
#include <cmath>

#include "eventflux/analysis.hpp"
#include "eventflux/error.hpp"
#include "eventflux/parallel.hpp"

namespace eventflux::analysis {

std::vector<double> pairwise_cosine(const GradientSet& grads, unsigned threads) {
  const std::size_t m = grads.vectors.size();
  if (m < 2) throw Error(ErrorKind::Argument, "pairwise_cosine: at least 2 vectors are required");
  const std::size_t dim = grads.dimension();
  for (std::size_t i = 0; i < m; ++i)
    if (grads.vectors[i].size() != dim)
      throw Error(ErrorKind::Argument, "pairwise_cosine: vector " + std::to_string(i) + " has length " +
                                           std::to_string(grads.vectors[i].size()) + ", expected " +
                                           std::to_string(dim));

  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    double ss = 0.0;
    for (float v : grads.vectors[i]) ss += static_cast<double>(v) * v;
    norms[i] = std::sqrt(ss);
    if (!(norms[i] > 0.0) || !std::isfinite(norms[i]))
      throw Error(ErrorKind::Degenerate, "pairwise_cosine: vector " + std::to_string(i) +
                                             " has zero or non-finite norm");
  }

  // Row i owns the contiguous block of pairs (i, i+1..m-1).
  std::vector<double> out(m * (m - 1) / 2);
  parallel_for(m - 1, threads, [&](std::size_t i) {
    std::size_t pos = i * m - i * (i + 1) / 2;
    const auto& a = grads.vectors[i];
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& b = grads.vectors[j];
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += static_cast<double>(a[d]) * b[d];
      out[pos++] = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
    }
  });
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins, double lo,
                                    double hi) {
  if (bins < 1) throw Error(ErrorKind::Argument, "histogram: bins must be at least 1");
  if (!(lo < hi)) throw Error(ErrorKind::Argument, "histogram: range must satisfy lo < hi");
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    if (std::isnan(v)) throw Error(ErrorKind::Argument, "histogram: NaN value");
    std::size_t b = 0;
    if (v >= hi) {
      b = bins - 1;
    } else if (v > lo) {
      b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    }
    ++out[b].count;
  }
  return out;
}

}  // namespace eventflux::analysis
