#include "eventflux/subsample.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "eventflux/error.hpp"
#include "eventflux/parallel.hpp"
#include "eventflux/philox.hpp"

namespace eventflux {

namespace {

// Below this fraction the swap table is kept sparse instead of materializing
// all N indices. Both paths consume identical draws.
constexpr std::size_t kSparseRatio = 16;

std::vector<std::size_t> fisher_yates_dense(std::size_t population, std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

std::vector<std::size_t> fisher_yates_sparse(std::size_t population, std::size_t n, CounterRng& rng) {
  std::unordered_map<std::size_t, std::size_t> moved;
  moved.reserve(2 * n);
  auto slot = [&](std::size_t i) {
    auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  std::vector<std::size_t> picked(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    const std::size_t at_i = slot(i);
    const std::size_t at_j = slot(j);
    picked[i] = at_j;
    moved[j] = at_i;
  }
  return picked;
}

}  // namespace

std::uint64_t draw_key(std::uint64_t seed, std::string_view video_id, std::uint64_t epoch) noexcept {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ fnv1a64(video_id));
  k = mix64(k ^ epoch);
  return k;
}

std::vector<std::size_t> select_indices(std::size_t population, std::size_t n, std::uint64_t key) {
  if (n >= population) {
    std::vector<std::size_t> all(population);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  CounterRng rng(key);
  auto picked = n * kSparseRatio < population ? fisher_yates_sparse(population, n, rng)
                                              : fisher_yates_dense(population, n, rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

EventStream subsample(const EventStream& stream, const SubsamplePlan& plan) {
  EventStream out;
  out.width = stream.width;
  out.height = stream.height;
  out.t_start = stream.t_start;
  out.t_end = stream.t_end;
  out.label = stream.label;
  out.video_id = stream.video_id;
  if (plan.n_target >= stream.events.size()) {
    out.events = stream.events;
    return out;
  }
  const auto picked = select_indices(stream.events.size(), plan.n_target,
                                     draw_key(plan.seed, stream.video_id, plan.epoch));
  out.events.reserve(picked.size());
  for (std::size_t idx : picked) out.events.push_back(stream.events[idx]);
  return out;
}

std::vector<EventStream> repeat_eval_draws(const EventStream& stream, std::size_t n_target,
                                           std::uint64_t seed, std::size_t repeats) {
  if (repeats < 1) throw Error(ErrorKind::Argument, "repeat_eval_draws: repeats must be at least 1");
  std::vector<EventStream> out;
  out.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) out.push_back(subsample(stream, {n_target, seed, r}));
  return out;
}

std::vector<EventStream> subsample_all(std::span<const EventStream> streams,
                                       const SubsamplePlan& plan, unsigned threads) {
  std::vector<EventStream> out(streams.size());
  parallel_for(streams.size(), threads, [&](std::size_t i) { out[i] = subsample(streams[i], plan); });
  return out;
}

}  // namespace eventflux
