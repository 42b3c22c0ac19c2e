#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "eventflux/event.hpp"

namespace eventflux {

struct SubsamplePlan {
  std::size_t n_target = 0;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
};

inline constexpr std::size_t kDefaultEvalRepeats = 20;

/// Key of the generator that drives one (seed, video, epoch) draw. Depends on
/// nothing else, so draws are independent of visiting order across videos.
std::uint64_t draw_key(std::uint64_t seed, std::string_view video_id, std::uint64_t epoch) noexcept;

/// Sorted indices of a uniform size-min(n, population) subset drawn without
/// replacement by partial Fisher-Yates on the generator keyed by `key`.
std::vector<std::size_t> select_indices(std::size_t population, std::size_t n, std::uint64_t key);

/// Uniform random subset of min(n_target, N) events, in chronological order.
/// Window, geometry, label and video_id are carried over unchanged.
EventStream subsample(const EventStream& stream, const SubsamplePlan& plan);

/// `repeats` draws at epochs 0..repeats-1 under one seed (test-time protocol).
std::vector<EventStream> repeat_eval_draws(const EventStream& stream, std::size_t n_target,
                                           std::uint64_t seed,
                                           std::size_t repeats = kDefaultEvalRepeats);

/// subsample() applied to every stream, spread over `threads` workers.
/// The result does not depend on `threads`.
std::vector<EventStream> subsample_all(std::span<const EventStream> streams,
                                       const SubsamplePlan& plan, unsigned threads);

}  // namespace eventflux
