#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eventflux {

using Timestamp = std::int64_t;  // microseconds

/// One camera event. Polarity is always -1 or +1 in memory.
struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Timestamp t = 0;
  std::int8_t p = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

/// A chronologically ordered event collection with its sensor geometry and
/// time window. The window is stored explicitly so that subsampled streams
/// keep the original video's temporal normalization.
struct EventStream {
  std::vector<Event> events;
  std::uint32_t width = 1;
  std::uint32_t height = 1;
  Timestamp t_start = 0;
  Timestamp t_end = 0;
  std::optional<std::string> label;
  std::string video_id;

  std::size_t size() const noexcept { return events.size(); }
  bool empty() const noexcept { return events.empty(); }
  Timestamp duration() const noexcept { return t_end - t_start; }

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

/// Returns one human-readable entry per violated stream invariant, each
/// naming the index of the first offending event. Empty means valid.
std::vector<std::string> validate(const EventStream& stream);

/// Stable sort by timestamp. Idempotent.
EventStream sort_events(EventStream stream);

}  // namespace eventflux
