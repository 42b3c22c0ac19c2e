#include "eventflux/event.hpp"

#include <algorithm>

namespace eventflux {

std::vector<std::string> validate(const EventStream& stream) {
  std::vector<std::string> out;
  if (stream.width < 1) out.emplace_back("width must be at least 1");
  if (stream.height < 1) out.emplace_back("height must be at least 1");
  if (stream.t_start > stream.t_end) out.emplace_back("t_start after t_end");

  const auto& ev = stream.events;
  auto first = [&](auto&& bad) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < ev.size(); ++i)
      if (bad(i)) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  auto report = [&](std::ptrdiff_t idx, const char* what) {
    if (idx >= 0) out.push_back(std::string(what) + " at index " + std::to_string(idx));
  };

  report(first([&](std::size_t i) { return ev[i].p != 1 && ev[i].p != -1; }),
         "invalid polarity");
  report(first([&](std::size_t i) { return ev[i].x >= stream.width; }), "x out of bounds");
  report(first([&](std::size_t i) { return ev[i].y >= stream.height; }), "y out of bounds");
  report(first([&](std::size_t i) { return ev[i].t < 0; }), "negative timestamp");
  report(first([&](std::size_t i) { return i > 0 && ev[i].t < ev[i - 1].t; }),
         "non-monotonic timestamp");
  report(first([&](std::size_t i) { return ev[i].t < stream.t_start || ev[i].t > stream.t_end; }),
         "timestamp outside window");
  return out;
}

EventStream sort_events(EventStream stream) {
  std::stable_sort(stream.events.begin(), stream.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return stream;
}

}  // namespace eventflux
