#include "eventflux/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "eventflux/error.hpp"
#include "eventflux/formats.hpp"
#include "eventflux/parallel.hpp"
#include "eventflux/philox.hpp"

namespace eventflux::synth {

namespace {

// Blade geometry as fractions of the inscribed radius, and the angular
// half-width of each blade in radians.
constexpr double kHubFraction = 0.2;
constexpr double kTipFraction = 0.9;
constexpr double kBladeHalfWidth = 0.2;

enum Stream : std::uint64_t { kPhaseStream = 0, kBladeStream = 1, kNoiseStream = 2 };

/// Arrival times of a homogeneous Poisson process on [0, duration], floored
/// to whole microseconds. Exponential gaps keep the output sorted.
template <typename OnArrival>
void poisson_arrivals(double rate_per_second, Timestamp duration, CounterRng& rng, OnArrival&& on) {
  if (!(rate_per_second > 0.0)) return;
  const double rate_per_us = rate_per_second * 1e-6;
  double t = 0.0;
  while (true) {
    t += -std::log1p(-rng.uniform()) / rate_per_us;
    if (t > static_cast<double>(duration)) break;
    on(std::min(static_cast<Timestamp>(t), duration));
  }
}

std::uint16_t clamp_coord(double v, std::uint32_t extent) {
  const double c = std::clamp(std::floor(v), 0.0, static_cast<double>(extent - 1));
  return static_cast<std::uint16_t>(c);
}

}  // namespace

void check_config(const FanConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Argument, "fan config: " + what); };
  if (cfg.width < 1 || cfg.height < 1 || cfg.width > 65536 || cfg.height > 65536)
    fail("width and height must lie in [1, 65536]");
  if (cfg.n_blades < 1) fail("n_blades must be at least 1");
  if (!(cfg.angular_speed > 0.0) || !std::isfinite(cfg.angular_speed)) fail("angular_speed must be > 0");
  if (cfg.duration <= 0) fail("duration must be > 0");
  if (cfg.events_per_revolution < 1) fail("events_per_revolution must be at least 1");
  if (!(cfg.noise_rate >= 0.0) || !std::isfinite(cfg.noise_rate)) fail("noise_rate must be >= 0");
}

EventStream gen_fan(const FanConfig& cfg) {
  check_config(cfg);
  const std::uint64_t key = mix64(cfg.seed);
  CounterRng phase_rng(key, kPhaseStream);
  CounterRng blade_rng(key, kBladeStream);
  CounterRng noise_rng(key, kNoiseStream);

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double phase = kTwoPi * phase_rng.uniform();
  const double cx = cfg.width / 2.0;
  const double cy = cfg.height / 2.0;
  const double radius = std::min(cfg.width, cfg.height) / 2.0;
  const double r_hub = kHubFraction * radius;
  const double r_tip = kTipFraction * radius;

  std::vector<Event> blade;
  poisson_arrivals(cfg.angular_speed * cfg.events_per_revolution, cfg.duration, blade_rng, [&](Timestamp t) {
    const auto b = static_cast<double>(blade_rng.below(cfg.n_blades));
    const bool leading = blade_rng.below(2) == 1;
    const double r = r_hub + (r_tip - r_hub) * blade_rng.uniform();
    const double angle = phase + kTwoPi * cfg.angular_speed * (static_cast<double>(t) * 1e-6) +
                         kTwoPi * b / cfg.n_blades + (leading ? kBladeHalfWidth : -kBladeHalfWidth);
    blade.push_back({clamp_coord(cx + r * std::cos(angle), cfg.width),
                     clamp_coord(cy + r * std::sin(angle), cfg.height), t,
                     static_cast<std::int8_t>(leading ? 1 : -1)});
  });

  std::vector<Event> noise;
  poisson_arrivals(cfg.noise_rate, cfg.duration, noise_rng, [&](Timestamp t) {
    const auto x = static_cast<std::uint16_t>(noise_rng.below(cfg.width));
    const auto y = static_cast<std::uint16_t>(noise_rng.below(cfg.height));
    noise.push_back({x, y, t, static_cast<std::int8_t>(noise_rng.below(2) == 1 ? 1 : -1)});
  });

  EventStream s;
  s.width = cfg.width;
  s.height = cfg.height;
  s.t_start = 0;
  s.t_end = cfg.duration;
  s.label = cfg.label;
  s.video_id = cfg.video_id;
  s.events.resize(blade.size() + noise.size());
  std::merge(blade.begin(), blade.end(), noise.begin(), noise.end(), s.events.begin(),
             [](const Event& a, const Event& b) { return a.t < b.t; });
  return s;
}

FanConfig clip_config(const FanConfig& base, std::string_view label, std::size_t index) {
  FanConfig cfg = base;
  cfg.seed = mix64(base.seed ^ fnv1a64(label)) ^ mix64(index);
  char id[64];
  std::snprintf(id, sizeof id, "%.*s_%04zu", static_cast<int>(label.size()), label.data(), index);
  cfg.video_id = id;
  cfg.label = std::string(label);
  return cfg;
}

std::vector<ManifestRow> gen_two_class_fan_dataset(const FanConfig& slow, const FanConfig& fast,
                                                   std::size_t n_slow, std::size_t n_fast,
                                                   const std::filesystem::path& out_dir,
                                                   unsigned threads) {
  check_config(slow);
  check_config(fast);
  if (slow.width != fast.width || slow.height != fast.height || slow.n_blades != fast.n_blades ||
      slow.duration != fast.duration || slow.events_per_revolution != fast.events_per_revolution ||
      slow.noise_rate != fast.noise_rate || slow.seed != fast.seed)
    throw Error(ErrorKind::Argument, "fan dataset: class configs may differ only in angular_speed");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, out_dir.string() + ": cannot create directory: " + ec.message());

  std::vector<FanConfig> configs;
  configs.reserve(n_slow + n_fast);
  for (std::size_t i = 0; i < n_slow; ++i) configs.push_back(clip_config(slow, kSlowLabel, i));
  for (std::size_t i = 0; i < n_fast; ++i) configs.push_back(clip_config(fast, kFastLabel, i));

  std::vector<EventStream> clips(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) { clips[i] = gen_fan(configs[i]); });

  std::vector<ManifestRow> rows;
  rows.reserve(clips.size());
  for (const auto& clip : clips) {
    const std::filesystem::path file = clip.video_id + ".evs";
    write_file(out_dir / file, write_native(clip));
    rows.push_back({file, *clip.label, clip.size()});
  }
  write_file(out_dir / "manifest.csv", manifest_csv(rows));
  return rows;
}

std::string manifest_csv(const std::vector<ManifestRow>& rows) {
  std::string out = "path,label,event_count\n";
  for (const auto& r : rows)
    out += r.path.generic_string() + ',' + r.label + ',' + std::to_string(r.event_count) + '\n';
  return out;
}

}  // namespace eventflux::synth
