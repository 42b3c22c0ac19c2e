#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eventflux/event.hpp"

namespace eventflux::synth {

/// Rotating fan seen head-on. Blade-edge events arrive as a Poisson process
/// at angular_speed * events_per_revolution per second; background noise is
/// an independent Poisson process spread uniformly over the sensor.
struct FanConfig {
  std::uint32_t width = 128;
  std::uint32_t height = 128;
  std::uint32_t n_blades = 3;
  double angular_speed = 10.0;     // revolutions per second
  Timestamp duration = 75'000;     // microseconds
  std::uint32_t events_per_revolution = 4000;
  double noise_rate = 1000.0;      // events per second
  std::uint64_t seed = 0;
  std::string video_id = "fan";
  std::optional<std::string> label;
};

/// Throws Argument when the config is unusable.
void check_config(const FanConfig& cfg);

EventStream gen_fan(const FanConfig& cfg);

inline constexpr std::size_t kDefaultSlowVideos = 235;
inline constexpr std::size_t kDefaultFastVideos = 275;
inline constexpr const char* kSlowLabel = "speed1";
inline constexpr const char* kFastLabel = "speed3";

struct ManifestRow {
  std::filesystem::path path;  // relative to the dataset directory
  std::string label;
  std::size_t event_count = 0;
};

/// Per-video config of the i-th clip of a class: fresh seed and phase, id "<label>_<i>".
FanConfig clip_config(const FanConfig& base, std::string_view label, std::size_t index);

/// Writes `n_slow` + `n_fast` native streams labelled speed1/speed3 plus
/// manifest.csv (path,label,event_count) into out_dir. The two configs may
/// differ only in angular_speed.
std::vector<ManifestRow> gen_two_class_fan_dataset(const FanConfig& slow, const FanConfig& fast,
                                                   std::size_t n_slow, std::size_t n_fast,
                                                   const std::filesystem::path& out_dir,
                                                   unsigned threads = 1);

std::string manifest_csv(const std::vector<ManifestRow>& rows);

}  // namespace eventflux::synth
