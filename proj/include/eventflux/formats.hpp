#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eventflux/event.hpp"

namespace eventflux {

enum class FormatKind { AtisBin, Csv, Jsonl, Native };

const char* to_string(FormatKind kind) noexcept;
/// Accepts the CLI spellings: atis-bin, csv, jsonl, native.
std::optional<FormatKind> parse_format(std::string_view name);
/// .bin, .csv, .jsonl, .evs
std::optional<FormatKind> format_from_extension(const std::filesystem::path& path);

using Bytes = std::vector<std::uint8_t>;

/// Sensor geometry for formats that do not carry it. When absent, text
/// readers infer it from the largest coordinates seen (minimum 1x1).
struct Geometry {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

// ATIS / N-MNIST style 40-bit records:
//   byte0 x | byte1 y | byte2 bit7 polarity | bits 22..0 of bytes 2-4 timestamp (big-endian)
// Label and video_id are not representable. t_start is 0, t_end the largest timestamp.
inline constexpr Timestamp kAtisMaxTimestamp = (Timestamp{1} << 23) - 1;

EventStream read_atis_bin(std::span<const std::uint8_t> bytes, std::uint32_t width,
                          std::uint32_t height);
Bytes write_atis_bin(const EventStream& stream);

// Header "x,y,t,p". Polarity 0 is read as -1; writes always use -1/1.
EventStream read_csv(std::string_view text, std::optional<Geometry> geometry = std::nullopt);
std::string write_csv(const EventStream& stream);

// First line is a header object carrying geometry, window, label and
// video_id; every following line is {"x":..,"y":..,"t":..,"p":..}. The header
// line is optional on read.
EventStream read_jsonl(std::string_view text, std::optional<Geometry> geometry = std::nullopt);
std::string write_jsonl(const EventStream& stream);

// "EVS1" container, little-endian throughout:
//   magic[4] u32 width u32 height i64 t_start i64 t_end
//   u8 has_label [u32 len, bytes] u32 id_len, bytes
//   u64 count, then count x {u16 x, u16 y, i64 t, i8 p}
inline constexpr std::size_t kNativeEventBytes = 13;

EventStream read_native(std::span<const std::uint8_t> bytes);
Bytes write_native(const EventStream& stream);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

/// Dispatches on `kind`; geometry is mandatory for AtisBin.
EventStream load_stream(const std::filesystem::path& path, FormatKind kind,
                        std::optional<Geometry> geometry = std::nullopt);
void save_stream(const std::filesystem::path& path, const EventStream& stream, FormatKind kind);

}  // namespace eventflux
