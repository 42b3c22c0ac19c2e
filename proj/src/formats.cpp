#include "eventflux/formats.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>

#include "bytes.hpp"
#include "eventflux/error.hpp"
#include "json.hpp"

namespace eventflux {

namespace {

constexpr std::string_view kNativeMagic = "EVS1";

std::string event_ref(std::size_t index) { return "event " + std::to_string(index); }

void infer_geometry(EventStream& s, std::optional<Geometry> geometry) {
  if (geometry && geometry->width > 0 && geometry->height > 0) {
    s.width = geometry->width;
    s.height = geometry->height;
    return;
  }
  std::uint32_t w = 1, h = 1;
  for (const auto& e : s.events) {
    w = std::max<std::uint32_t>(w, e.x + 1u);
    h = std::max<std::uint32_t>(h, e.y + 1u);
  }
  s.width = w;
  s.height = h;
}

void set_window_from_events(EventStream& s) {
  s.t_start = 0;
  s.t_end = 0;
  for (const auto& e : s.events) s.t_end = std::max(s.t_end, e.t);
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits into lines, tolerating CRLF. The final empty line after a trailing
/// newline is dropped.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

Error parse_error(std::size_t line_no, const std::string& what) {
  return Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

std::int8_t polarity_from(long long raw, std::size_t line_no) {
  if (raw == 1) return 1;
  if (raw == -1 || raw == 0) return -1;
  throw parse_error(line_no, "unknown polarity value " + std::to_string(raw));
}

void check_decoded(const EventStream& s, std::string_view source) {
  auto problems = validate(s);
  if (!problems.empty())
    throw Error(ErrorKind::Format, std::string(source) + ": " + problems.front());
}

}  // namespace

const char* to_string(FormatKind kind) noexcept {
  switch (kind) {
    case FormatKind::AtisBin: return "atis-bin";
    case FormatKind::Csv: return "csv";
    case FormatKind::Jsonl: return "jsonl";
    case FormatKind::Native: return "native";
  }
  return "unknown";
}

std::optional<FormatKind> parse_format(std::string_view name) {
  if (name == "atis-bin" || name == "atis" || name == "bin") return FormatKind::AtisBin;
  if (name == "csv") return FormatKind::Csv;
  if (name == "jsonl") return FormatKind::Jsonl;
  if (name == "native" || name == "evs") return FormatKind::Native;
  return std::nullopt;
}

std::optional<FormatKind> format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bin") return FormatKind::AtisBin;
  if (ext == ".csv") return FormatKind::Csv;
  if (ext == ".jsonl") return FormatKind::Jsonl;
  if (ext == ".evs") return FormatKind::Native;
  return std::nullopt;
}

// --- ATIS ------------------------------------------------------------------

EventStream read_atis_bin(std::span<const std::uint8_t> bytes, std::uint32_t width,
                          std::uint32_t height) {
  if (bytes.size() % 5 != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % 5;
    throw Error(ErrorKind::Malformed, "atis-bin: length " + std::to_string(bytes.size()) +
                                          " is not a multiple of 5; partial record at offset " +
                                          std::to_string(offset));
  }
  if (width == 0 || height == 0)
    throw Error(ErrorKind::Argument, "atis-bin: sensor width and height are required");

  EventStream s;
  s.width = width;
  s.height = height;
  s.events.reserve(bytes.size() / 5);
  for (std::size_t i = 0; i < bytes.size() / 5; ++i) {
    const std::uint8_t* r = bytes.data() + 5 * i;
    Event e;
    e.x = r[0];
    e.y = r[1];
    e.p = (r[2] & 0x80) ? 1 : -1;
    e.t = (Timestamp{r[2] & 0x7F} << 16) | (Timestamp{r[3]} << 8) | Timestamp{r[4]};
    if (e.x >= width || e.y >= height)
      throw Error(ErrorKind::Bounds, "atis-bin: record " + std::to_string(i) + " at (" +
                                         std::to_string(e.x) + ", " + std::to_string(e.y) +
                                         ") is outside the " + std::to_string(width) + "x" +
                                         std::to_string(height) + " sensor");
    s.events.push_back(e);
  }
  s = sort_events(std::move(s));
  set_window_from_events(s);
  return s;
}

Bytes write_atis_bin(const EventStream& stream) {
  Bytes out;
  out.reserve(stream.events.size() * 5);
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    if (e.t < 0 || e.t > kAtisMaxTimestamp)
      throw Error(ErrorKind::Encoding, "atis-bin: " + event_ref(i) + " timestamp " +
                                           std::to_string(e.t) + " does not fit in 23 bits");
    if (e.x > 255 || e.y > 255)
      throw Error(ErrorKind::Encoding, "atis-bin: " + event_ref(i) + " coordinate (" +
                                           std::to_string(e.x) + ", " + std::to_string(e.y) +
                                           ") does not fit in 8 bits");
    const auto t = static_cast<std::uint32_t>(e.t);
    out.push_back(static_cast<std::uint8_t>(e.x));
    out.push_back(static_cast<std::uint8_t>(e.y));
    out.push_back(static_cast<std::uint8_t>(((e.p > 0) ? 0x80 : 0x00) | ((t >> 16) & 0x7F)));
    out.push_back(static_cast<std::uint8_t>(t >> 8));
    out.push_back(static_cast<std::uint8_t>(t));
  }
  return out;
}

// --- CSV -------------------------------------------------------------------

EventStream read_csv(std::string_view text, std::optional<Geometry> geometry) {
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines.front()) != "x,y,t,p")
    throw parse_error(1, "missing header \"x,y,t,p\"");

  EventStream s;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t pos = 0;;) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(trim(line.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 4) throw parse_error(line_no, "expected 4 fields");

    long long x, y, t, p;
    if (!parse_number(fields[0], x) || !parse_number(fields[1], y) ||
        !parse_number(fields[2], t) || !parse_number(fields[3], p))
      throw parse_error(line_no, "non-numeric field");
    if (x < 0 || y < 0 || x > std::numeric_limits<std::uint16_t>::max() ||
        y > std::numeric_limits<std::uint16_t>::max())
      throw parse_error(line_no, "coordinate out of range");
    if (t < 0) throw parse_error(line_no, "negative timestamp");
    if (geometry && geometry->width > 0 &&
        (x >= geometry->width || y >= geometry->height))
      throw Error(ErrorKind::Bounds, "line " + std::to_string(line_no) + ": (" + std::to_string(x) +
                                         ", " + std::to_string(y) + ") outside the sensor");
    s.events.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t,
                        polarity_from(p, line_no)});
  }
  s = sort_events(std::move(s));
  infer_geometry(s, geometry);
  set_window_from_events(s);
  return s;
}

std::string write_csv(const EventStream& stream) {
  std::string out = "x,y,t,p\n";
  out.reserve(out.size() + stream.events.size() * 16);
  for (const auto& e : stream.events) {
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += std::to_string(e.t);
    out += e.p > 0 ? ",1\n" : ",-1\n";
  }
  return out;
}

// --- JSONL -----------------------------------------------------------------

EventStream read_jsonl(std::string_view text, std::optional<Geometry> geometry) {
  using nlohmann::json;
  const auto lines = split_lines(text);
  EventStream s;
  bool have_header = false;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& ex) {
      throw parse_error(line_no, ex.what());
    }
    if (!obj.is_object()) throw parse_error(line_no, "expected a JSON object");
    try {
      if (obj.contains("width")) {
        if (have_header || !s.events.empty()) throw parse_error(line_no, "unexpected header object");
        have_header = true;
        s.width = obj.at("width").get<std::uint32_t>();
        s.height = obj.at("height").get<std::uint32_t>();
        s.t_start = obj.value("t_start", Timestamp{0});
        s.t_end = obj.value("t_end", Timestamp{0});
        if (obj.contains("label") && !obj["label"].is_null()) s.label = obj["label"].get<std::string>();
        s.video_id = obj.value("video_id", std::string{});
        continue;
      }
      const auto x = obj.at("x").get<long long>();
      const auto y = obj.at("y").get<long long>();
      const auto t = obj.at("t").get<long long>();
      const auto p = obj.at("p").get<long long>();
      if (x < 0 || y < 0 || x > 65535 || y > 65535) throw parse_error(line_no, "coordinate out of range");
      if (t < 0) throw parse_error(line_no, "negative timestamp");
      s.events.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t,
                          polarity_from(p, line_no)});
    } catch (const json::exception& ex) {
      throw parse_error(line_no, ex.what());
    }
  }
  s = sort_events(std::move(s));
  if (!have_header) {
    infer_geometry(s, geometry);
    set_window_from_events(s);
  } else if (geometry && geometry->width > 0) {
    s.width = geometry->width;
    s.height = geometry->height;
  }
  check_decoded(s, "jsonl");
  return s;
}

std::string write_jsonl(const EventStream& stream) {
  using nlohmann::json;
  json header = {{"width", stream.width},     {"height", stream.height},
                 {"t_start", stream.t_start}, {"t_end", stream.t_end},
                 {"video_id", stream.video_id}};
  header["label"] = stream.label ? json(*stream.label) : json(nullptr);
  std::string out = header.dump();
  out += '\n';
  for (const auto& e : stream.events) {
    out += "{\"x\":" + std::to_string(e.x) + ",\"y\":" + std::to_string(e.y) +
           ",\"t\":" + std::to_string(e.t) + ",\"p\":" + (e.p > 0 ? "1" : "-1") + "}\n";
  }
  return out;
}

// --- Native ----------------------------------------------------------------

EventStream read_native(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "native");
  if (!in.expect_magic(kNativeMagic))
    throw Error(ErrorKind::Format, "native: bad magic (expected \"EVS1\")");
  in.skip(kNativeMagic.size(), "magic");

  EventStream s;
  s.width = in.u32("width");
  s.height = in.u32("height");
  s.t_start = in.i64("t_start");
  s.t_end = in.i64("t_end");
  if (in.u8("label flag") != 0) s.label = in.string("label");
  s.video_id = in.string("video_id");
  const std::uint64_t count = in.u64("event count");
  const std::uint64_t available = in.remaining() / kNativeEventBytes;
  if (available < count)
    throw Error(ErrorKind::Format, "native: truncated event array: expected " + std::to_string(count) +
                                       " events, found " + std::to_string(available));
  if (in.remaining() != count * kNativeEventBytes)
    throw Error(ErrorKind::Format, "native: " + std::to_string(in.remaining() - count * kNativeEventBytes) +
                                       " trailing bytes after event array");
  s.events.resize(count);
  for (auto& e : s.events) {
    e.x = in.u16("x");
    e.y = in.u16("y");
    e.t = in.i64("t");
    e.p = static_cast<std::int8_t>(in.u8("p"));
  }
  check_decoded(s, "native");
  return s;
}

Bytes write_native(const EventStream& stream) {
  detail::ByteWriter out;
  out.reserve(64 + stream.video_id.size() + stream.events.size() * kNativeEventBytes);
  out.put_magic(kNativeMagic);
  out.put_u32(stream.width);
  out.put_u32(stream.height);
  out.put_i64(stream.t_start);
  out.put_i64(stream.t_end);
  out.put_u8(stream.label ? 1 : 0);
  if (stream.label) out.put_string(*stream.label);
  out.put_string(stream.video_id);
  out.put_u64(stream.events.size());
  for (const auto& e : stream.events) {
    out.put_u16(e.x);
    out.put_u16(e.y);
    out.put_i64(e.t);
    out.put_u8(static_cast<std::uint8_t>(e.p));
  }
  return std::move(out).take();
}

// --- Files -----------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, path.string() + ": cannot open for reading");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, path.string() + ": read failed");
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, path.string() + ": write failed");
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

EventStream load_stream(const std::filesystem::path& path, FormatKind kind,
                        std::optional<Geometry> geometry) {
  const Bytes data = read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
  EventStream s;
  switch (kind) {
    case FormatKind::AtisBin:
      if (!geometry || geometry->width == 0 || geometry->height == 0)
        throw Error(ErrorKind::Argument, "atis-bin input requires --width and --height");
      s = read_atis_bin(data, geometry->width, geometry->height);
      break;
    case FormatKind::Csv: s = read_csv(text, geometry); break;
    case FormatKind::Jsonl: s = read_jsonl(text, geometry); break;
    case FormatKind::Native: return read_native(data);
  }
  if (s.video_id.empty()) s.video_id = path.stem().string();
  return s;
}

void save_stream(const std::filesystem::path& path, const EventStream& stream, FormatKind kind) {
  switch (kind) {
    case FormatKind::AtisBin: write_file(path, write_atis_bin(stream)); return;
    case FormatKind::Csv: write_file(path, write_csv(stream)); return;
    case FormatKind::Jsonl: write_file(path, write_jsonl(stream)); return;
    case FormatKind::Native: write_file(path, write_native(stream)); return;
  }
}

}  // namespace eventflux
