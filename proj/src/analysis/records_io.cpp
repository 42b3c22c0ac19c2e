#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "../bytes.hpp"
#include "eventflux/error.hpp"
#include "eventflux/formats.hpp"
#include "eventflux/records.hpp"
#include "json.hpp"

namespace eventflux::analysis {

namespace {

constexpr std::string_view kGradMagic = "GRD1";
constexpr std::array<std::string_view, 7> kRunColumns{"run_id", "split", "seed", "accuracy",
                                                      "lr", "batch_size", "weight_decay"};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0;;) {
    const std::size_t at = line.find(sep, pos);
    std::string_view f = line.substr(pos, at - pos);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (at == std::string_view::npos) break;
    pos = at + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

Error parse_error(std::size_t line_no, const std::string& what) {
  return Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T number(std::string_view field, std::size_t line_no, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw parse_error(line_no, "non-numeric " + std::string(column) + " \"" + std::string(field) + "\"");
  return value;
}

Split parse_split(std::string_view s, std::size_t line_no) {
  if (s == "validation" || s == "val") return Split::Validation;
  if (s == "test") return Split::Test;
  throw parse_error(line_no, "unknown split \"" + std::string(s) + "\"");
}

void check_accuracy(double acc, std::size_t line_no) {
  if (!(acc >= 0.0 && acc <= 1.0))
    throw parse_error(line_no, "accuracy " + std::to_string(acc) + " outside [0, 1]");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<RunRecord> read_runs_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw parse_error(1, "missing header");
  const auto header = split(lines.front(), ',');
  if (header.size() < kRunColumns.size() ||
      !std::equal(kRunColumns.begin(), kRunColumns.end(), header.begin()))
    throw parse_error(1, "header must start with run_id,split,seed,accuracy,lr,batch_size,weight_decay");

  std::vector<RunRecord> runs;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (blank(lines[li])) continue;
    const auto f = split(lines[li], ',');
    if (f.size() != header.size())
      throw parse_error(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(f.size()));
    RunRecord r;
    r.run_id = std::string(f[0]);
    r.split = parse_split(f[1], line_no);
    r.seed = number<std::int64_t>(f[2], line_no, "seed");
    r.accuracy = number<double>(f[3], line_no, "accuracy");
    check_accuracy(r.accuracy, line_no);
    r.learning_rate = number<double>(f[4], line_no, "lr");
    r.batch_size = number<std::int64_t>(f[5], line_no, "batch_size");
    r.weight_decay = number<double>(f[6], line_no, "weight_decay");
    for (std::size_t c = kRunColumns.size(); c < header.size(); ++c)
      r.extras[std::string(header[c])] = std::string(f[c]);
    runs.push_back(std::move(r));
  }
  return runs;
}

std::vector<RunRecord> read_runs_jsonl(std::string_view text) {
  using nlohmann::json;
  std::vector<RunRecord> runs;
  const auto lines = lines_of(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (blank(lines[li])) continue;
    try {
      const json obj = json::parse(lines[li]);
      RunRecord r;
      const auto& id = obj.at("run_id");
      r.run_id = id.is_string() ? id.get<std::string>() : id.dump();
      r.split = parse_split(obj.at("split").get<std::string>(), line_no);
      r.seed = obj.at("seed").get<std::int64_t>();
      r.accuracy = obj.at("accuracy").get<double>();
      check_accuracy(r.accuracy, line_no);
      r.learning_rate = obj.at("lr").get<double>();
      r.batch_size = obj.at("batch_size").get<std::int64_t>();
      r.weight_decay = obj.at("weight_decay").get<double>();
      for (const auto& [key, value] : obj.items()) {
        if (std::find(kRunColumns.begin(), kRunColumns.end(), key) != kRunColumns.end()) continue;
        r.extras[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
      runs.push_back(std::move(r));
    } catch (const json::exception& ex) {
      throw parse_error(line_no, ex.what());
    }
  }
  return runs;
}

std::vector<RunRecord> load_runs(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (path.extension() == ".jsonl") return read_runs_jsonl(text);
  return read_runs_csv(text);
}

std::string write_runs_csv(const std::vector<RunRecord>& records) {
  std::vector<std::string> extra_cols;
  for (const auto& r : records)
    for (const auto& [k, v] : r.extras)
      if (std::find(extra_cols.begin(), extra_cols.end(), k) == extra_cols.end()) extra_cols.push_back(k);

  std::string out = "run_id,split,seed,accuracy,lr,batch_size,weight_decay";
  for (const auto& c : extra_cols) out += "," + c;
  out += '\n';
  for (const auto& r : records) {
    out += r.run_id + ',' + to_string(r.split) + ',' + std::to_string(r.seed) + ',' + fmt(r.accuracy) +
           ',' + fmt(r.learning_rate) + ',' + std::to_string(r.batch_size) + ',' + fmt(r.weight_decay);
    for (const auto& c : extra_cols) {
      auto it = r.extras.find(c);
      out += ',';
      if (it != r.extras.end()) out += it->second;
    }
    out += '\n';
  }
  return out;
}

// --- Gradients -------------------------------------------------------------

GradientSet read_gradients_bin(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "gradient file");
  if (!in.expect_magic(kGradMagic))
    throw Error(ErrorKind::Format, "gradient file: bad magic (expected \"GRD1\")");
  in.skip(kGradMagic.size(), "magic");
  GradientSet g;
  g.layer_id = in.string("layer_id");
  const std::uint32_t m = in.u32("vector count");
  const std::uint64_t dim = in.u64("dimension");
  if (dim != 0 && in.remaining() / 4 / dim < m)
    throw Error(ErrorKind::Format, "gradient file: truncated: expected " + std::to_string(m) + "x" +
                                       std::to_string(dim) + " values");
  g.vectors.assign(m, std::vector<float>(dim));
  for (auto& v : g.vectors)
    for (auto& x : v) x = in.f32("gradient value");
  if (in.remaining() != 0)
    throw Error(ErrorKind::Format, "gradient file: " + std::to_string(in.remaining()) + " trailing bytes");
  return g;
}

std::vector<std::uint8_t> write_gradients_bin(const GradientSet& grads) {
  detail::ByteWriter out;
  out.put_magic(kGradMagic);
  out.put_string(grads.layer_id);
  out.put_u32(static_cast<std::uint32_t>(grads.vectors.size()));
  out.put_u64(grads.dimension());
  for (const auto& v : grads.vectors)
    for (float x : v) out.put_f32(x);
  return std::move(out).take();
}

GradientSet read_gradients_csv(std::string_view text, std::string layer_id) {
  GradientSet g;
  g.layer_id = std::move(layer_id);
  const auto lines = lines_of(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (blank(lines[li])) continue;
    std::vector<float> v;
    for (auto field : split(lines[li], ',')) v.push_back(number<float>(field, li + 1, "gradient value"));
    if (!g.vectors.empty() && v.size() != g.vectors.front().size())
      throw parse_error(li + 1, "vector length " + std::to_string(v.size()) + " differs from " +
                                    std::to_string(g.vectors.front().size()));
    g.vectors.push_back(std::move(v));
  }
  return g;
}

GradientSet load_gradients(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (path.extension() == ".csv")
    return read_gradients_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()},
                              path.stem().string());
  return read_gradients_bin(bytes);
}

// --- Reports ---------------------------------------------------------------

std::string report_json(const SensitivityReport& report) {
  using nlohmann::json;
  json per_k = json::array();
  for (const auto& e : report.per_k)
    per_k.push_back({{"k", e.k},
                     {"metric", e.metric},
                     {"cluster_centers", e.centers},
                     {"cluster_sizes", e.sizes},
                     {"most_populated_center", e.most_populated_center},
                     {"max_cluster_center", e.max_cluster_center}});
  const json doc = {{"metric", report.metric},
                    {"best_k", report.best_k},
                    {"per_k", per_k},
                    {"max_accuracy", report.max_accuracy},
                    {"most_populated_center", report.most_populated_center},
                    {"max_cluster_center", report.max_cluster_center},
                    {"degenerate", report.degenerate}};
  return doc.dump(2) + "\n";
}

std::string report_per_k_csv(const SensitivityReport& report) {
  std::string out = "k,metric,most_populated_center,max_cluster_center,cluster_centers,cluster_sizes\n";
  for (const auto& e : report.per_k) {
    std::string centers, sizes;
    for (std::size_t c = 0; c < e.centers.size(); ++c) {
      centers += (c ? ";" : "") + fmt(e.centers[c]);
      sizes += (c ? ";" : "") + std::to_string(e.sizes[c]);
    }
    out += std::to_string(e.k) + ',' + fmt(e.metric) + ',' + fmt(e.most_populated_center) + ',' +
           fmt(e.max_cluster_center) + ',' + centers + ',' + sizes + '\n';
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) out += fmt(b.lo) + ',' + fmt(b.hi) + ',' + std::to_string(b.count) + '\n';
  return out;
}

std::string histogram_svg(const std::vector<HistogramBin>& bins, std::string_view title) {
  constexpr double kWidth = 640, kHeight = 360, kMargin = 40;
  std::size_t peak = 1;
  for (const auto& b : bins) peak = std::max(peak, b.count);
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  const double bar_w = bins.empty() ? 0.0 : plot_w / static_cast<double>(bins.size());

  std::string escaped;
  for (char c : title) {
    switch (c) {
      case '<': escaped += "&lt;"; break;
      case '>': escaped += "&gt;"; break;
      case '&': escaped += "&amp;"; break;
      case '"': escaped += "&quot;"; break;
      default: escaped += c;
    }
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
                    fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         escaped + "</text>\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double h = plot_h * static_cast<double>(bins[i].count) / static_cast<double>(peak);
    svg += "<rect x=\"" + fmt(kMargin + bar_w * static_cast<double>(i)) + "\" y=\"" +
           fmt(kMargin + plot_h - h) + "\" width=\"" + fmt(bar_w) + "\" height=\"" + fmt(h) +
           "\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  svg += "<line x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(kMargin + plot_h) + "\" x2=\"" +
         fmt(kMargin + plot_w) + "\" y2=\"" + fmt(kMargin + plot_h) + "\" stroke=\"black\"/>\n";
  if (!bins.empty()) {
    svg += "<text x=\"" + fmt(kMargin) + "\" y=\"" + fmt(kHeight - 16) + "\" font-size=\"11\">" +
           fmt(bins.front().lo) + "</text>\n";
    svg += "<text x=\"" + fmt(kMargin + plot_w) + "\" y=\"" + fmt(kHeight - 16) +
           "\" text-anchor=\"end\" font-size=\"11\">" + fmt(bins.back().hi) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(kMargin - 4) + "\" y=\"" + fmt(kMargin + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + std::to_string(peak) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace eventflux::analysis
