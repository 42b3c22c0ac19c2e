#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "eventflux/analysis.hpp"
#include "eventflux/error.hpp"
#include "eventflux/formats.hpp"
#include "eventflux/parallel.hpp"
#include "eventflux/records.hpp"
#include "eventflux/represent.hpp"
#include "eventflux/subsample.hpp"
#include "eventflux/synth.hpp"
#include "eventflux/version.hpp"
#include "json.hpp"

namespace eventflux::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kFormatNames{"atis-bin", "csv", "jsonl", "native"};

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = default_threads();
  bool quiet = false;
};

/// Where streams come from: path plus optional explicit format and geometry.
struct StreamSource {
  std::string path;
  std::string format;
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--in", path, "Input event file")->required();
    cmd->add_option("--in-format", format, "Input format (default: from extension)")
        ->check(CLI::IsMember(kFormatNames));
    cmd->add_option("--width", width, "Sensor width (required for atis-bin)");
    cmd->add_option("--height", height, "Sensor height (required for atis-bin)");
  }

  FormatKind kind() const { return resolve_format(format, path, "--in-format"); }

  EventStream load() const {
    std::optional<Geometry> geometry;
    if (width > 0 || height > 0) {
      if (width == 0 || height == 0)
        throw Error(ErrorKind::Argument, "--width and --height must be given together");
      geometry = Geometry{width, height};
    }
    return load_stream(path, kind(), geometry);
  }

  static FormatKind resolve_format(const std::string& name, const fs::path& path, const char* flag) {
    if (!name.empty()) return *parse_format(name);
    if (auto k = format_from_extension(path)) return *k;
    throw Error(ErrorKind::Argument, "cannot infer the format of " + path.string() + "; pass " + flag);
  }
};

void emit(std::ostream& out, const json& summary) { out << summary.dump() << '\n'; }

std::string shape_string(const std::array<std::uint32_t, 4>& dims) {
  std::ostringstream s;
  s << '(' << dims[0] << ", " << dims[1] << ", " << dims[2] << ", " << dims[3] << ')';
  return s.str();
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("EVENTFLUX_SEED");
  if (!raw || !*raw) return std::nullopt;
  std::uint64_t v = 0;
  const std::string_view s(raw);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::Argument, "EVENTFLUX_SEED is not an unsigned integer: " + std::string(s));
  return v;
}

// --- convert -----------------------------------------------------------------

struct ConvertCmd {
  StreamSource src;
  std::string out_path;
  std::string out_format;

  void attach(CLI::App* cmd) {
    src.add_options(cmd);
    cmd->add_option("--out", out_path, "Output file")->required();
    cmd->add_option("--out-format", out_format, "Output format (default: from extension)")
        ->check(CLI::IsMember(kFormatNames));
  }

  json run(const Globals&, std::ostream&) const {
    const EventStream s = src.load();
    const FormatKind out_kind = StreamSource::resolve_format(out_format, out_path, "--out-format");
    save_stream(out_path, s, out_kind);
    return {{"command", "convert"},     {"events", s.size()},
            {"duration_us", s.duration()}, {"in_format", to_string(src.kind())},
            {"out_format", to_string(out_kind)}, {"out", out_path}};
  }
};

// --- subsample -----------------------------------------------------------------

struct SubsampleCmd {
  StreamSource src;
  std::size_t n = 0;
  std::uint64_t epoch = 0;
  std::size_t repeats = 0;
  std::string out_path;
  std::string out_format;

  void attach(CLI::App* cmd) {
    src.add_options(cmd);
    cmd->add_option("--n", n, "Events to keep per video")->required();
    auto* ep = cmd->add_option("--epoch", epoch, "Epoch index of the draw");
    cmd->add_option("--repeats", repeats, "Write draws for epochs 0..R-1 to <out>.r000...")
        ->check(CLI::PositiveNumber)
        ->excludes(ep);
    cmd->add_option("--out", out_path, "Output file")->required();
    cmd->add_option("--out-format", out_format, "Output format (default: from extension, else native)")
        ->check(CLI::IsMember(kFormatNames));
  }

  json run(const Globals& g, std::ostream& err) const {
    const EventStream s = src.load();
    FormatKind kind = FormatKind::Native;
    if (!out_format.empty()) kind = *parse_format(out_format);
    else if (auto k = format_from_extension(out_path)) kind = *k;

    json outputs = json::array();
    if (repeats == 0) {
      const EventStream draw = subsample(s, {n, g.seed, epoch});
      save_stream(out_path, draw, kind);
      outputs.push_back({{"path", out_path}, {"events", draw.size()}, {"epoch", epoch}});
    } else {
      std::vector<EventStream> draws(repeats);
      std::vector<std::string> paths(repeats);
      parallel_for(repeats, g.threads, [&](std::size_t r) {
        draws[r] = subsample(s, {n, g.seed, r});
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, ".r%03zu", r);
        paths[r] = out_path + suffix;
      });
      for (std::size_t r = 0; r < repeats; ++r) {
        save_stream(paths[r], draws[r], kind);
        outputs.push_back({{"path", paths[r]}, {"events", draws[r].size()}, {"epoch", r}});
      }
    }
    if (!g.quiet)
      err << "subsampled " << s.size() << " events of " << (s.video_id.empty() ? src.path : s.video_id)
          << " to " << std::min(n, s.size()) << " (" << outputs.size() << " draw(s))\n";
    return {{"command", "subsample"}, {"input_events", s.size()}, {"seed", g.seed}, {"outputs", outputs}};
  }
};

// --- represent -----------------------------------------------------------------

struct RepresentCmd {
  StreamSource src;
  std::string representation = "est";
  int channels = kDefaultChannelsPerPolarity;
  std::string kernel = "triangular";
  double sigma = 0.0;
  std::string kernel_file;
  bool raw_time = false;
  std::string out_path;
  std::string csv_path;

  void attach(CLI::App* cmd) {
    src.add_options(cmd);
    cmd->add_option("--representation", representation, "est, count or surface")
        ->check(CLI::IsMember({"est", "count", "surface"}));
    cmd->add_option("--channels", channels, "Temporal bins per polarity")->check(CLI::PositiveNumber);
    cmd->add_option("--kernel", kernel, "Temporal filter")
        ->check(CLI::IsMember({"delta", "triangular", "gaussian", "mlp"}));
    cmd->add_option("--sigma", sigma, "Gaussian width on the normalized time axis");
    cmd->add_option("--kernel-file", kernel_file, "ESTK weights for the mlp kernel");
    cmd->add_flag("--raw-time", raw_time, "Use raw microsecond timestamps instead of normalizing");
    cmd->add_option("--out", out_path, "Tensor payload path (header written to <out>.hdr)")->required();
    cmd->add_option("--csv", csv_path, "Also write nonzero cells as CSV");
  }

  KernelSpec make_kernel() const {
    if (kernel == "delta") return KernelSpec::delta();
    if (kernel == "triangular") return KernelSpec::triangular();
    if (kernel == "gaussian") return KernelSpec::gaussian(sigma);
    if (kernel_file.empty()) throw Error(ErrorKind::Argument, "--kernel mlp requires --kernel-file");
    return load_mlp_kernel(fs::path(kernel_file));
  }

  json run(const Globals& g, std::ostream& err) const {
    FrameTensor tensor;
    if (representation == "est") {
      ReprConfig cfg;
      cfg.channels_per_polarity = channels;
      cfg.kernel = make_kernel();
      cfg.normalize_time = !raw_time;
      tensor = est_frames(src.load(), cfg);
    } else if (representation == "count") {
      tensor = count_histogram(src.load());
    } else {
      tensor = time_surface(src.load());
    }
    write_tensor(out_path, tensor);
    if (!csv_path.empty()) write_file(csv_path, tensor_nonzero_csv(tensor));
    const std::size_t nonzero = tensor.nonzero_count();
    if (!g.quiet)
      err << representation << " tensor " << shape_string(tensor.shape()) << ", " << nonzero << " of "
          << tensor.data.size() << " cells nonzero\n";
    return {{"command", "represent"},
            {"representation", representation},
            {"shape", shape_string(tensor.shape())},
            {"dims", tensor.shape()},
            {"events", tensor.event_count},
            {"nonzero", nonzero},
            {"out", out_path}};
  }
};

// --- hp-sensitivity ------------------------------------------------------------

struct SensitivityCmd {
  std::string runs_path;
  std::string split = "validation";
  std::string out_path;
  std::string per_k_path;
  std::size_t kmax = analysis::kSensitivityMaxK;

  void attach(CLI::App* cmd) {
    cmd->add_option("--runs", runs_path, "Run records (.csv or .jsonl)")->required();
    cmd->add_option("--split", split, "Which split's accuracies to cluster")
        ->check(CLI::IsMember({"validation", "test"}));
    cmd->add_option("--out", out_path, "Report JSON path")->required();
    cmd->add_option("--per-k", per_k_path, "Per-k CSV path (default: <out stem>.per_k.csv)");
    cmd->add_option("--kmax", kmax, "Largest number of clusters")->check(CLI::Range(2, 1000));
  }

  json run(const Globals& g, std::ostream& err) const {
    const auto all = analysis::load_runs(runs_path);
    const auto wanted = split == "test" ? analysis::Split::Test : analysis::Split::Validation;
    std::vector<analysis::RunRecord> runs;
    for (const auto& r : all)
      if (r.split == wanted) runs.push_back(r);
    if (runs.empty()) throw Error(ErrorKind::Argument, "no " + split + " runs in " + runs_path);

    const auto report = analysis::hp_sensitivity(std::span<const analysis::RunRecord>(runs), kmax, g.seed);
    write_file(out_path, analysis::report_json(report));
    fs::path per_k = per_k_path;
    if (per_k.empty()) per_k = fs::path(out_path).replace_extension(".per_k.csv");
    write_file(per_k, analysis::report_per_k_csv(report));

    json summary = {{"command", "hp-sensitivity"}, {"split", split},
                    {"runs", runs.size()},         {"metric", report.metric},
                    {"best_k", report.best_k},     {"degenerate", report.degenerate},
                    {"max_accuracy", report.max_accuracy}};
    try {
      const auto acc = analysis::mean_accuracy_summary(std::span<const analysis::RunRecord>(runs));
      summary["mean_accuracy"] = acc.mean;
      summary["max_to_mean_improvement_percent"] = acc.improvement_percent;
    } catch (const Error&) {
      // mean of zero; the metric above already failed in that case
    }
    if (!g.quiet)
      err << "hp sensitivity over " << runs.size() << " " << split << " runs: " << report.metric
          << " (k = " << report.best_k << ")\n";
    return summary;
  }
};

// --- grad-diversity ------------------------------------------------------------

struct GradDiversityCmd {
  std::string grads_path;
  std::size_t bins = analysis::kCosineHistogramBins;
  std::string out_path;
  std::string svg_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--grads", grads_path, "Gradient set (GRD1 container or .csv)")->required();
    cmd->add_option("--bins", bins, "Histogram bins over [-1, 1]")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_path, "Histogram CSV path")->required();
    cmd->add_option("--svg", svg_path, "Optional SVG bar chart");
  }

  json run(const Globals& g, std::ostream& err) const {
    const auto grads = analysis::load_gradients(grads_path);
    const auto sims = analysis::pairwise_cosine(grads, g.threads);
    const auto hist = analysis::histogram(sims, bins, -1.0, 1.0);
    write_file(out_path, analysis::histogram_csv(hist));
    if (!svg_path.empty())
      write_file(svg_path, analysis::histogram_svg(
                               hist, "Cosine similarity of gradients" +
                                         (grads.layer_id.empty() ? std::string{} : " (" + grads.layer_id + ")")));
    double mean = 0.0;
    for (double s : sims) mean += s;
    mean /= static_cast<double>(sims.size());
    if (!g.quiet) err << "pairs: " << sims.size() << "\n";
    return {{"command", "grad-diversity"}, {"layer_id", grads.layer_id}, {"vectors", grads.vectors.size()},
            {"pairs", sims.size()},         {"mean_cosine", mean},         {"bins", bins}};
  }
};

// --- binomial -------------------------------------------------------------------

struct BinomialCmd {
  std::uint64_t correct = 0;
  std::uint64_t trials = 0;
  double chance = 0.5;

  void attach(CLI::App* cmd) {
    cmd->add_option("--correct", correct, "Correct predictions")->required();
    cmd->add_option("--trials", trials, "Number of test samples")->required();
    cmd->add_option("--chance", chance, "Chance level, 1 / #classes")->required();
  }

  // Written by hand so the p-value keeps its 4-significant-digit notation.
  std::string run(const Globals&, std::ostream&) const {
    const double log_p = analysis::log_binomial_tail(correct, trials, chance);
    std::ostringstream s;
    s.precision(17);
    s << "{\"command\":\"binomial\",\"correct\":" << correct << ",\"trials\":" << trials
      << ",\"chance\":" << chance << ",\"log_p\":" << log_p
      << ",\"p_value\":" << analysis::format_p_value(log_p) << "}";
    return s.str();
  }
};

// --- gen-fan --------------------------------------------------------------------

struct GenFanCmd {
  synth::FanConfig cfg;
  std::string out_path;
  std::string dataset_dir;
  double slow_speed = 10.0;
  double fast_speed = 30.0;
  std::size_t n_slow = synth::kDefaultSlowVideos;
  std::size_t n_fast = synth::kDefaultFastVideos;
  std::string label;

  void attach(CLI::App* cmd) {
    cmd->add_option("--speed", cfg.angular_speed, "Revolutions per second (single clip)");
    cmd->add_option("--duration", cfg.duration, "Clip length in microseconds");
    cmd->add_option("--blades", cfg.n_blades, "Number of blades");
    cmd->add_option("--events-per-rev", cfg.events_per_revolution, "Blade events per revolution");
    cmd->add_option("--noise-rate", cfg.noise_rate, "Background events per second");
    cmd->add_option("--width", cfg.width, "Sensor width");
    cmd->add_option("--height", cfg.height, "Sensor height");
    cmd->add_option("--label", label, "Class label of the single clip");
    auto* out = cmd->add_option("--out", out_path, "Single clip output file");
    auto* dataset = cmd->add_option("--dataset", dataset_dir, "Write a two-class dataset here");
    cmd->add_option("--slow-speed", slow_speed, "Dataset: speed of class speed1");
    cmd->add_option("--fast-speed", fast_speed, "Dataset: speed of class speed3");
    cmd->add_option("--n-slow", n_slow, "Dataset: clips of class speed1");
    cmd->add_option("--n-fast", n_fast, "Dataset: clips of class speed3");
    out->excludes(dataset);
  }

  json run(const Globals& g, std::ostream& err) const {
    synth::FanConfig base = cfg;
    base.seed = g.seed;
    if (!dataset_dir.empty()) {
      synth::FanConfig slow = base, fast = base;
      slow.angular_speed = slow_speed;
      fast.angular_speed = fast_speed;
      const auto rows = synth::gen_two_class_fan_dataset(slow, fast, n_slow, n_fast, dataset_dir, g.threads);
      std::size_t total = 0;
      for (const auto& r : rows) total += r.event_count;
      if (!g.quiet) err << synth::manifest_csv(rows);
      return {{"command", "gen-fan"},
              {"videos", rows.size()},
              {"events_total", total},
              {"manifest", (fs::path(dataset_dir) / "manifest.csv").generic_string()}};
    }
    if (out_path.empty()) throw Error(ErrorKind::Argument, "gen-fan needs --out or --dataset");
    if (!label.empty()) base.label = label;
    base.video_id = fs::path(out_path).stem().string();
    const EventStream s = synth::gen_fan(base);
    const auto kind = format_from_extension(out_path).value_or(FormatKind::Native);
    save_stream(out_path, s, kind);
    if (!g.quiet) err << "path,label,event_count\n" << out_path << ',' << s.label.value_or("") << ',' << s.size() << '\n';
    return {{"command", "gen-fan"}, {"videos", 1}, {"events", s.size()}, {"duration_us", s.duration()},
            {"out", out_path}};
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-stream subsampling, frame representations and analysis tools", "eventflux"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1, 1);

  Globals globals;
  app.add_option("--seed", globals.seed, "Master seed (default: $EVENTFLUX_SEED or 0)");
  app.add_option("--threads", globals.threads, "Worker threads (default: all cores)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", globals.quiet, "Suppress human-readable detail on stderr");

  ConvertCmd convert;
  SubsampleCmd subsample_cmd;
  RepresentCmd represent;
  SensitivityCmd sensitivity;
  GradDiversityCmd grad;
  BinomialCmd binomial;
  GenFanCmd gen_fan_cmd;

  std::function<void()> action;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    cmd.attach(sub);
    sub->callback([&] {
      action = [&] { emit(out, cmd.run(globals, err)); };
    });
  };
  add("convert", "Convert between event file formats", convert);
  add("subsample", "Draw a per-epoch random subset of events", subsample_cmd);
  add("represent", "Accumulate events into a frame tensor", represent);
  add("hp-sensitivity", "Hyperparameter sensitivity metric over run accuracies", sensitivity);
  add("grad-diversity", "Histogram of pairwise gradient cosine similarities", grad);
  add("gen-fan", "Generate synthetic rotating-fan event streams", gen_fan_cmd);

  CLI::App* binom = app.add_subcommand("binomial", "One-tailed binomial test against chance");
  binom->fallthrough();
  binomial.attach(binom);
  binom->callback([&] { action = [&] { out << binomial.run(globals, err) << '\n'; }; });

  try {
    if (auto env = seed_from_env()) globals.seed = *env;
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    action();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Io ? kExitIo : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace eventflux::cli
