// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Tolerances and limits are fixed here, not tuned.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "eventflux/analysis.hpp"
#include "eventflux/formats.hpp"
#include "eventflux/represent.hpp"
#include "eventflux/subsample.hpp"
#include "eventflux/synth.hpp"
#include "oracles.hpp"

using namespace eventflux;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (time_limit_s > 0 && secs >= time_limit_s)
    o.require(false, fmt("runtime %.1f s exceeds %.0f s", secs, time_limit_s));
  if (!o.pass) ++failures;
  std::printf("[%s] %d. %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, secs,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

KernelSpec kernel_for(int i, std::mt19937_64& rng) {
  switch (i % 4) {
    case 0: return KernelSpec::delta();
    case 1: return KernelSpec::triangular();
    case 2: return KernelSpec::gaussian(std::uniform_real_distribution<>(0.02, 0.5)(rng));
    default: return KernelSpec::mlp_kernel(oracle::random_mlp(rng));
  }
}

std::vector<EventStream> frame_fixtures() {
  std::mt19937_64 rng(0xE51);
  std::vector<EventStream> out;
  for (int i = 0; i < 200; ++i) {
    const auto w = 1 + static_cast<std::uint32_t>(rng() % 64);
    const auto h = 1 + static_cast<std::uint32_t>(rng() % 64);
    const std::size_t n = i < 20 ? 10'000 : rng() % 10'001;
    const Timestamp t0 = static_cast<Timestamp>(rng() % 1'000'000);
    const Timestamp t1 = t0 + 1 + static_cast<Timestamp>(rng() % 2'000'000);
    auto s = oracle::random_stream(rng, n, w, h, t0, t1);
    s.video_id = "fixture" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

// --- 1 --------------------------------------------------------------------------

Outcome frame_oracle(const std::vector<EventStream>& fixtures) {
  Outcome o;
  std::mt19937_64 rng(0xA11);
  double worst = 0.0;
  std::size_t misrounded = 0;
  int kinds_seen = 0;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const ReprConfig cfg{kDefaultChannelsPerPolarity, kernel_for(int(i), rng), true};
    kinds_seen |= 1 << int(cfg.kernel.kind);
    const auto got = est_frames_f64(fixtures[i], cfg);
    const auto ref = oracle::est_bucketed(fixtures[i], cfg.channels_per_polarity, cfg.kernel, true);
    o.require(got.data.size() == ref.size(), "size mismatch on fixture " + std::to_string(i));
    if (got.data.size() != ref.size()) continue;
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::fabs(got.data[k] - ref[k]));
    // The 32-bit tensor must be the reference sum rounded once to float.
    const auto narrow = est_frames(fixtures[i], cfg);
    for (std::size_t k = 0; k < ref.size(); ++k) misrounded += narrow.data[k] != static_cast<float>(ref[k]);
  }
  o.require(kinds_seen == 0xF, "not every kernel kind was exercised");
  o.require(worst <= 1e-9, fmt("max abs error %.3e > 1e-9", worst));
  o.require(misrounded == 0, fmt("%zu float32 cells are not the rounded reference", misrounded));
  if (o.pass) o.detail = fmt("200 streams, max abs error %.3e; float32 tensor correctly rounded", worst);
  return o;
}

// --- 2 --------------------------------------------------------------------------

Outcome channel_count(const std::vector<EventStream>& fixtures) {
  Outcome o;
  std::size_t checked = 0;
  auto check = [&](const EventStream& s) {
    const auto v = est_frames(s, ReprConfig{});
    o.require(v.polarities * v.channels == 18 && v.shape()[0] == 2 && v.shape()[1] == 9 &&
                  v.shape()[2] == s.height && v.shape()[3] == s.width,
              "wrong shape for " + s.video_id);
    ++checked;
  };
  for (const auto& s : fixtures) check(s);
  synth::FanConfig fan;
  for (std::size_t i = 0; i < 10; ++i) check(synth::gen_fan(synth::clip_config(fan, synth::kSlowLabel, i)));
  if (o.pass) o.detail = fmt("%zu fixtures, 2 x 9 = 18 channels each", checked);
  return o;
}

// --- 3 --------------------------------------------------------------------------

Outcome pair_count() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> nd;
  analysis::GradientSet g;
  g.vectors.assign(100, std::vector<float>(256));
  for (auto& v : g.vectors)
    for (auto& x : v) x = nd(rng);
  const auto sims = analysis::pairwise_cosine(g);
  o.require(sims.size() == 4950, fmt("got %zu values", sims.size()));
  if (o.pass) o.detail = "M = 100 -> 4950 values";
  return o;
}

// --- 4 --------------------------------------------------------------------------

std::vector<double> spikes(std::initializer_list<std::pair<double, int>> parts) {
  std::vector<double> v;
  for (auto [value, n] : parts) v.insert(v.end(), std::size_t(n), value);
  return v;
}

Outcome sensitivity_oracle() {
  Outcome o;
  const auto two = spikes({{0.5, 40}, {1.0, 10}});
  const double m2 = analysis::hp_sensitivity(two).metric;
  o.require(std::fabs(m2 - 0.5) <= 1e-6, fmt("two-spike metric %.9f", m2));

  const auto three = spikes({{0.2, 30}, {0.6, 15}, {0.95, 5}});
  const double expected = (0.95 - 0.2) / 0.95;
  const double oracle_value = oracle::sensitivity_metric(three);
  const double m3 = analysis::hp_sensitivity(three).metric;
  o.require(std::fabs(oracle_value - expected) <= 1e-6, fmt("exhaustive oracle gives %.9f", oracle_value));
  o.require(std::fabs(m3 - expected) <= 1e-6, fmt("three-spike metric %.9f", m3));
  o.require(std::fabs(m3 - oracle_value) <= 1e-6, "three-spike metric disagrees with oracle");

  const auto flat = analysis::hp_sensitivity(std::vector<double>(50, 0.64));
  o.require(flat.metric == 0.0, fmt("constant metric %.9f", flat.metric));
  if (o.pass) o.detail = fmt("two-spike %.6f, three-spike %.6f, constant 0", m2, m3);
  return o;
}

// --- 5 --------------------------------------------------------------------------

Outcome sensitivity_invariances() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<> u(0, 1);
  double worst_perm = 0.0, worst_scale = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> acc(2 + rng() % 99);
    const int mode = trial % 3;
    for (auto& a : acc) {
      if (mode == 0) a = u(rng);
      else if (mode == 1) a = double(1 + rng() % 8) / 8.0;
      else a = std::min(1.0, 0.3 + 0.5 * u(rng) * u(rng));
    }
    if (std::all_of(acc.begin(), acc.end(), [](double a) { return a == 0.0; })) acc[0] = 0.5;
    const double m = analysis::hp_sensitivity(acc).metric;
    o.require(m >= 0.0 && m <= 1.0, fmt("metric %.6f out of [0, 1]", m));

    auto shuffled = acc;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    worst_perm = std::max(worst_perm, std::fabs(analysis::hp_sensitivity(shuffled).metric - m));

    const double s = std::exp(std::uniform_real_distribution<>(-3, 3)(rng));
    for (auto& a : acc) a *= s;
    worst_scale = std::max(worst_scale, std::fabs(analysis::hp_sensitivity(acc).metric - m));
  }
  o.require(worst_perm <= 1e-12, fmt("permutation drift %.3e", worst_perm));
  o.require(worst_scale <= 1e-12, fmt("rescaling drift %.3e", worst_scale));
  if (o.pass) o.detail = fmt("1000 sets, drift: permutation %.1e, rescaling %.1e", worst_perm, worst_scale);
  return o;
}

// --- 6 --------------------------------------------------------------------------

Outcome subsampling_statistics() {
  Outcome o;
  const std::size_t n = 10'000;
  EventStream s;
  s.width = 10'000;
  s.height = 1;
  s.t_end = Timestamp(n);
  s.video_id = "uniformity";
  for (std::size_t i = 0; i < n; ++i) s.events.push_back({std::uint16_t(i), 0, Timestamp(i), 1});

  std::vector<std::size_t> counts(n, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (std::uint64_t epoch = 0; epoch < 100; ++epoch)
      ++counts[subsample(s, {1, seed, epoch}).events.at(0).x];
  const double p = oracle::chi_square_uniform_p(counts);
  o.require(p > 0.01, fmt("chi-square p = %.4f", p));

  std::mt19937_64 rng(6);
  std::vector<EventStream> videos;
  for (int i = 0; i < 64; ++i) {
    auto v = oracle::random_stream(rng, rng() % 20'000, 64, 64, 0, 1'000'000);
    v.video_id = "video" + std::to_string(i);
    videos.push_back(std::move(v));
  }
  auto bytes_of = [](const std::vector<EventStream>& draws) {
    std::vector<Bytes> b;
    for (const auto& d : draws) b.push_back(write_native(d));
    return b;
  };
  for (std::uint64_t epoch = 0; epoch < 3; ++epoch) {
    const SubsamplePlan plan{1024, 42, epoch};
    const auto a = bytes_of(subsample_all(videos, plan, 1));
    const auto b = bytes_of(subsample_all(videos, plan, 1));
    const auto c = bytes_of(subsample_all(videos, plan, 8));
    o.require(a == b, "repeated runs differ");
    o.require(a == c, "1 vs 8 threads differ");
  }
  if (o.pass) o.detail = fmt("chi-square p = %.4f; byte-identical across runs and 1/8 threads", p);
  return o;
}

// --- 7 --------------------------------------------------------------------------

Outcome format_round_trips() {
  Outcome o;
  std::mt19937_64 rng(7);
  int atis = 0, csv = 0, native = 0;
  for (int i = 0; i < 1000; ++i) {
    // atis-bin: 8-bit coordinates, 23-bit timestamps, no metadata.
    {
      const auto w = 1 + std::uint32_t(rng() % 256), h = 1 + std::uint32_t(rng() % 256);
      auto s = oracle::random_stream(rng, rng() % 2000, w, h, 0, kAtisMaxTimestamp);
      const Bytes b = write_atis_bin(s);
      const auto back = read_atis_bin(b, w, h);
      atis += back.events == s.events && write_atis_bin(back) == b;
    }
    // csv: any coordinates and non-negative timestamps, geometry supplied.
    {
      const auto w = 1 + std::uint32_t(rng() % 65535), h = 1 + std::uint32_t(rng() % 65535);
      auto s = oracle::random_stream(rng, rng() % 2000, w, h, 0, Timestamp(1) << 50);
      const std::string text = write_csv(s);
      const auto back = read_csv(text, Geometry{w, h});
      csv += back.events == s.events && write_csv(back) == text;
    }
    // native: everything, including window, label and id.
    {
      const auto w = 1 + std::uint32_t(rng() % 65535), h = 1 + std::uint32_t(rng() % 65535);
      const Timestamp t0 = Timestamp(rng() % (1ull << 40));
      auto s = oracle::random_stream(rng, rng() % 2000, w, h, t0, t0 + Timestamp(rng() % (1ull << 40)));
      if (rng() & 1) s.label = "class" + std::to_string(rng() % 101);
      const Bytes b = write_native(s);
      const auto back = read_native(b);
      native += back == s && write_native(back) == b;
    }
  }
  o.require(atis == 1000, fmt("atis-bin %d/1000", atis));
  o.require(csv == 1000, fmt("csv %d/1000", csv));
  o.require(native == 1000, fmt("native %d/1000", native));
  if (o.pass) o.detail = "atis-bin, csv, native: 1000/1000 each";
  return o;
}

// --- 8 --------------------------------------------------------------------------

Outcome binomial_oracle() {
  Outcome o;
  struct Chance {
    unsigned num, den;
  };
  double worst = 0.0;
  std::size_t points = 0;
  for (Chance c : {Chance{1, 2}, Chance{1, 24}, Chance{1, 101}}) {
    const double q = double(c.num) / double(c.den);
    for (unsigned n = 0; n <= 200; ++n) {
      const auto tails = oracle::log_binomial_tails(n, c.num, c.den);
      for (unsigned k = 0; k <= n; ++k) {
        const double log_p = analysis::log_binomial_tail(k, n, q);
        // |p/p_ref - 1| from the log difference, kept in extended precision.
        const oracle::BigFloat diff = oracle::BigFloat(log_p) - tails[k];
        const double rel = std::fabs(std::expm1(static_cast<double>(diff)));
        worst = std::max(worst, rel);
        ++points;
      }
    }
  }
  // 12 significant digits: relative error below half a unit in the 12th digit.
  o.require(worst <= 5e-13, fmt("max relative error %.3e over %zu points", worst, points));
  if (o.pass) o.detail = fmt("%zu points, max relative error %.2e", points, worst);
  return o;
}

// --- 9 --------------------------------------------------------------------------

struct HistogramStats {
  double nonzero_cells;
  double mean_radius;
  double positive_fraction;
};

HistogramStats histogram_stats(const EventStream& s) {
  const auto h = count_histogram(s);
  const double cx = (s.width - 1) / 2.0, cy = (s.height - 1) / 2.0;
  double cells = 0, radius = 0, total = 0, positive = 0;
  for (std::uint32_t p = 0; p < 2; ++p)
    for (std::uint32_t y = 0; y < h.height; ++y)
      for (std::uint32_t x = 0; x < h.width; ++x) {
        const double c = h.at(p, 0, y, x);
        if (c == 0) continue;
        cells += 1;
        radius += c * std::hypot(x - cx, y - cy);
        total += c;
        if (p == 1) positive += c;
      }
  return {cells, total > 0 ? radius / total : 0.0, total > 0 ? positive / total : 0.0};
}

std::vector<EventStream> fan_class(const synth::FanConfig& base, const char* label, std::size_t first,
                                   std::size_t count) {
  std::vector<EventStream> out;
  for (std::size_t i = first; i < first + count; ++i) out.push_back(synth::gen_fan(synth::clip_config(base, label, i)));
  return out;
}

Outcome fan_sanity() {
  Outcome o;
  synth::FanConfig slow, fast;
  slow.angular_speed = 10.0;
  fast.angular_speed = 30.0;

  // Heavy subsampling: per-video statistics of the count histograms at 8
  // events, compared across classes with a two-sample rank test per seed.
  const std::size_t per_class = 100;
  const int seeds = 5;
  std::vector<double> mean_p(3, 0.0);
  for (int seed = 0; seed < seeds; ++seed) {
    slow.seed = fast.seed = 1000 + std::uint64_t(seed);
    std::vector<std::vector<double>> a(3), b(3);
    auto collect = [&](const std::vector<EventStream>& clips, std::vector<std::vector<double>>& dst) {
      for (const auto& clip : clips) {
        const auto st = histogram_stats(subsample(clip, {8, std::uint64_t(seed), 0}));
        dst[0].push_back(st.nonzero_cells);
        dst[1].push_back(st.mean_radius);
        dst[2].push_back(st.positive_fraction);
      }
    };
    collect(fan_class(slow, synth::kSlowLabel, 0, per_class), a);
    collect(fan_class(fast, synth::kFastLabel, 0, per_class), b);
    for (int k = 0; k < 3; ++k) mean_p[k] += oracle::mann_whitney_p(a[k], b[k]) / seeds;
  }
  const char* names[3] = {"nonzero cells", "mean radius", "positive fraction"};
  for (int k = 0; k < 3; ++k) o.require(mean_p[k] > 0.01, fmt("8 events: %s p = %.4f", names[k], mean_p[k]));

  // Light subsampling: event rate after a 4,096-event draw, thresholded.
  slow.seed = fast.seed = 77;
  const std::size_t train = 100, test = 100;
  auto rate = [](const EventStream& clip, std::uint64_t epoch) {
    const auto d = subsample(clip, {4096, 9, epoch});
    return double(d.size()) / (double(d.duration()) * 1e-6);
  };
  std::vector<std::pair<double, int>> fit;
  for (const auto& c : fan_class(slow, synth::kSlowLabel, 0, train)) fit.push_back({rate(c, 0), 0});
  for (const auto& c : fan_class(fast, synth::kFastLabel, 0, train)) fit.push_back({rate(c, 0), 1});
  std::sort(fit.begin(), fit.end());
  // Best midpoint threshold on the training clips.
  double threshold = fit.front().first - 1;
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < fit.size(); ++i) {
    const double t = 0.5 * (fit[i].first + fit[i + 1].first);
    std::size_t correct = 0;
    for (const auto& [r, label] : fit) correct += (r > t) == (label == 1);
    if (correct > best) {
      best = correct;
      threshold = t;
    }
  }
  std::size_t correct = 0;
  for (const auto& c : fan_class(slow, synth::kSlowLabel, train, test)) correct += rate(c, 1) <= threshold;
  for (const auto& c : fan_class(fast, synth::kFastLabel, train, test)) correct += rate(c, 1) > threshold;
  const double acc = double(correct) / double(2 * test);
  o.require(acc >= 0.95, fmt("4096 events: threshold accuracy %.3f", acc));
  if (o.pass)
    o.detail = fmt("8 events: p = %.3f / %.3f / %.3f; 4096 events: accuracy %.3f", mean_p[0], mean_p[1],
                   mean_p[2], acc);
  return o;
}

}  // namespace

int main() {
  std::printf("eventflux acceptance suite\n");
  const auto fixtures = frame_fixtures();
  criterion(1, "frame accumulation equals brute-force evaluation within 1e-9", 60,
            [&] { return frame_oracle(fixtures); });
  criterion(2, "default representation has 18 channels", 0, [&] { return channel_count(fixtures); });
  criterion(3, "pairwise cosine on 100 vectors yields 4950 values", 0, pair_count);
  criterion(4, "sensitivity metric matches the clustering oracle", 5, sensitivity_oracle);
  criterion(5, "sensitivity metric bounds and invariances", 0, sensitivity_invariances);
  criterion(6, "subsampling uniformity and determinism", 0, subsampling_statistics);
  criterion(7, "format round trips", 0, format_round_trips);
  criterion(8, "binomial tail matches exact rational sums to 12 digits", 0, binomial_oracle);
  criterion(9, "synthetic fan: subsampled classes indistinguishable, light subsampling separable", 120,
            fan_sanity);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
