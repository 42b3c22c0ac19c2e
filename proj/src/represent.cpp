#include "eventflux/represent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eventflux/error.hpp"

namespace eventflux {

namespace {

constexpr std::array<std::pair<std::uint32_t, std::uint32_t>, 3> kMlpShapes{
    {{1, MlpWeights::kHidden}, {MlpWeights::kHidden, MlpWeights::kHidden}, {MlpWeights::kHidden, 1}}};

double leaky_relu(double v) noexcept { return v >= 0.0 ? v : MlpWeights::kNegativeSlope * v; }

double mlp_forward(const MlpWeights& net, double u) {
  std::array<double, MlpWeights::kHidden> h1{};
  std::array<double, MlpWeights::kHidden> h2{};
  const auto& l1 = net.layers[0];
  for (std::size_t j = 0; j < h1.size(); ++j) h1[j] = leaky_relu(u * l1.weights[j] + l1.bias[j]);
  const auto& l2 = net.layers[1];
  for (std::size_t j = 0; j < h2.size(); ++j) {
    double acc = l2.bias[j];
    for (std::size_t i = 0; i < h1.size(); ++i) acc += h1[i] * l2.weights[i * l2.cols + j];
    h2[j] = leaky_relu(acc);
  }
  const auto& l3 = net.layers[2];
  double out = l3.bias[0];
  for (std::size_t i = 0; i < h2.size(); ++i) out += h2[i] * l3.weights[i];
  return out;
}

void check_mlp(const MlpWeights& net) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto [rows, cols] = kMlpShapes[l];
    const std::string name = "layer " + std::to_string(l + 1);
    if (layer.rows != rows || layer.cols != cols)
      throw Error(ErrorKind::Config, name + ": expected " + std::to_string(rows) + "x" +
                                         std::to_string(cols) + " weights, found " +
                                         std::to_string(layer.rows) + "x" + std::to_string(layer.cols));
    if (layer.weights.size() != std::size_t{rows} * cols || layer.bias.size() != cols)
      throw Error(ErrorKind::Config, name + ": weight or bias array has the wrong length");
    auto finite = [](float v) { return std::isfinite(v); };
    if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite))
      throw Error(ErrorKind::Config, name + ": non-finite weight");
  }
}

void check_stream(const EventStream& stream) {
  const auto problems = validate(stream);
  if (!problems.empty()) throw Error(ErrorKind::Argument, "invalid stream: " + problems.front());
}

void check_window(const EventStream& stream) {
  if (!stream.empty() && stream.t_end <= stream.t_start)
    throw Error(ErrorKind::Degenerate, "degenerate time window [" + std::to_string(stream.t_start) +
                                           ", " + std::to_string(stream.t_end) + "] with " +
                                           std::to_string(stream.size()) + " events");
}

}  // namespace

const char* to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::Delta: return "delta";
    case KernelKind::Triangular: return "triangular";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Mlp: return "mlp";
  }
  return "unknown";
}

MlpWeights MlpWeights::zeros() {
  MlpWeights net;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    layer.rows = kMlpShapes[l].first;
    layer.cols = kMlpShapes[l].second;
    layer.weights.assign(std::size_t{layer.rows} * layer.cols, 0.0f);
    layer.bias.assign(layer.cols, 0.0f);
  }
  return net;
}

KernelSpec KernelSpec::gaussian(double sigma) { return {KernelKind::Gaussian, sigma, nullptr}; }

KernelSpec KernelSpec::mlp_kernel(MlpWeights weights) {
  check_mlp(weights);
  return {KernelKind::Mlp, 0.0, std::make_shared<const MlpWeights>(std::move(weights))};
}

void check_kernel(const KernelSpec& kernel) {
  switch (kernel.kind) {
    case KernelKind::Gaussian:
      if (!(kernel.sigma > 0.0) || !std::isfinite(kernel.sigma))
        throw Error(ErrorKind::Config, "gaussian kernel requires sigma > 0");
      break;
    case KernelKind::Mlp:
      if (!kernel.mlp) throw Error(ErrorKind::Config, "mlp kernel has no weights loaded");
      check_mlp(*kernel.mlp);
      break;
    default: break;
  }
}

double eval_kernel(const KernelSpec& kernel, double u, int channels_per_polarity) {
  const int bins_minus_one = channels_per_polarity - 1;
  switch (kernel.kind) {
    case KernelKind::Delta:
      if (bins_minus_one < 1) return 1.0;
      u *= bins_minus_one;
      return (u >= -0.5 && u < 0.5) ? 1.0 : 0.0;
    case KernelKind::Triangular:
      if (bins_minus_one < 1) return 1.0;
      return std::max(0.0, 1.0 - std::abs(u) * bins_minus_one);
    case KernelKind::Gaussian:
      return std::exp(-(u * u) / (2.0 * kernel.sigma * kernel.sigma));
    case KernelKind::Mlp:
      if (!kernel.mlp) throw Error(ErrorKind::Config, "mlp kernel has no weights loaded");
      return mlp_forward(*kernel.mlp, u);
  }
  return 0.0;
}

double bin_center(int c, int channels_per_polarity) noexcept {
  return channels_per_polarity > 1 ? static_cast<double>(c) / (channels_per_polarity - 1) : 0.0;
}

FrameTensorF64 est_frames_f64(const EventStream& stream, const ReprConfig& cfg) {
  if (cfg.channels_per_polarity < 1)
    throw Error(ErrorKind::Config, "channels_per_polarity must be at least 1");
  check_kernel(cfg.kernel);
  check_stream(stream);
  if (cfg.normalize_time) check_window(stream);

  const int channels = cfg.channels_per_polarity;
  FrameTensorF64 out(static_cast<std::uint32_t>(channels), stream.height, stream.width);
  out.video_id = stream.video_id;
  out.event_count = stream.size();
  if (stream.empty()) return out;

  std::vector<double> centers(channels);
  for (int c = 0; c < channels; ++c) centers[c] = bin_center(c, channels);

  const double window = static_cast<double>(stream.t_end - stream.t_start);
  const bool compact = channels > 1 && (cfg.kernel.kind == KernelKind::Delta ||
                                        cfg.kernel.kind == KernelKind::Triangular);
  const double scale = channels - 1;

  for (const Event& e : stream.events) {
    const double tau = cfg.normalize_time ? static_cast<double>(e.t - stream.t_start) / window
                                          : static_cast<double>(e.t);
    int lo = 0, hi = channels - 1;
    if (compact) {
      // Both compact kernels vanish beyond one bin spacing from the center.
      const double pos = tau * scale;
      if (pos < -2.0 || pos > scale + 2.0) continue;
      const int base = static_cast<int>(std::floor(pos));
      lo = std::max(0, base - 1);
      hi = std::min(channels - 1, base + 2);
    }
    const std::size_t pol = polarity_group(e.p);
    if (cfg.kernel.kind == KernelKind::Delta && channels > 1) {
      // Nearest bin in scaled time, so the half-open intervals partition
      // the axis exactly instead of up to rounding of tau - center.
      const double pos = tau * scale;
      double bin = std::floor(pos);
      if (pos - bin >= 0.5) bin += 1.0;
      if (bin >= 0.0 && bin <= scale) out.at(pol, static_cast<std::size_t>(bin), e.y, e.x) += tau;
      continue;
    }
    for (int c = lo; c <= hi; ++c) {
      const double w = eval_kernel(cfg.kernel, tau - centers[c], channels);
      if (w != 0.0) out.at(pol, c, e.y, e.x) += tau * w;
    }
  }
  return out;
}

FrameTensor est_frames(const EventStream& stream, const ReprConfig& cfg) {
  const FrameTensorF64 wide = est_frames_f64(stream, cfg);
  FrameTensor out(wide.channels, wide.height, wide.width);
  out.video_id = wide.video_id;
  out.event_count = wide.event_count;
  std::transform(wide.data.begin(), wide.data.end(), out.data.begin(),
                 [](double v) { return static_cast<float>(v); });
  return out;
}

FrameTensor count_histogram(const EventStream& stream) {
  check_stream(stream);
  FrameTensor out(1, stream.height, stream.width);
  out.video_id = stream.video_id;
  out.event_count = stream.size();
  std::vector<std::uint64_t> counts(out.data.size(), 0);
  for (const Event& e : stream.events) ++counts[out.index(polarity_group(e.p), 0, e.y, e.x)];
  std::transform(counts.begin(), counts.end(), out.data.begin(),
                 [](std::uint64_t n) { return static_cast<float>(n); });
  return out;
}

FrameTensor time_surface(const EventStream& stream) {
  check_stream(stream);
  check_window(stream);
  FrameTensor out(1, stream.height, stream.width);
  out.video_id = stream.video_id;
  out.event_count = stream.size();
  const double window = static_cast<double>(stream.t_end - stream.t_start);
  // Events are chronological, so the last write per cell is the most recent.
  for (const Event& e : stream.events)
    out.at(polarity_group(e.p), 0, e.y, e.x) =
        static_cast<float>(static_cast<double>(e.t - stream.t_start) / window);
  return out;
}

}  // namespace eventflux
