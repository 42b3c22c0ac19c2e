#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eventflux/event.hpp"

namespace eventflux {

enum class KernelKind { Delta, Triangular, Gaussian, Mlp };

const char* to_string(KernelKind kind) noexcept;

/// Weights of the 1 -> 30 -> 30 -> 1 temporal filter network. Layer l maps
/// a row vector through `weights` (rows x cols, row-major) and adds `bias`
/// (cols). Both hidden layers are followed by LeakyReLU(0.1).
struct MlpWeights {
  struct Layer {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> weights;
    std::vector<float> bias;
  };
  std::array<Layer, 3> layers;

  static constexpr std::uint32_t kHidden = 30;
  static constexpr double kNegativeSlope = 0.1;

  /// All-zero network of the required shape.
  static MlpWeights zeros();
};

struct KernelSpec {
  KernelKind kind = KernelKind::Triangular;
  double sigma = 0.0;  // Gaussian width on the normalized time axis
  std::shared_ptr<const MlpWeights> mlp;

  static KernelSpec delta() { return {KernelKind::Delta, 0.0, nullptr}; }
  static KernelSpec triangular() { return {KernelKind::Triangular, 0.0, nullptr}; }
  static KernelSpec gaussian(double sigma);
  static KernelSpec mlp_kernel(MlpWeights weights);
};

/// Throws Config if the kernel is unusable (sigma <= 0, missing or misshapen weights).
void check_kernel(const KernelSpec& kernel);

/// Evaluates the temporal filter at offset u from a bin center. Bin spacing
/// is 1/(C-1) on the normalized axis (infinite when C = 1).
///   Delta:      1 on [-h/2, h/2), else 0 (tested in units of h)
///   Triangular: max(0, 1 - |u| / h)
///   Gaussian:   exp(-u^2 / (2 sigma^2))
///   Mlp:        network forward pass
double eval_kernel(const KernelSpec& kernel, double u, int channels_per_polarity);

inline constexpr int kDefaultChannelsPerPolarity = 9;

struct ReprConfig {
  int channels_per_polarity = kDefaultChannelsPerPolarity;
  KernelSpec kernel = KernelSpec::triangular();
  bool normalize_time = true;
};

/// Reference time of bin c on the normalized axis: c/(C-1), or 0 when C = 1.
double bin_center(int c, int channels_per_polarity) noexcept;

/// Dense (2, C, H, W) tensor. Index order is (polarity group, channel, y, x);
/// polarity group 0 holds p = -1 events, group 1 holds p = +1.
template <typename T>
struct BasicFrameTensor {
  std::uint32_t polarities = 2;
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<T> data;
  std::string video_id;
  std::size_t event_count = 0;

  BasicFrameTensor() = default;
  BasicFrameTensor(std::uint32_t c, std::uint32_t h, std::uint32_t w)
      : channels(c), height(h), width(w), data(std::size_t{2} * c * h * w, T{0}) {}

  std::size_t index(std::size_t pol, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return ((pol * channels + c) * height + y) * width + x;
  }
  T& at(std::size_t pol, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data[index(pol, c, y, x)];
  }
  const T& at(std::size_t pol, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data[index(pol, c, y, x)];
  }
  std::array<std::uint32_t, 4> shape() const noexcept { return {polarities, channels, height, width}; }

  std::size_t nonzero_count() const noexcept {
    std::size_t n = 0;
    for (T v : data) n += (v != T{0});
    return n;
  }
};

using FrameTensor = BasicFrameTensor<float>;
using FrameTensorF64 = BasicFrameTensor<double>;

inline std::size_t polarity_group(std::int8_t p) noexcept { return p > 0 ? 1 : 0; }

/// Kernel-weighted, timestamp-weighted accumulation of events into C
/// temporal bins per polarity:
///   V(p, c, y, x) = sum_i tau_i * f(tau_i - t_c)   over events at (x, y) with polarity p
/// tau_i is the timestamp normalized to the stream window, or the raw
/// microsecond value when normalize_time is off. Accumulates in double.
FrameTensorF64 est_frames_f64(const EventStream& stream, const ReprConfig& cfg);

/// est_frames_f64 narrowed to 32-bit floats.
FrameTensor est_frames(const EventStream& stream, const ReprConfig& cfg);

/// Per-pixel event counts, shape (2, 1, H, W).
FrameTensor count_histogram(const EventStream& stream);

/// Normalized timestamp of the most recent event per pixel and polarity,
/// 0 where no event occurred. Shape (2, 1, H, W).
FrameTensor time_surface(const EventStream& stream);

// "ESTK" kernel file: magic[4], u32 layer_count (= 3), then per layer
// u32 rows, u32 cols, rows*cols f32 weights (row-major), cols f32 biases.
// Little-endian.
KernelSpec load_mlp_kernel(std::span<const std::uint8_t> bytes);
KernelSpec load_mlp_kernel(const std::filesystem::path& path);
std::vector<std::uint8_t> write_mlp_kernel(const MlpWeights& weights);

// Tensor export. The payload file is a flat little-endian f32 array in
// (polarity, c, y, x) order; the sidecar "<path>.hdr" holds
//   "EVT1" u32 rank (= 4) u32 dims[4] u64 event_count u32 id_len, id bytes
void write_tensor(const std::filesystem::path& path, const FrameTensor& tensor);
FrameTensor read_tensor(const std::filesystem::path& path);
std::filesystem::path tensor_header_path(const std::filesystem::path& path);

/// Nonzero cells as "p,c,y,x,value" rows with a header line.
std::string tensor_nonzero_csv(const FrameTensor& tensor);

}  // namespace eventflux
