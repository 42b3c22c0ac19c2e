#include <cmath>
#include <cstdio>

#include "bytes.hpp"
#include "eventflux/error.hpp"
#include "eventflux/formats.hpp"
#include "eventflux/represent.hpp"

namespace eventflux {

namespace {

constexpr std::string_view kKernelMagic = "ESTK";
constexpr std::string_view kTensorMagic = "EVT1";
constexpr std::uint32_t kMlpLayerCount = 3;

}  // namespace

KernelSpec load_mlp_kernel(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "kernel file");
  if (!in.expect_magic(kKernelMagic))
    throw Error(ErrorKind::Format, "kernel file: bad magic (expected \"ESTK\")");
  in.skip(kKernelMagic.size(), "magic");
  const std::uint32_t layer_count = in.u32("layer count");
  if (layer_count != kMlpLayerCount)
    throw Error(ErrorKind::Config, "kernel file: expected 3 layers, found " + std::to_string(layer_count));

  const MlpWeights expected = MlpWeights::zeros();
  MlpWeights net;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    const std::string name = "layer " + std::to_string(l + 1);
    layer.rows = in.u32("rows of " + name);
    layer.cols = in.u32("cols of " + name);
    if (layer.rows != expected.layers[l].rows || layer.cols != expected.layers[l].cols)
      throw Error(ErrorKind::Config, "kernel file: " + name + ": expected " +
                                         std::to_string(expected.layers[l].rows) + "x" +
                                         std::to_string(expected.layers[l].cols) + ", found " +
                                         std::to_string(layer.rows) + "x" + std::to_string(layer.cols));
    layer.weights.resize(std::size_t{layer.rows} * layer.cols);
    for (auto& w : layer.weights) w = in.f32("weights of " + name);
    layer.bias.resize(layer.cols);
    for (auto& b : layer.bias) b = in.f32("biases of " + name);
  }
  if (in.remaining() != 0)
    throw Error(ErrorKind::Format, "kernel file: " + std::to_string(in.remaining()) + " trailing bytes");
  try {
    return KernelSpec::mlp_kernel(std::move(net));
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("kernel file: ") + e.what());
  }
}

KernelSpec load_mlp_kernel(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return load_mlp_kernel(std::span<const std::uint8_t>(bytes));
}

std::vector<std::uint8_t> write_mlp_kernel(const MlpWeights& weights) {
  detail::ByteWriter out;
  out.put_magic(kKernelMagic);
  out.put_u32(static_cast<std::uint32_t>(weights.layers.size()));
  for (const auto& layer : weights.layers) {
    out.put_u32(layer.rows);
    out.put_u32(layer.cols);
    for (float w : layer.weights) out.put_f32(w);
    for (float b : layer.bias) out.put_f32(b);
  }
  return std::move(out).take();
}

std::filesystem::path tensor_header_path(const std::filesystem::path& path) {
  auto hdr = path;
  hdr += ".hdr";
  return hdr;
}

void write_tensor(const std::filesystem::path& path, const FrameTensor& tensor) {
  detail::ByteWriter payload;
  payload.reserve(tensor.data.size() * 4);
  for (float v : tensor.data) payload.put_f32(v);
  write_file(path, std::move(payload).take());

  detail::ByteWriter header;
  header.put_magic(kTensorMagic);
  header.put_u32(4);
  for (std::uint32_t d : tensor.shape()) header.put_u32(d);
  header.put_u64(tensor.event_count);
  header.put_string(tensor.video_id);
  write_file(tensor_header_path(path), std::move(header).take());
}

FrameTensor read_tensor(const std::filesystem::path& path) {
  const auto header_bytes = read_file(tensor_header_path(path));
  detail::ByteReader hdr(header_bytes, "tensor header");
  if (!hdr.expect_magic(kTensorMagic))
    throw Error(ErrorKind::Format, "tensor header: bad magic (expected \"EVT1\")");
  hdr.skip(kTensorMagic.size(), "magic");
  if (const auto rank = hdr.u32("rank"); rank != 4)
    throw Error(ErrorKind::Format, "tensor header: expected rank 4, found " + std::to_string(rank));
  std::array<std::uint32_t, 4> dims{};
  for (auto& d : dims) d = hdr.u32("dims");
  if (dims[0] != 2) throw Error(ErrorKind::Format, "tensor header: leading dimension must be 2");

  FrameTensor t(dims[1], dims[2], dims[3]);
  t.event_count = hdr.u64("event count");
  t.video_id = hdr.string("video_id");

  const auto payload = read_file(path);
  if (payload.size() != t.data.size() * 4)
    throw Error(ErrorKind::Format, "tensor payload: expected " + std::to_string(t.data.size() * 4) +
                                       " bytes, found " + std::to_string(payload.size()));
  detail::ByteReader in(payload, "tensor payload");
  for (auto& v : t.data) v = in.f32("value");
  return t;
}

std::string tensor_nonzero_csv(const FrameTensor& tensor) {
  std::string out = "p,c,y,x,value\n";
  char value[32];
  for (std::uint32_t p = 0; p < tensor.polarities; ++p)
    for (std::uint32_t c = 0; c < tensor.channels; ++c)
      for (std::uint32_t y = 0; y < tensor.height; ++y)
        for (std::uint32_t x = 0; x < tensor.width; ++x) {
          const float v = tensor.at(p, c, y, x);
          if (v == 0.0f) continue;
          std::snprintf(value, sizeof value, "%.9g", static_cast<double>(v));
          out += std::to_string(p) + ',' + std::to_string(c) + ',' + std::to_string(y) + ',' +
                 std::to_string(x) + ',' + value + '\n';
        }
  return out;
}

}  // namespace eventflux
