#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eventflux/analysis.hpp"

namespace eventflux::analysis {

// Run records: CSV with header
//   run_id,split,seed,accuracy,lr,batch_size,weight_decay[,extras...]
// or JSONL objects with the same keys. Accuracy must lie in [0, 1].
std::vector<RunRecord> read_runs_csv(std::string_view text);
std::vector<RunRecord> read_runs_jsonl(std::string_view text);
std::vector<RunRecord> load_runs(const std::filesystem::path& path);
std::string write_runs_csv(const std::vector<RunRecord>& records);

// Gradient sets: "GRD1" u32 id_len, id bytes, u32 M, u64 dimension, then
// M * dimension f32 row-major, little-endian. CSV fallback: one vector per line.
GradientSet read_gradients_bin(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_gradients_bin(const GradientSet& grads);
GradientSet read_gradients_csv(std::string_view text, std::string layer_id = {});
GradientSet load_gradients(const std::filesystem::path& path);

std::string report_json(const SensitivityReport& report);
std::string report_per_k_csv(const SensitivityReport& report);

std::string histogram_csv(const std::vector<HistogramBin>& bins);
/// Static bar chart, no external styling.
std::string histogram_svg(const std::vector<HistogramBin>& bins, std::string_view title);

}  // namespace eventflux::analysis
