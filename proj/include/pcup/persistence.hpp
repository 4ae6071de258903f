#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcup/network.hpp"
#include "pcup/training.hpp"

namespace pcup {

/// Trained network plus the configuration that produced it.
struct Checkpoint {
  NetworkParams<float> params;
  TrainingConfig config;  // config.shape mirrors params.shape
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, all integers and floats little-endian:
///
///   "PCUP"                     4 bytes
///   version                    u32 (= 1)
///   header_bytes               u32, length of the header block that follows
///   header:
///     input_dim, n_out         u32, u32
///     encoder layer count, widths    u32, u32 * count
///     decoder hidden count, widths   u32, u32 * count
///     batch_size, epochs, af, validate_every   u32 * 4
///     learning_rate, beta1, beta2, epsilon     IEEE-754 binary64 * 4
///     seed                     u64
///   tensors                    IEEE-754 binary32, row-major, in all_tensors() order
///   checksum                   u64 FNV-1a over every preceding byte
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Returns a checkpoint only if the whole file validates; throws otherwise.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size);

struct ReportRow {
  std::string condition;
  int af = 0;
  std::string sampling;  // U, CB or H
  bool normals = false;
  double alpha = 0.0;
  double chamfer_loss = 0.0;
  double accuracy = 0.0;
  double coverage = 0.0;

  bool operator==(const ReportRow&) const = default;
};

inline constexpr const char* kReportHeader =
    "condition,af,sampling,normals,alpha,chamfer_loss,accuracy,coverage";

/// Header plus one LF-terminated line per row; losses in scientific notation,
/// every number in shortest round-trip form.
std::string format_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& text);
void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Training configuration plus data locations and experiment knobs.
struct ExperimentConfig {
  TrainingConfig training;
  std::string data_dir;
  std::string out_dir;
  double rho = 0.03;
  std::vector<std::string> categories;
  int models_per_category = 0;
};

/// Flat JSON object; absent keys keep the values in `defaults`, unknown keys are rejected.
ExperimentConfig parse_config_json(const std::string& text, ExperimentConfig defaults);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults);
std::string config_to_json(const ExperimentConfig& config);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pcup
