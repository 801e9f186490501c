#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conflate/encoder_params.hpp"

namespace conflate {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_validation_recall1 = 0.0;
};

// Self-describing model container:
//   "CONFLATE" | u32 version | u64 metadata length | metadata JSON |
//   u32 tensor count | per tensor: u32 name length, name, u64 rows, u64 cols,
//   rows*cols little-endian float32 | u64 FNV-1a checksum of all preceding bytes
struct ModelArtifact {
  static constexpr std::uint32_t kFormatVersion = 1;

  EncoderParams<float> params;
  std::string vocabulary;          // symbol table in index order
  nlohmann::json hyperparameters;  // training configuration
  nlohmann::json run_config;       // fully resolved CLI configuration
  TrainingMetadata training;
};

std::vector<std::uint8_t> serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size);

}  // namespace conflate
