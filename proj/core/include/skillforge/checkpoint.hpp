#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skillforge/nn.hpp"

namespace skillforge {

using Metadata = std::map<std::string, std::string>;

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// On-disk layout (all integers little-endian):
///
///   "SKFC"  u32 version
///   u32 layer_count, then per layer: u32 inputs, u32 outputs, u8 activation
///   u64 parameter_count, then float64 parameters (per layer: weights, bias)
///   u32 metadata_count, then per entry: u32 len, key bytes, u32 len, value bytes
///   u32 head_count, then per head: u32 len, name bytes, u32 inputs, u32 outputs, u8 activation
///   if head_count > 0: u64 head_parameter_count, float64 head parameters
///
/// A plain network has head_count == 0. A distilled multi-skill network
/// stores its trunk in the layer table and its output layers in the head table.
struct Checkpoint {
  std::vector<DenseLayer> layers;
  std::vector<std::string> head_names;
  std::vector<DenseLayer> heads;
  Metadata metadata;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws CheckpointError on bad magic, unknown version, truncation, trailing
/// bytes or inconsistent shapes.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

void save_checkpoint(const QNetwork& net, const std::filesystem::path& path, const Metadata& metadata = {});
/// Loads a single network; rejects files that carry a head table.
QNetwork load_checkpoint(const std::filesystem::path& path, Metadata* metadata = nullptr);

void save_multi_head(const MultiHeadNetwork& net, const std::vector<std::string>& head_names,
                     const std::filesystem::path& path, const Metadata& metadata = {});
MultiHeadNetwork load_multi_head(const std::filesystem::path& path, std::vector<std::string>* head_names = nullptr,
                                 Metadata* metadata = nullptr);

}  // namespace skillforge
