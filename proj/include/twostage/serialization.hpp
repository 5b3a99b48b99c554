#pragma once

#include "twostage/models.hpp"
#include "twostage/two_stage.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace twostage {

/// Byte layout is documented in docs/FORMATS.md.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<unsigned char> encode_model(const Model& model);
Model decode_model(std::span<const unsigned char> bytes);

std::vector<unsigned char> encode_stage_pair(const StagePair& pair);
/// Throws LoadError on bad magic, unsupported version, checksum mismatch,
/// truncation, trailing bytes, or inconsistent shapes.
StagePair decode_stage_pair(std::span<const unsigned char> bytes);

void save_stage_pair(const std::filesystem::path& path, const StagePair& pair);
StagePair load_stage_pair(const std::filesystem::path& path);

} // namespace twostage
