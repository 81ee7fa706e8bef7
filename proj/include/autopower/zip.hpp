#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Minimal single-entry zip container support over zlib. Handles the stored
// and deflate methods; zip64, encryption and multi-disk archives are rejected.

namespace autopower::zip {

inline constexpr std::string_view kTraceEntryName = "usage_log.csv";

struct Entry {
  std::string name;
  std::vector<std::uint8_t> data;
};

// Every entry in the archive, decompressed and CRC-checked.
std::vector<Entry> read_archive(std::span<const std::uint8_t> archive);

// Deflate-compressed single-entry archive.
std::vector<std::uint8_t> write_single(std::string_view entry_name,
                                       std::span<const std::uint8_t> data);

}  // namespace autopower::zip
