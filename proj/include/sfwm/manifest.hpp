#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sfwm::io {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Writes to a temporary sibling, then renames over the target.
void atomic_write(const std::string& path, std::string_view content);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string checksum;  // FNV-1a 64, hex
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string command;
  std::int64_t timestamp = 0;  // SOURCE_DATE_EPOCH when set, else 0
  std::vector<ManifestEntry> files;

  /// Writes the file atomically and records it.
  void add(const std::string& dir, const std::string& name, std::string_view content);
  std::string to_json() const;
};

/// Seconds since the epoch from SOURCE_DATE_EPOCH, 0 when unset or malformed.
std::int64_t reproducible_timestamp();

}  // namespace sfwm::io
