#include "sfwm/manifest.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sfwm/error.hpp"

namespace sfwm::io {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void atomic_write(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::int64_t reproducible_timestamp() {
  const char* s = std::getenv("SOURCE_DATE_EPOCH");
  if (!s) return 0;
  std::int64_t v = 0;
  const char* end = s + std::char_traits<char>::length(s);
  const auto [p, ec] = std::from_chars(s, end, v);
  return (ec == std::errc() && p == end) ? v : 0;
}

void RunManifest::add(const std::string& dir, const std::string& name, std::string_view content) {
  atomic_write((std::filesystem::path(dir) / name).string(), content);
  files.push_back({name, content.size(), hex64(fnv1a64(content))});
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["timestamp"] = timestamp;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"checksum", f.checksum}});
  return j.dump(2) + "\n";
}

}  // namespace sfwm::io
