#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rprl::harness {

// Flat "section.key = value" settings. '#' starts a comment; lists are
// comma-separated. Every accessor throws ConfigError naming the key on a
// malformed value.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  void erase(const std::string& key) { values_.erase(key); }
  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback = {}) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key, const std::vector<std::uint64_t>& fallback) const;

  // Rejects keys outside `known`, listing all of them.
  void check_known(const std::set<std::string>& known) const;

  // Sorted "key = value" lines; parse(serialize()) round-trips.
  std::string serialize() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(std::string_view text);
std::uint64_t parse_u64(std::string_view text, const std::string& what);

// Seeds from RS_SEED (comma-separated) when set, `configured` otherwise.
std::vector<std::uint64_t> effective_seeds(const std::vector<std::uint64_t>& configured);

}  // namespace rprl::harness
