// Flat key/value text documents: one `key = value` per line, `#` comments.
// Used for configs, synthesis specs, run manifests and cache indexes.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tcd {

struct KeyValueDoc {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);  // round-trip exact
  void set_int(const std::string& key, long long value);
  void set_u64(const std::string& key, std::uint64_t value);

  std::optional<std::string> find(const std::string& key) const;
  bool has(const std::string& key) const { return find(key).has_value(); }

  // Typed getters throw UsageError on malformed values; the *_or variants
  // return the fallback when the key is absent.
  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;

  // All values whose key is `prefix.0`, `prefix.1`, ... in index order.
  std::vector<std::string> list(const std::string& prefix) const;
};

KeyValueDoc parse_keyvalue(const std::string& text);
std::string serialize_keyvalue(const KeyValueDoc& doc);

KeyValueDoc load_keyvalue(const std::filesystem::path& path);
void save_keyvalue(const std::filesystem::path& path, const KeyValueDoc& doc);

}  // namespace tcd
