#include "tcd/io/keyvalue.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tcd/errors.hpp"

namespace tcd {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void KeyValueDoc::set(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

void KeyValueDoc::set_double(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  set(key, buf);
}

void KeyValueDoc::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void KeyValueDoc::set_u64(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}

std::optional<std::string> KeyValueDoc::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

std::string KeyValueDoc::get(const std::string& key) const {
  const auto v = find(key);
  if (!v) throw UsageError("missing required key: " + key);
  return *v;
}

double KeyValueDoc::get_double(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(v, &used);
  } catch (const std::exception&) {
    throw UsageError("key '" + key + "' is not a number: " + v);
  }
  if (used != v.size()) throw UsageError("key '" + key + "' is not a number: " + v);
  return parsed;
}

long long KeyValueDoc::get_int(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw UsageError("key '" + key + "' is not an integer: " + v);
  }
  if (used != v.size()) throw UsageError("key '" + key + "' is not an integer: " + v);
  return parsed;
}

std::uint64_t KeyValueDoc::get_u64(const std::string& key) const {
  const std::string v = get(key);
  std::size_t used = 0;
  unsigned long long parsed = 0;
  try {
    parsed = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw UsageError("key '" + key + "' is not an unsigned integer: " + v);
  }
  if (used != v.size()) throw UsageError("key '" + key + "' is not an unsigned integer: " + v);
  return parsed;
}

std::string KeyValueDoc::get_or(const std::string& key, const std::string& fallback) const {
  const auto v = find(key);
  return v ? *v : fallback;
}

double KeyValueDoc::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValueDoc::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueDoc::get_u64_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

std::vector<std::string> KeyValueDoc::list(const std::string& prefix) const {
  std::vector<std::string> out;
  for (std::size_t i = 0;; ++i) {
    const auto v = find(prefix + "." + std::to_string(i));
    if (!v) break;
    out.push_back(*v);
  }
  return out;
}

KeyValueDoc parse_keyvalue(const std::string& text) {
  KeyValueDoc doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw UsageError("line " + std::to_string(lineno) + ": empty key");
    doc.entries.emplace_back(key, value);
  }
  return doc;
}

std::string serialize_keyvalue(const KeyValueDoc& doc) {
  std::string out;
  for (const auto& [k, v] : doc.entries) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

KeyValueDoc load_keyvalue(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_keyvalue(text);
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void save_keyvalue(const std::filesystem::path& path, const KeyValueDoc& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << serialize_keyvalue(doc);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace tcd
