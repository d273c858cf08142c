#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace proad {

// Flat `key = value` text used for configs, snapshots and checkpoint
// headers. Lines starting with '#' are comments. Keys are kept sorted so
// formatting is canonical.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, const char* value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value) { entries_[key] = std::to_string(value); }
  void set(const std::string& key, int value) { entries_[key] = std::to_string(value); }
  void set(const std::string& key, std::uint64_t value) { entries_[key] = std::to_string(value); }
  void set(const std::string& key, bool value) { entries_[key] = value ? "true" : "false"; }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string format() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace proad
