#include "proad/kv.hpp"

#include <cstdio>
#include <sstream>

#include "proad/error.hpp"

namespace proad {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not of the form key = value");
    }
    kv.entries_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

void KeyValues::set(const std::string& key, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  entries_[key] = buf;
}

const std::string& KeyValues::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
}

std::int64_t KeyValues::get_int(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    long long d = std::stoll(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
}

std::uint64_t KeyValues::get_uint(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    unsigned long long d = std::stoull(v, &used);
    if (used == v.size() && v.find('-') == std::string::npos) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects an unsigned integer, got '" + v + "'");
}

bool KeyValues::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::string KeyValues::format() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace proad
