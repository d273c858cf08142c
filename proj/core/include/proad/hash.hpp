#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace proad {

// 64-bit FNV-1a, used for reproducibility fingerprints (not security).
class Fnv1a {
 public:
  void update(const void* bytes, std::size_t size);
  void update(std::string_view text) { update(text.data(), text.size()); }
  void update(std::span<const double> values) { update(values.data(), values.size_bytes()); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t value);

}  // namespace proad
