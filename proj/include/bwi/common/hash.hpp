#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace bwi {

/// 64-bit FNV-1a; stable across platforms, used for manifest fingerprints.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (const char c : bytes) {
      state_ ^= static_cast<unsigned char>(c);
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const { return fmt::format("{:016x}", state_); }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace bwi
