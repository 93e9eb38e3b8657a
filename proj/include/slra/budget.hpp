#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace slra {

// Cap on enumeration work (net sizes, support scans). Overridable through the
// SLRA_BUDGET environment variable.
inline std::uint64_t enumeration_budget() {
  static const std::uint64_t cached = [] {
    if (const char* s = std::getenv("SLRA_BUDGET")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(s, &end, 10);
      if (end && *end == '\0' && v > 0) return std::uint64_t(v);
    }
    return std::uint64_t(10'000'000);
  }();
  return cached;
}

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

inline void check_budget(std::uint64_t work, const char* what) {
  if (work > enumeration_budget())
    throw BudgetExceeded(std::string(what) + ": enumeration count " + std::to_string(work) +
                         " exceeds budget " + std::to_string(enumeration_budget()));
}

}  // namespace slra
