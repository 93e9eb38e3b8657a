#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace slra {

// Counts linear-measurement rows consumed per named sketch. Algorithms touch
// the input only through sketches that registered here, which is what makes
// their measurement claims observable in tests and reports.
class MeasurementLedger {
 public:
  void add(const std::string& name, std::uint64_t rows) { counts_[name] += rows; }

  std::uint64_t get(const std::string& name) const {
    auto it = counts_.find(name);
    return it == counts_.end() ? 0 : it->second;
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : counts_) t += v;
    return t;
  }

  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }

  void merge_max(const MeasurementLedger& o) {
    // Sharded ingestion duplicates sketch registration; measurement rows are
    // shared, not additive.
    for (const auto& [k, v] : o.counts_) {
      auto& mine = counts_[k];
      if (v > mine) mine = v;
    }
  }

 private:
  std::map<std::string, std::uint64_t> counts_;
};

}  // namespace slra
