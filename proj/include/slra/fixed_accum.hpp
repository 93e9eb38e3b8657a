#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace slra {

// Order-invariant accumulator for sketch state. Terms are rounded onto a
// 2^-48 grid and summed in 128-bit integers, so any permutation, sharding or
// merge of an update stream yields bit-identical state. Grid resolution keeps
// per-term rounding below 2e-15; single terms must stay under 2^15 in
// magnitude, which every desk-scale stream satisfies.
class FixedAccum {
 public:
  static constexpr double kScale = 0x1.0p48;
  static constexpr double kInvScale = 0x1.0p-48;
  static constexpr double kMaxTerm = 32000.0;

  void add(double term) {
    if (!(std::fabs(term) <= kMaxTerm))
      throw std::invalid_argument("sketch update magnitude exceeds accumulator range");
    v_ += static_cast<__int128>(std::llrint(term * kScale));
  }

  double value() const { return static_cast<double>(v_) * kInvScale; }
  __int128 raw() const { return v_; }
  void merge(const FixedAccum& o) { v_ += o.v_; }
  bool operator==(const FixedAccum& o) const { return v_ == o.v_; }

 private:
  __int128 v_ = 0;
};

}  // namespace slra
