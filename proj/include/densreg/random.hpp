#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace densreg {

/// Philox4x64-10 block function.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter, std::array<std::uint64_t, 2> key);

/// Counter-based stream keyed by (seed, stream); draws are reproducible per stream
/// regardless of how other streams are used.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  /// Index drawn from a cumulative distribution ending at 1.
  std::size_t categorical(const std::vector<double>& cumulative);

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_{};
  std::array<std::uint64_t, 4> buffer_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace densreg
