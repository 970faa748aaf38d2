#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bqmdp {

// Failure categories; the CLI maps these to process exit codes.
enum class ErrorCategory : int {
  BudgetExceeded = 2,
  DeadEnd = 3,
  IllegalAction = 4,
  SizeLimit = 5,
  TrajectoryTooShort = 6,
  InfeasibleSolution = 7,
  AllMasked = 8,
  InvalidConfig = 9,
  UnsupportedFormat = 10,
  MalformedInput = 11,
  MissingReference = 12,
  Io = 13,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }
  int exit_code() const { return static_cast<int>(category_); }

private:
  ErrorCategory category_;
};

// Deterministic 64-bit RNG (splitmix64 seeding + xoshiro256**).
// std::uniform_*_distribution is implementation-defined, so all sampling
// goes through the helpers below to keep outputs identical across builds.
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]: never returns 0, may return exactly 1.
  double next_open_closed() { return 1.0 - next_double(); }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Derive an independent stream, e.g. one per instance or per batch item.
  Rng fork(std::uint64_t tag) { return Rng(next_u64() ^ (tag * 0x9e3779b97f4a7c15ULL)); }

private:
  std::uint64_t state_[4];
};

// Stateless seed derivation for parallel work items.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t z = base ^ (tag + 0x9e3779b97f4a7c15ULL + (base << 6) + (base >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace bqmdp
