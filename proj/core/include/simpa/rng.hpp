#pragma once

#include <cstdint>

namespace simpa {

// Counter-based stream RNG (Philox4x32-10). A stream is addressed by
// (seed, stream id); equal addresses replay the identical sequence and
// distinct addresses are statistically independent, which is what makes
// whole runs reproducible and order-independent across tasks.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(seed), stream_(stream_id) {}

  // Convenience: stream id derived from (iteration, task, purpose, step).
  static RngStream keyed(std::uint64_t seed, std::uint64_t iteration, std::uint64_t task,
                         std::uint64_t purpose, std::uint64_t step = 0);

  std::uint64_t next_u64();
  // Uniform strictly inside (0, 1).
  double uniform();
  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int buf_pos_ = 4;            // in u32 units
  bool have_spare_ = false;    // cached second Box-Muller variate
  double spare_ = 0.0;
};

// Purpose tags for stream addressing. Values are stable; they are part of
// the reproducibility contract of checkpointed runs.
namespace stream_purpose {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kTaskSampling = 2;
inline constexpr std::uint64_t kThetaSample = 3;
inline constexpr std::uint64_t kDiscNoise = 4;
inline constexpr std::uint64_t kVfeNoise = 5;
inline constexpr std::uint64_t kQueryNoise = 6;
inline constexpr std::uint64_t kKlNoise = 7;
inline constexpr std::uint64_t kDiscLabels = 8;
inline constexpr std::uint64_t kEval = 9;
inline constexpr std::uint64_t kOracle = 10;
}  // namespace stream_purpose

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

}  // namespace simpa
