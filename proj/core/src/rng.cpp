#include "simpa/rng.hpp"

#include <cmath>

namespace simpa {
namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi, std::uint32_t* lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *hi = static_cast<std::uint32_t>(p >> 32);
  *lo = static_cast<std::uint32_t>(p);
}

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

void philox4x32_10(std::uint32_t ctr[4], std::uint32_t key[2]) {
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], &hi0, &lo0);
    mulhilo(kPhiloxM1, ctr[2], &hi1, &lo1);
    std::uint32_t c0 = hi1 ^ ctr[1] ^ k0;
    std::uint32_t c1 = lo1;
    std::uint32_t c2 = hi0 ^ ctr[3] ^ k1;
    std::uint32_t c3 = lo0;
    ctr[0] = c0;
    ctr[1] = c1;
    ctr[2] = c2;
    ctr[3] = c3;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
}

}  // namespace

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

RngStream RngStream::keyed(std::uint64_t seed, std::uint64_t iteration, std::uint64_t task,
                           std::uint64_t purpose, std::uint64_t step) {
  std::uint64_t sid = splitmix64(iteration);
  sid = hash_combine(sid, task);
  sid = hash_combine(sid, purpose);
  sid = hash_combine(sid, step);
  return RngStream(seed, sid);
}

void RngStream::refill() {
  std::uint32_t ctr[4] = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32),
  };
  std::uint32_t key[2] = {
      static_cast<std::uint32_t>(key_),
      static_cast<std::uint32_t>(key_ >> 32),
  };
  philox4x32_10(ctr, key);
  buf_[0] = ctr[0];
  buf_[1] = ctr[1];
  buf_[2] = ctr[2];
  buf_[3] = ctr[3];
  buf_pos_ = 0;
  ++counter_;
}

std::uint64_t RngStream::next_u64() {
  if (buf_pos_ > 2) refill();
  std::uint64_t lo = buf_[buf_pos_];
  std::uint64_t hi = buf_[buf_pos_ + 1];
  buf_pos_ += 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  // 53-bit mantissa, offset by half an ulp so the value is strictly inside
  // (0, 1); Box-Muller and inverse-CDF transforms need open endpoints.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace simpa
