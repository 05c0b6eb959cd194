// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_COMMON_H
#define OLC_COMMON_H

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace olc {

template<typename T>
struct Vec3 {
  T x{}, y{}, z{};

  Vec3() = default;
  Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
  Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
  Vec3 operator*(T v) const { return {x * v, y * v, z * v}; }
  Vec3 operator/(T v) const { return {x / v, y / v, z / v}; }
  bool operator==(const Vec3& r) const { return x == r.x && y == r.y && z == r.z; }
  bool operator!=(const Vec3& r) const { return !(*this == r); }
  bool operator<(const Vec3& r) const {
    if (x != r.x) return x < r.x;
    if (y != r.y) return y < r.y;
    return z < r.z;
  }

  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  T operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  T maxComponent() const { return std::max(x, std::max(y, z)); }
  T minComponent() const { return std::min(x, std::min(y, z)); }

  static Vec3 min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
  }
  static Vec3 max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
  }
};

using Vec3d = Vec3<double>;
using Vec3i = Vec3<int32_t>;

inline double dot(const Vec3d& a, const Vec3d& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double normSq(const Vec3d& a) { return dot(a, a); }

// Error taxonomy. The CLI maps these onto process exit codes.
struct OlcError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : OlcError {
  using OlcError::OlcError;
};
struct DomainError : OlcError {
  using OlcError::OlcError;
};
struct PlyParseError : OlcError {
  using OlcError::OlcError;
};
struct ConfigError : OlcError {
  using OlcError::OlcError;
};
// Bitstream/payload damage: wrong magic, truncation, undecodable payload.
struct CorruptionError : OlcError {
  using OlcError::OlcError;
};
struct ChecksumMismatchError : CorruptionError {
  using CorruptionError::CorruptionError;
};
struct TrainError : OlcError {
  using OlcError::OlcError;
};

// 64-bit FNV-1a, used as the content checksum of weight checkpoints.
inline uint64_t fnv1a64(std::span<const uint8_t> bytes, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Morton (z-order) code with x in the least significant bit of each triple,
// so child octant k = x_bit + 2*y_bit + 4*z_bit appends as morton*8 + k.
inline uint64_t mortonSpread(uint32_t v) {
  uint64_t m = v & 0x1fffff;  // 21 bits per axis
  m = (m | m << 32) & 0x1f00000000ffffull;
  m = (m | m << 16) & 0x1f0000ff0000ffull;
  m = (m | m << 8) & 0x100f00f00f00f00full;
  m = (m | m << 4) & 0x10c30c30c30c30c3ull;
  m = (m | m << 2) & 0x1249249249249249ull;
  return m;
}

inline uint64_t mortonEncode(const Vec3i& c) {
  return mortonSpread(static_cast<uint32_t>(c.x)) | (mortonSpread(static_cast<uint32_t>(c.y)) << 1)
    | (mortonSpread(static_cast<uint32_t>(c.z)) << 2);
}

inline uint32_t mortonCompact(uint64_t m) {
  m &= 0x1249249249249249ull;
  m = (m | m >> 2) & 0x10c30c30c30c30c3ull;
  m = (m | m >> 4) & 0x100f00f00f00f00full;
  m = (m | m >> 8) & 0x1f0000ff0000ffull;
  m = (m | m >> 16) & 0x1f00000000ffffull;
  m = (m | m >> 32) & 0x1fffff;
  return static_cast<uint32_t>(m);
}

inline Vec3i mortonDecode(uint64_t m) {
  return {static_cast<int32_t>(mortonCompact(m)), static_cast<int32_t>(mortonCompact(m >> 1)),
          static_cast<int32_t>(mortonCompact(m >> 2))};
}

// Deterministic RNG. std::mt19937_64 output is pinned by the standard; the
// distribution helpers below avoid std::uniform_*_distribution, whose results
// are implementation-defined.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(splitmix(seed)) {}

  uint64_t nextU64() {
    // xorshift* variant; scalar state keeps copies cheap.
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // Uniform in [0, 1).
  double nextDouble() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t nextBelow(uint64_t n) { return nextU64() % n; }

  // Standard normal via Box-Muller.
  double nextGaussian() {
    double u1 = nextDouble();
    double u2 = nextDouble();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return (x ^ (x >> 31)) | 1;
  }

  uint64_t state_;
};

}  // namespace olc

#endif
