#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace marsha
{

// splitmix64 finalizer, used for seed derivation and stateless hashing.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hashCombine(std::uint64_t a, std::uint64_t b)
{
  return splitmix64(a ^ splitmix64(b));
}

/* Deterministic random stream. The engine is mt19937_64 but the uniform and
 * normal transforms are implemented here, so sequences do not depend on the
 * standard library's distribution internals. */
class RngStream
{
public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t nextU64() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // [0, n)
  std::uint64_t uniformInt(std::uint64_t n)
  {
    const auto wide = static_cast<unsigned __int128>(nextU64()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // Standard normal via Box-Muller; caches the second draw.
  double normal()
  {
    if (has_cached_)
    {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0)
      u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Independent child stream, addressed by label from the original seed so
  // substream identity does not depend on consumption order.
  RngStream substream(std::uint64_t label) const { return RngStream(hashCombine(seed_, label)); }

private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace marsha
