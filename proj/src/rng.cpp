#include "mimo_ppsnr/rng.hpp"

#include <cmath>
#include <numbers>

namespace mimo {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t combine(std::uint64_t key, std::uint64_t value) noexcept {
  return mix64(key ^ mix64(value));
}

}  // namespace

RngStream::RngStream(std::uint64_t key) : key_(key), engine_(key) {}

RngStream::RngStream(std::uint64_t seed, StreamId id, DrawPurpose purpose, std::uint64_t lane)
    : RngStream(combine(combine(combine(combine(mix64(seed), id.channel), id.packet),
                                static_cast<std::uint64_t>(purpose)),
                        lane)) {}

RngStream RngStream::fork(DrawPurpose purpose, std::uint64_t lane) const {
  return RngStream(combine(combine(key_ ^ 0x5bd1e9955bd1e995ULL, static_cast<std::uint64_t>(purpose)),
                           lane));
}

double RngStream::uniform() {
  // 53 random mantissa bits, shifted off zero so log() is always finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Cx RngStream::complex_gaussian(double variance) {
  const double scale = std::sqrt(0.5 * variance);
  const double re = gaussian();
  const double im = gaussian();
  return {scale * re, scale * im};
}

}  // namespace mimo
