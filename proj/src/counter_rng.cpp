#include "dlab/counter_rng.hpp"

#include <cmath>
#include <numbers>

namespace dlab {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = M0 * c[0], p1 = M1 * c[2];
    const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += W0;
    k[1] += W1;
  }
  return c;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t bits53(const SeededStream& s, std::uint64_t index, int lane) {
  const auto out = philox4x32({std::uint32_t(index), std::uint32_t(index >> 32), std::uint32_t(s.stream),
                               std::uint32_t(s.stream >> 32)},
                              {std::uint32_t(s.seed), std::uint32_t(s.seed >> 32)});
  const int o = lane ? 2 : 0;
  const std::uint64_t w = (std::uint64_t(out[o]) << 32) | out[o + 1];
  return w >> 11;
}

}  // namespace

double SeededStream::uniform(std::uint64_t index, int lane) const {
  return double(bits53(*this, index, lane)) * 0x1.0p-53;
}

double SeededStream::uniform_pos(std::uint64_t index, int lane) const {
  return double(bits53(*this, index, lane) + 1) * 0x1.0p-53;
}

double SeededStream::normal(std::uint64_t index, int lane) const {
  const double u1 = uniform_pos(index, 0), u2 = uniform(index, 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return lane ? r * std::sin(t) : r * std::cos(t);
}

}  // namespace dlab
