#pragma once

#include <array>
#include <cstdint>

namespace dlab {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// splitmix64 finalizer, used to derive stream ids.
std::uint64_t mix64(std::uint64_t x);

// A draw is a pure function of (seed, stream, index). Each index yields two
// independent 53-bit uniforms (lanes 0 and 1).
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  // in [0, 1)
  double uniform(std::uint64_t index, int lane = 0) const;
  // in (0, 1]
  double uniform_pos(std::uint64_t index, int lane = 0) const;
  // standard normal via Box-Muller on the two lanes; lane selects cos/sin branch
  double normal(std::uint64_t index, int lane = 0) const;

  SeededStream child(std::uint64_t id) const { return {seed, mix64(stream ^ mix64(id + 0x9e3779b97f4a7c15ULL))}; }
};

}  // namespace dlab
