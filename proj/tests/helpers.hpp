#pragma once
#include "dlab/counter_rng.hpp"
#include "dlab/linalg.hpp"

namespace testutil {

using dlab::cplx;
using dlab::CMat;
using dlab::CVec;

inline CMat gaussian(int r, int c, const dlab::SeededStream& st, std::uint64_t& idx) {
  CMat G(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j, ++idx) G(i, j) = cplx(st.normal(idx, 0), st.normal(idx, 1));
  return G;
}

// norm uniformly in (0, 1]; every fifth one sits on the unit sphere
inline CMat contraction(int m, const dlab::SeededStream& st, std::uint64_t& idx) {
  CMat G = gaussian(m, m, st, idx);
  const double r = (idx % 5 == 0) ? 1.0 : st.uniform_pos(idx, 0);
  ++idx;
  return G * (r / dlab::opnorm(G));
}

}  // namespace testutil
