#pragma once

#include <complex>
#include <iosfwd>

#include <Eigen/Dense>

namespace dlab {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

// Largest singular value.
double opnorm(const CMat& A);

// Number of singular values above rel_tol * sigma_max.
int numerical_rank(const CMat& A, double rel_tol = 1e-8);

// Orthonormal basis of ker(C) from a column-pivoted QR of C^H.
// Throws NumericalFailure if the kernel dimension differs from expected_dim
// (pass -1 to skip the check).
CMat orthonormal_kernel(const CMat& C, int expected_dim = -1);

// Sine of the largest principal angle between the column spans of two
// matrices with orthonormal columns.
double subspace_gap(const CMat& Q1, const CMat& Q2);

// Line-oriented text format: one row per line, cells "re,im" separated by a space.
void write_matrix(std::ostream& os, const CMat& A);
CMat read_matrix(std::istream& is);

}  // namespace dlab
