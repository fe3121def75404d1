#include "dlab/linalg.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dlab/errors.hpp"

namespace dlab {

double opnorm(const CMat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(A);
  return svd.singularValues()(0);
}

int numerical_rank(const CMat& A, double rel_tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

CMat orthonormal_kernel(const CMat& C, int expected_dim) {
  const Eigen::Index N = C.cols();
  Eigen::ColPivHouseholderQR<CMat> qr(C.adjoint());
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  const Eigen::Index k = N - r;
  if (expected_dim >= 0 && k != expected_dim)
    throw NumericalFailure("constraint kernel has dimension " + std::to_string(k) +
                           ", expected " + std::to_string(expected_dim));
  CMat Q = qr.householderQ() * CMat::Identity(N, N);
  return Q.rightCols(k);
}

double subspace_gap(const CMat& Q1, const CMat& Q2) {
  if (Q1.cols() != Q2.cols()) return 1.0;
  Eigen::JacobiSVD<CMat> svd(Q1.adjoint() * Q2);
  double smin = svd.singularValues().minCoeff();
  smin = std::min(1.0, smin);
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

void write_matrix(std::ostream& os, const CMat& A) {
  char buf[64];
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ' ';
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", A(i, j).real(), A(i, j).imag());
      os << buf;
    }
    os << '\n';
  }
}

CMat read_matrix(std::istream& is) {
  std::vector<std::vector<cplx>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<cplx> row;
    while (ls >> cell) {
      auto comma = cell.find(',');
      if (comma == std::string::npos) throw InvalidArgument("matrix cell without comma: " + cell);
      row.emplace_back(std::stod(cell.substr(0, comma)), std::stod(cell.substr(comma + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument("ragged matrix rows");
    rows.push_back(std::move(row));
  }
  CMat A(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) A(i, j) = rows[i][j];
  return A;
}

}  // namespace dlab
