#include "mfof/linalg.hpp"

#include <cmath>

namespace mfof {

const std::array<Mat3, 5>& sym0_basis() {
  static const std::array<Mat3, 5> basis = [] {
    std::array<Mat3, 5> e;
    const double r2 = 1.0 / std::sqrt(2.0);
    const double r6 = 1.0 / std::sqrt(6.0);
    for (auto& m : e) m.setZero();
    e[0](0, 0) = r2;
    e[0](1, 1) = -r2;
    e[1](0, 0) = -r6;
    e[1](1, 1) = -r6;
    e[1](2, 2) = 2.0 * r6;
    e[2](0, 1) = e[2](1, 0) = r2;
    e[3](0, 2) = e[3](2, 0) = r2;
    e[4](1, 2) = e[4](2, 1) = r2;
    return e;
  }();
  return basis;
}

Mat3 to_matrix(const Vec5& c) {
  const auto& e = sym0_basis();
  Mat3 m = Mat3::Zero();
  for (int k = 0; k < 5; ++k) m += c[k] * e[k];
  return m;
}

Vec5 to_coeffs(const Mat3& m) {
  const auto& e = sym0_basis();
  Vec5 c;
  for (int k = 0; k < 5; ++k) c[k] = (e[k].cwiseProduct(m)).sum();
  return c;
}

SymEigen sym_eigen(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace mfof
