#pragma once

#include <array>

#include <Eigen/Dense>

namespace mfof {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// Orthonormal basis of symmetric traceless 3x3 matrices (Frobenius product):
//   E1 = diag(1,-1,0)/sqrt2, E2 = diag(-1,-1,2)/sqrt6,
//   E3 = (e1e2+e2e1)/sqrt2, E4 = (e1e3+e3e1)/sqrt2, E5 = (e2e3+e3e2)/sqrt2.
const std::array<Mat3, 5>& sym0_basis();

Mat3 to_matrix(const Vec5& c);
// Frobenius projection onto the basis; the trace part of m is discarded.
Vec5 to_coeffs(const Mat3& m);

// Uniform random rotation from a unit quaternion.
template <class Rng>
Mat3 random_rotation(Rng& rng);

struct SymEigen {
  Vec3 values;  // ascending
  Mat3 vectors; // columns
};
SymEigen sym_eigen(const Mat3& m);

}  // namespace mfof

#include <random>

namespace mfof {

template <class Rng>
Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace mfof
