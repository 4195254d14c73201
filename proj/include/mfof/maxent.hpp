#pragma once

#include <string>

#include "mfof/linalg.hpp"

namespace mfof {

// Order-parameter values and multipliers are both stored as coefficient vectors in the
// Sym0 basis of linalg.hpp.
using QTensor = Vec5;
using Multiplier = Vec5;

// Full-sphere node counts (cos(theta) x phi). In the eigenframe the integrand is even in
// cos(theta) and pi-periodic in phi, so half of each range is evaluated; the counts are
// floors, and large multipliers add graded panels and phi nodes automatically.
struct SphereQuadSpec {
  int n_theta = 64;
  int n_phi = 128;
};

struct MaxEntOptions {
  SphereQuadSpec quad;
  double tol = 1e-10;
  int max_iter = 200;
};

// Moments of exp(sum lam_i q_i^2) on the sphere in its eigenframe.
struct FrameMoments {
  double log_z = 0;  // log of the integral over S^2
  Vec3 m2;           // <q_i^2>
  Mat3 m4;           // <q_i^2 q_j^2>
};
FrameMoments frame_moments(const Vec3& lam, const SphereQuadSpec& quad = {});

struct PartitionResult {
  double logZ = 0;
  QTensor mean;
  Mat5 covariance;
};
PartitionResult partition(const Multiplier& lambda, const SphereQuadSpec& quad = {});

struct LambdaSolution {
  Multiplier lambda;
  double logZ = 0;
  double psi_s = 0;
  Mat5 covariance;
  int iterations = 0;
  double residual = 0;
};

bool in_open_Q(const QTensor& b, double margin = 0.0);

// Newton on the dual in the common eigenframe of b and Lambda. `warm` (optional) seeds
// the iteration. Throws DomainError outside the open moment set, NumericalError on
// exceeding the iteration cap.
LambdaSolution solve_lambda(const QTensor& b, const MaxEntOptions& opts = {}, const Multiplier* warm = nullptr,
                            bool want_covariance = true);
double psi_s(const QTensor& b, const MaxEntOptions& opts = {});

enum class Branch { Isotropic, Nematic };

struct BulkData {
  double k0 = 0;
  double s_star = 0;
  double c5 = 0;
  double psi_at_sstar = 0;
  Branch branch = Branch::Isotropic;
};

BulkData ground_state(double k0, const MaxEntOptions& opts = {}, double delta = 1e-6);

// psi(b) = psi_s(b) - k0 |b|^2 / 2 - c5
double psi(const BulkData& bulk, const QTensor& b, const MaxEntOptions& opts = {});

QTensor uniaxial(double s, const Vec3& n);

// Euclidean projection onto {eigenvalues in [-1/3 + delta, 2/3 - delta]}; points already
// inside are returned unchanged.
QTensor project_Qbar(const Mat3& raw, double delta);
QTensor project_Qbar(const QTensor& raw, double delta);

double dist_to_M(const QTensor& b, double s_star);

}  // namespace mfof
