#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mfof/linalg.hpp"

namespace mfof {

enum class ProfileForm { InversePower, Table, Zero };

struct RadialProfile {
  ProfileForm form = ProfileForm::Zero;
  double coefficient = 0.0;
  double exponent = 6.0;
  double inner_cutoff = 0.0;
  double outer_truncation = std::numeric_limits<double>::infinity();
  // Table form: piecewise linear in r on [table_r.front(), table_r.back()], zero outside.
  std::vector<double> table_r, table_g;

  static RadialProfile inverse_power(double c, double q, double r0,
                                     double rmax = std::numeric_limits<double>::infinity());
  static RadialProfile table(std::vector<double> r, std::vector<double> g);
  static RadialProfile zero() { return {}; }

  double operator()(double r) const;
  double support_min() const;
  double support_max() const;
  bool is_zero() const;
  // Is int g(r) r^k dr over the support finite?
  bool finite_moment(int k) const;
  // int_a^b g(r) r^k dr (clipped to the support); exact for both forms.
  double moment_between(int k, double a, double b) const;
};

struct KernelSpec {
  std::array<RadialProfile, 3> g;
  double M_bound = 0.0;  // 0: not checked

  // Shared inverse-power profile r^-q on [r0, rmax) with coefficients (c1, c2, c3).
  static KernelSpec inverse_power(double c1, double c2, double c3, double q = 6.0, double r0 = 0.1,
                                  double rmax = std::numeric_limits<double>::infinity());
  double max_inner_cutoff() const;
  bool is_zero() const;
};

enum class TailMode { Analytic, Truncate };

struct QuadratureSpec {
  int radial_nodes = 16;
  int angular_order = 8;
  TailMode tail_mode = TailMode::Analytic;
  void check() const;
  QuadratureSpec doubled() const { return {2 * radial_nodes, 2 * angular_order, tail_mode}; }
};

// Pointwise 5x5 operator of K(z) in the Sym0 basis: g1 I + g2 A2(zhat) + g3 A3(zhat).
Mat5 kernel_matrix(const KernelSpec& spec, const Vec3& z);
// Angular factors alone: A2_kl = (E_k zhat).(E_l zhat), A3_kl = (zhat.E_k zhat)(zhat.E_l zhat).
void angular_factors(const Vec3& zhat, Mat5& A2, Mat5& A3);

double eval_kernel(const KernelSpec& spec, const Vec3& z, const Vec5& P, const Vec5& Q);

struct ValidationReport {
  bool integrable = false;             // mass and second moment finite for each profile
  bool nonnegative = false;            // min eigenvalue of K(z) >= 0 on all samples
  bool positive_somewhere = false;     // bounded away from zero on an open set
  bool assumption1 = false;
  bool assumption3 = true;             // lambda_max <= M g wherever g > 0 (only if M_bound > 0)
  double min_eigenvalue = 0.0;
  double max_ratio = 0.0;              // max lambda_max / lambda_min over samples with lambda_min > 0
  double isotropy_deviation = 0.0;     // |lambda_min(random zhat) - lambda_min(e3)|, relative
  double decay_exponent = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.25;
  bool bounded_domain_condition = false;  // (1-alpha)(p-3) > 2
  bool passed = false;                 // integrable && assumption1 && assumption3
  std::vector<std::string> messages;
};

ValidationReport validate_assumptions(const KernelSpec& spec, double alpha = 0.25);

struct MomentTable {
  double G1_100 = 0, G2_110 = 0, G2_200 = 0, G3_111 = 0, G3_210 = 0, G3_300 = 0;
  std::array<double, 3> k0_components{};  // int g1, int g2 z1^2, (2/3) int g3 z1^4
  double k0 = 0;
  double k0_third_without_factor = 0;     // int g3 z1^4, the alternative convention
  std::array<double, 3> mass{};           // int g_n dz
  std::array<double, 3> second_moment{};  // int g_n |z|^2 dz
};

// int g(r) r^k dr using Gauss panels plus an analytic tail (or truncation).
double radial_moment(const RadialProfile& p, int k, const QuadratureSpec& quad);

struct AngularNode {
  Vec3 zhat;
  double w;
};
// Gauss-Legendre in cos(theta) x trapezoid in phi; weights sum to 4 pi.
std::vector<AngularNode> angular_rule(int angular_order);

MomentTable moments(const KernelSpec& spec, const QuadratureSpec& quad = {});

// M[g][d] = int K(z) z_g z_d dz as 5x5 blocks.
struct ElasticTensor {
  std::array<std::array<Mat5, 3>, 3> M;
};
ElasticTensor elastic_tensor_blocks(const KernelSpec& spec, const QuadratureSpec& quad = {});

// grad[g] = coefficients of d_g Q in the Sym0 basis.
using Grad5 = std::array<Vec5, 3>;
double elastic_form(const ElasticTensor& T, const Grad5& grad);

// gradQ[g] = d_g Q as a 3x3 matrix; gradQ[g](a, b) = Q_{ab,g}.
using Grad3 = std::array<Mat3, 3>;
Grad5 to_grad5(const Grad3& g);
Grad3 to_grad3(const Grad5& g);

struct ElasticCoefficients {
  double L1 = 0, L2 = 0, L3 = 0;
  double K1 = 0, K2 = 0, K3 = 0;
  bool s_star_scaling_applied = false;
  double s_star = 1.0;
  double probe_residual = 0.0;  // relative residual of the fourth probe
  // Consistency between the probe-extracted L and the moment formulas.
  double splay_consistency = 0.0, twist_consistency = 0.0;
};

// K from the moment formulas, L from probing the quadrature form. s_star <= 0 means
// "no scaling" (K reported per unit s*^2).
ElasticCoefficients elastic_tensor(const KernelSpec& spec, const QuadratureSpec& quad = {},
                                   double s_star = 1.0);

double quadratic_form(const ElasticCoefficients& c, const Grad3& gradQ);

// |f(A (x) e) - f(RAR^T (x) Re)| / |f| for the quadrature form.
double frame_deviation(const ElasticTensor& T, const Mat3& R, const Mat3& A, const Vec3& e);

double frame_check(const KernelSpec& spec, const QuadratureSpec& quad, int trials,
                   std::uint64_t seed = 20240601);

double odd_moment_check(const RadialProfile& profile, const QuadratureSpec& quad = {});
double odd_moment_check(const KernelSpec& spec, const QuadratureSpec& quad = {});
// Diagnostic misuse: Monte-Carlo estimate restricted to the half-space z1 > 0.
double odd_moment_check_halfspace_mc(int samples, std::uint64_t seed = 7);

}  // namespace mfof
