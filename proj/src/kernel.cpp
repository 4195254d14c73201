#include "mfof/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mfof/error.hpp"
#include "mfof/quadrature.hpp"

namespace mfof {

namespace {
constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();
}  // namespace

RadialProfile RadialProfile::inverse_power(double c, double q, double r0, double rmax) {
  RadialProfile p;
  p.form = ProfileForm::InversePower;
  p.coefficient = c;
  p.exponent = q;
  p.inner_cutoff = r0;
  p.outer_truncation = rmax;
  return p;
}

RadialProfile RadialProfile::table(std::vector<double> r, std::vector<double> g) {
  if (r.size() < 2 || r.size() != g.size()) throw DomainError("table profile needs >= 2 matching points");
  for (size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1])) throw DomainError("table profile radii must increase");
  if (r.front() < 0) throw DomainError("table profile radii must be >= 0");
  RadialProfile p;
  p.form = ProfileForm::Table;
  p.inner_cutoff = r.front();
  p.outer_truncation = r.back();
  p.table_r = std::move(r);
  p.table_g = std::move(g);
  return p;
}

double RadialProfile::operator()(double r) const {
  switch (form) {
    case ProfileForm::Zero:
      return 0.0;
    case ProfileForm::InversePower:
      if (r < inner_cutoff || r >= outer_truncation || coefficient == 0.0) return 0.0;
      return coefficient * std::pow(r, -exponent);
    case ProfileForm::Table: {
      if (r < table_r.front() || r > table_r.back()) return 0.0;
      auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
      size_t i = std::min<size_t>(it - table_r.begin(), table_r.size() - 1);
      if (i == 0) return table_g.front();
      double t = (r - table_r[i - 1]) / (table_r[i] - table_r[i - 1]);
      return (1 - t) * table_g[i - 1] + t * table_g[i];
    }
  }
  return 0.0;
}

double RadialProfile::support_min() const {
  return form == ProfileForm::Table ? table_r.front() : inner_cutoff;
}

double RadialProfile::support_max() const {
  return form == ProfileForm::Table ? table_r.back() : outer_truncation;
}

bool RadialProfile::is_zero() const {
  if (form == ProfileForm::Zero) return true;
  if (form == ProfileForm::InversePower) return coefficient == 0.0;
  return std::all_of(table_g.begin(), table_g.end(), [](double v) { return v == 0.0; });
}

bool RadialProfile::finite_moment(int k) const {
  if (is_zero() || form == ProfileForm::Table) return true;
  const double e = k - exponent + 1.0;
  bool lower = inner_cutoff > 0.0 || e > 0.0;
  bool upper = std::isfinite(outer_truncation) || e < 0.0;
  return lower && upper;
}

double RadialProfile::moment_between(int k, double a, double b) const {
  if (is_zero()) return 0.0;
  a = std::max(a, support_min());
  b = std::min(b, support_max());
  if (!(b > a)) return 0.0;
  if (form == ProfileForm::InversePower) {
    const double e = k - exponent + 1.0;
    if (std::abs(e) < 1e-14) return coefficient * std::log(b / a);
    if (std::isinf(b)) {
      if (e >= 0) return kInf;
      return -coefficient * std::pow(a, e) / e;
    }
    return coefficient * (std::pow(b, e) - std::pow(a, e)) / e;
  }
  // Linear segments times r^k: 8-point Gauss is exact for k <= 14.
  double s = 0.0;
  for (size_t i = 0; i + 1 < table_r.size(); ++i) {
    double lo = std::max(a, table_r[i]), hi = std::min(b, table_r[i + 1]);
    if (!(hi > lo)) continue;
    Rule1D r = gauss_legendre(8, lo, hi);
    for (size_t j = 0; j < r.x.size(); ++j) s += r.w[j] * (*this)(r.x[j]) * std::pow(r.x[j], k);
  }
  return s;
}

KernelSpec KernelSpec::inverse_power(double c1, double c2, double c3, double q, double r0, double rmax) {
  KernelSpec s;
  s.g = {RadialProfile::inverse_power(c1, q, r0, rmax), RadialProfile::inverse_power(c2, q, r0, rmax),
         RadialProfile::inverse_power(c3, q, r0, rmax)};
  return s;
}

double KernelSpec::max_inner_cutoff() const {
  double r = 0.0;
  for (const auto& p : g)
    if (!p.is_zero()) r = std::max(r, p.support_min());
  return r;
}

bool KernelSpec::is_zero() const {
  return std::all_of(g.begin(), g.end(), [](const RadialProfile& p) { return p.is_zero(); });
}

void QuadratureSpec::check() const {
  if (radial_nodes < 4 || angular_order < 4) throw ConfigError("quadrature node counts must be >= 4");
  if (angular_order % 2 != 0) throw ConfigError("angular_order must be even");
}

void angular_factors(const Vec3& zhat, Mat5& A2, Mat5& A3) {
  const auto& E = sym0_basis();
  Eigen::Matrix<double, 3, 5> U;
  Vec5 v;
  for (int k = 0; k < 5; ++k) {
    U.col(k) = E[k] * zhat;
    v[k] = zhat.dot(U.col(k));
  }
  A2 = U.transpose() * U;
  A3 = v * v.transpose();
}

Mat5 kernel_matrix(const KernelSpec& spec, const Vec3& z) {
  const double r = z.norm();
  if (!(r > 0.0)) throw DomainError("kernel direction undefined at z = 0");
  const double g1 = spec.g[0](r), g2 = spec.g[1](r), g3 = spec.g[2](r);
  Mat5 K = g1 * Mat5::Identity();
  if (g2 != 0.0 || g3 != 0.0) {
    Mat5 A2, A3;
    angular_factors(z / r, A2, A3);
    K += g2 * A2 + g3 * A3;
  }
  return K;
}

double eval_kernel(const KernelSpec& spec, const Vec3& z, const Vec5& P, const Vec5& Q) {
  return P.dot(kernel_matrix(spec, z) * Q);
}

// ---------------------------------------------------------------------------

double radial_moment(const RadialProfile& p, int k, const QuadratureSpec& quad) {
  if (p.is_zero()) return 0.0;
  if (!p.finite_moment(k) && quad.tail_mode == TailMode::Analytic)
    throw DomainError("radial moment diverges");
  if (p.form == ProfileForm::Table) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < p.table_r.size(); ++i) {
      Rule1D r = gauss_legendre(quad.radial_nodes, p.table_r[i], p.table_r[i + 1]);
      for (size_t j = 0; j < r.x.size(); ++j) s += r.w[j] * p(r.x[j]) * std::pow(r.x[j], k);
    }
    return s;
  }
  const double a = p.inner_cutoff;
  if (!(a > 0.0)) return p.moment_between(k, 0.0, p.outer_truncation);
  const double rmax = p.outer_truncation;
  double rswitch = std::min(16.0 * a, rmax);
  double upper = rswitch;
  if (quad.tail_mode == TailMode::Truncate) upper = std::isfinite(rmax) ? rmax : rswitch;
  std::vector<double> br{a};
  while (br.back() < upper) br.push_back(std::min(2.0 * br.back(), upper));
  Rule1D r = gauss_panels(br, quad.radial_nodes);
  double s = 0.0;
  for (size_t j = 0; j < r.x.size(); ++j) s += r.w[j] * p(r.x[j]) * std::pow(r.x[j], k);
  if (quad.tail_mode == TailMode::Analytic) s += p.moment_between(k, rswitch, rmax);
  return s;
}

std::vector<AngularNode> angular_rule(int order) {
  Rule1D t = gauss_legendre(order);
  const int nphi = 2 * order;
  std::vector<AngularNode> out;
  out.reserve(static_cast<size_t>(order) * nphi);
  for (int i = 0; i < order; ++i) {
    const double st = std::sqrt(std::max(0.0, 1.0 - t.x[i] * t.x[i]));
    for (int j = 0; j < nphi; ++j) {
      const double ph = 2.0 * kPi * j / nphi;
      out.push_back({Vec3(st * std::cos(ph), st * std::sin(ph), t.x[i]), t.w[i] * 2.0 * kPi / nphi});
    }
  }
  return out;
}

namespace {

double sphere_monomial(const std::vector<AngularNode>& rule, int a, int b, int c) {
  double s = 0.0;
  for (const auto& n : rule)
    s += n.w * std::pow(n.zhat[0], a) * std::pow(n.zhat[1], b) * std::pow(n.zhat[2], c);
  return s;
}

}  // namespace

MomentTable moments(const KernelSpec& spec, const QuadratureSpec& quad) {
  quad.check();
  for (const auto& p : spec.g)
    if (!p.finite_moment(2) || !p.finite_moment(4))
      throw DomainError("kernel profile is not integrable with finite second moment");
  const auto rule = angular_rule(quad.angular_order);
  std::array<double, 3> R2{}, R4{};
  for (int n = 0; n < 3; ++n) {
    R2[n] = radial_moment(spec.g[n], 2, quad);
    R4[n] = radial_moment(spec.g[n], 4, quad);
  }
  MomentTable t;
  const double S0 = sphere_monomial(rule, 0, 0, 0);
  t.G1_100 = R4[0] * sphere_monomial(rule, 2, 0, 0);
  t.G2_110 = R4[1] * sphere_monomial(rule, 2, 2, 0);
  t.G2_200 = R4[1] * sphere_monomial(rule, 4, 0, 0);
  t.G3_111 = R4[2] * sphere_monomial(rule, 2, 2, 2);
  t.G3_210 = R4[2] * sphere_monomial(rule, 4, 2, 0);
  t.G3_300 = R4[2] * sphere_monomial(rule, 6, 0, 0);
  const double z14 = sphere_monomial(rule, 4, 0, 0);
  t.k0_components = {R2[0] * S0, R2[1] * sphere_monomial(rule, 2, 0, 0), (2.0 / 3.0) * R2[2] * z14};
  t.k0 = t.k0_components[0] + t.k0_components[1] + t.k0_components[2];
  t.k0_third_without_factor = R2[2] * z14;
  for (int n = 0; n < 3; ++n) {
    t.mass[n] = R2[n] * S0;
    t.second_moment[n] = R4[n] * S0;
  }
  return t;
}

ElasticTensor elastic_tensor_blocks(const KernelSpec& spec, const QuadratureSpec& quad) {
  quad.check();
  const auto rule = angular_rule(quad.angular_order);
  std::array<double, 3> R4{};
  for (int n = 0; n < 3; ++n) R4[n] = radial_moment(spec.g[n], 4, quad);
  ElasticTensor T;
  for (auto& row : T.M)
    for (auto& m : row) m.setZero();
  Mat5 A2, A3;
  for (const auto& node : rule) {
    angular_factors(node.zhat, A2, A3);
    Mat5 A = R4[0] * Mat5::Identity() + R4[1] * A2 + R4[2] * A3;
    for (int g = 0; g < 3; ++g)
      for (int d = 0; d < 3; ++d) T.M[g][d] += (node.w * node.zhat[g] * node.zhat[d]) * A;
  }
  return T;
}

double elastic_form(const ElasticTensor& T, const Grad5& grad) {
  double s = 0.0;
  for (int g = 0; g < 3; ++g)
    for (int d = 0; d < 3; ++d) s += grad[g].dot(T.M[g][d] * grad[d]);
  return s;
}

Grad5 to_grad5(const Grad3& g) { return {to_coeffs(g[0]), to_coeffs(g[1]), to_coeffs(g[2])}; }
Grad3 to_grad3(const Grad5& g) { return {to_matrix(g[0]), to_matrix(g[1]), to_matrix(g[2])}; }

namespace {

Vec3 invariants(const Grad3& g) {
  // g[c](a, b) = Q_{ab,c}
  double I1 = 0, I2 = 0, I3 = 0;
  for (int a = 0; a < 3; ++a) {
    double div = 0;
    for (int b = 0; b < 3; ++b) {
      div += g[b](a, b);
      for (int c = 0; c < 3; ++c) {
        I1 += g[c](a, b) * g[c](a, b);
        I3 += g[c](a, b) * g[b](a, c);
      }
    }
    I2 += div * div;
  }
  return {I1, I2, I3};
}

Mat3 outer_sym(int i, int j) {
  Mat3 m = Mat3::Zero();
  m(i, j) += 1;
  m(j, i) += 1;
  return m;
}

}  // namespace

ElasticCoefficients elastic_tensor(const KernelSpec& spec, const QuadratureSpec& quad, double s_star) {
  const MomentTable G = moments(spec, quad);
  const ElasticTensor T = elastic_tensor_blocks(spec, quad);

  Mat3 D = Mat3::Zero();
  D(0, 0) = 1;
  D(1, 1) = -1;
  const Mat3 Z = Mat3::Zero();
  const std::array<Grad3, 3> probes = {Grad3{Z, Z, D}, Grad3{Z, D, Z}, Grad3{D, outer_sym(0, 1), Z}};
  Mat3 A;
  Vec3 f;
  for (int p = 0; p < 3; ++p) {
    A.row(p) = invariants(probes[p]).transpose();
    f[p] = elastic_form(T, to_grad5(probes[p]));
  }
  if (std::abs(A.determinant()) < 1e-12) throw NumericalError("singular probe system");
  const Vec3 L = A.fullPivLu().solve(f);

  // Fourth probe: a fixed generic gradient.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  Grad5 g5;
  for (auto& v : g5)
    for (int k = 0; k < 5; ++k) v[k] = nd(rng);
  const Grad3 g4 = to_grad3(g5);
  const double f4 = elastic_form(T, g5);
  const double pred = L.dot(invariants(g4));

  ElasticCoefficients c;
  c.L1 = L[0];
  c.L2 = L[1];
  c.L3 = L[2];
  c.probe_residual = std::abs(f4 - pred) / std::max(std::abs(f4), 1e-300);
  const double scale = s_star > 0 ? s_star * s_star : 1.0;
  c.s_star_scaling_applied = s_star > 0;
  c.s_star = s_star > 0 ? s_star : 1.0;
  c.K1 = scale * (2 * G.G1_100 + G.G2_110 + G.G2_200 + G.G3_300 - G.G3_210);
  c.K2 = scale * 2 * (G.G1_100 + G.G2_110 + G.G3_210 - G.G3_111);
  c.K3 = c.K1;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
  c.splay_consistency = rel(scale * (2 * c.L1 + c.L2 + c.L3), c.K1);
  c.twist_consistency = rel(scale * 2 * c.L1, c.K2);
  if (c.probe_residual > 1e-6) throw NumericalError("elastic probe residual too large");
  return c;
}

double quadratic_form(const ElasticCoefficients& c, const Grad3& gradQ) {
  double scale = 0.0;
  for (const auto& m : gradQ) scale = std::max(scale, m.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * (1.0 + scale);
  for (const auto& m : gradQ) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) throw DomainError("gradQ not symmetric");
    if (std::abs(m.trace()) > tol) throw DomainError("gradQ not traceless");
  }
  const Vec3 I = invariants(gradQ);
  return c.L1 * I[0] + c.L2 * I[1] + c.L3 * I[2];
}

double frame_deviation(const ElasticTensor& T, const Mat3& R, const Mat3& A, const Vec3& e) {
  Grad3 g0, g1;
  const Mat3 Ar = R * A * R.transpose();
  const Vec3 er = R * e;
  for (int k = 0; k < 3; ++k) {
    g0[k] = A * e[k];
    g1[k] = Ar * er[k];
  }
  const double f0 = elastic_form(T, to_grad5(g0)), f1 = elastic_form(T, to_grad5(g1));
  if (f0 == 0.0 && f1 == 0.0) return 0.0;
  return std::abs(f0 - f1) / std::max(std::abs(f0), std::abs(f1));
}

double frame_check(const KernelSpec& spec, const QuadratureSpec& quad, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("frame_check needs trials >= 1");
  const ElasticTensor T = elastic_tensor_blocks(spec, quad);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Mat3 R = random_rotation(rng);
    Vec5 a;
    for (int k = 0; k < 5; ++k) a[k] = nd(rng);
    Vec3 e(nd(rng), nd(rng), nd(rng));
    worst = std::max(worst, frame_deviation(T, R, to_matrix(a), e.normalized()));
  }
  return worst;
}

double odd_moment_check(const RadialProfile& profile, const QuadratureSpec& quad) {
  if (!profile.finite_moment(6)) throw DomainError("odd_moment_check needs a finite fourth moment");
  const auto rule = angular_rule(quad.angular_order);
  const double R6 = radial_moment(profile, 6, quad);
  double num = 0, den = 0;
  for (const auto& n : rule) {
    const double x2 = n.zhat[0] * n.zhat[0], y2 = n.zhat[1] * n.zhat[1];
    num += n.w * (x2 * x2 - 3 * x2 * y2);
    den += n.w * (x2 * x2 + 3 * x2 * y2);
  }
  return (R6 * num) / (R6 * den);
}

double odd_moment_check(const KernelSpec& spec, const QuadratureSpec& quad) {
  return odd_moment_check(spec.g[0], quad);
}

double odd_moment_check_halfspace_mc(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double num = 0, den = 0;
  for (int i = 0; i < samples; ++i) {
    Vec3 z(nd(rng), nd(rng), nd(rng));
    z.normalize();
    if (z[0] <= 0) continue;
    const double x2 = z[0] * z[0], y2 = z[1] * z[1];
    num += x2 * x2 - 3 * x2 * y2;
    den += x2 * x2 + 3 * x2 * y2;
  }
  return num / den;
}

// ---------------------------------------------------------------------------

namespace {

void eig_minmax(const Mat5& K, double& lo, double& hi) {
  Eigen::SelfAdjointEigenSolver<Mat5> es(K, Eigen::EigenvaluesOnly);
  lo = es.eigenvalues()[0];
  hi = es.eigenvalues()[4];
}

}  // namespace

ValidationReport validate_assumptions(const KernelSpec& spec, double alpha) {
  ValidationReport rep;
  rep.alpha = alpha;
  rep.integrable = true;
  for (int n = 0; n < 3; ++n) {
    if (!spec.g[n].finite_moment(2) || !spec.g[n].finite_moment(4)) {
      rep.integrable = false;
      rep.messages.push_back("g" + std::to_string(n + 1) + " not integrable with finite second moment");
    }
  }

  double rmin = 1e300, rmax_fin = 0.0;
  bool any_finite = false;
  for (const auto& p : spec.g) {
    if (p.is_zero()) continue;
    rmin = std::min(rmin, p.support_min());
    if (std::isfinite(p.support_max())) {
      rmax_fin = std::max(rmax_fin, p.support_max());
      any_finite = true;
    }
  }
  if (rmin > 1e299) rmin = 0.1;
  if (!(rmin > 0.0)) rmin = 1e-3;
  const double rtop = any_finite ? rmax_fin * (1 - 1e-9) : 1e3 * std::max(rmin, 1.0);

  const int nr = 80;
  std::vector<double> radii(nr), lmin(nr);
  double global_scale = 0.0;
  rep.min_eigenvalue = kInf;
  int consecutive = 0;
  for (int i = 0; i < nr; ++i) {
    radii[i] = rmin * (1 + 1e-9) * std::pow(rtop / (rmin * (1 + 1e-9)), double(i) / (nr - 1));
    double lo, hi;
    eig_minmax(kernel_matrix(spec, Vec3(0, 0, radii[i])), lo, hi);
    lmin[i] = lo;
    global_scale = std::max({global_scale, std::abs(lo), std::abs(hi)});
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, lo);
    if (lo > 0.0) {
      rep.max_ratio = std::max(rep.max_ratio, hi / lo);
      if (++consecutive >= 2) rep.positive_somewhere = true;
    } else {
      consecutive = 0;
    }
  }
  rep.nonnegative = rep.min_eigenvalue >= -1e-12 * std::max(global_scale, 1e-300);
  if (global_scale == 0.0) rep.positive_somewhere = false;
  rep.assumption1 = rep.nonnegative && rep.positive_somewhere;
  if (!rep.nonnegative) rep.messages.push_back("K(z) has a negative eigenvalue");
  if (!rep.positive_somewhere) rep.messages.push_back("g = lambda_min(K) is not bounded away from zero anywhere");
  if (spec.M_bound > 0.0) {
    rep.assumption3 = rep.max_ratio <= spec.M_bound * (1 + 1e-12);
    if (!rep.assumption3) rep.messages.push_back("lambda_max(K) exceeds M_bound * g");
  }

  // Random directions must reproduce the e3 spectrum (isotropy).
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    Vec3 d(nd(rng), nd(rng), nd(rng));
    d.normalize();
    const int i = (t * 7) % nr;
    double lo, hi;
    eig_minmax(kernel_matrix(spec, radii[i] * d), lo, hi);
    const double dev = std::abs(lo - lmin[i]) / std::max(global_scale, 1e-300);
    rep.isotropy_deviation = std::max(rep.isotropy_deviation, dev);
  }

  // Decay exponent: log-log fit of g over the last decade of sampled radii.
  {
    const double r_hi = rtop, r_lo = std::max(rtop / 10.0, rmin * (1 + 1e-9));
    const int nf = 20;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool ok = r_hi > r_lo;
    for (int i = 0; i < nf && ok; ++i) {
      const double r = r_lo * std::pow(r_hi / r_lo, double(i) / (nf - 1));
      double lo, hi;
      eig_minmax(kernel_matrix(spec, Vec3(0, 0, r)), lo, hi);
      if (!(lo > 0.0)) {
        ok = false;
        break;
      }
      const double x = std::log(r), y = std::log(lo);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    if (ok) rep.decay_exponent = -(nf * sxy - sx * sy) / (nf * sxx - sx * sx);
  }
  rep.bounded_domain_condition =
      std::isfinite(rep.decay_exponent) && (1 - alpha) * (rep.decay_exponent - 3) > 2;
  rep.passed = rep.integrable && rep.assumption1 && rep.assumption3;
  return rep;
}

}  // namespace mfof
