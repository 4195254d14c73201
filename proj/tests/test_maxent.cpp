#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mfof/error.hpp"
#include "mfof/maxent.hpp"

using namespace mfof;
namespace {
constexpr double pi = std::numbers::pi;

Vec5 diag_coeffs(double a, double b, double c) {
  Mat3 m = Mat3::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return to_coeffs(m);
}

// Composite Simpson on [0, 1] for the even integrand exp(lam (x^2 - 1/3)) x^{2k}.
double ms_integral(double lam, int k, int n = 4000) {
  auto f = [&](double x) { return std::exp(lam * (x * x - 1.0 / 3.0)) * std::pow(x, 2 * k); };
  const double h = 1.0 / n;
  double s = f(0) + f(1);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(i * h);
  return s * h / 3.0;
}

// Scalar Maier-Saupe dual: Lambda = lam (e3e3 - I/3), b = s (e3e3 - I/3).
// d logZ / d lam = <x^2> - 1/3 = (2/3) s.
double ms_psi(double s, double* lam_out = nullptr) {
  double lam = 0;
  for (int it = 0; it < 100; ++it) {
    const double i0 = ms_integral(lam, 0), i1 = ms_integral(lam, 1), i2 = ms_integral(lam, 2);
    const double m = i1 / i0, v = i2 / i0 - m * m;
    const double r = (m - 1.0 / 3.0) - (2.0 / 3.0) * s;
    lam -= r / v;
    if (std::abs(r) < 1e-15) break;
  }
  if (lam_out) *lam_out = lam;
  const double logZ = std::log(4 * pi * ms_integral(lam, 0));
  return lam * (2.0 / 3.0) * s - logZ;
}

Vec5 random_interior(std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> u(-1.0 / 3.0 + margin, 2.0 / 3.0 - margin);
  for (;;) {
    const double a = u(rng), b = u(rng), c = -a - b;
    if (c < -1.0 / 3.0 + margin || c > 2.0 / 3.0 - margin) continue;
    const Mat3 R = random_rotation(rng);
    Mat3 D = Mat3::Zero();
    D.diagonal() << a, b, c;
    return to_coeffs(R * D * R.transpose());
  }
}
}  // namespace

TEST_CASE("partition at zero multiplier") {
  auto p = partition(Multiplier::Zero());
  CHECK(p.logZ == doctest::Approx(std::log(4 * pi)).epsilon(1e-14));
  CHECK(p.mean.norm() < 1e-14);
  // Isotropic covariance of a(p) in an orthonormal Sym0 basis is (2/15) I.
  CHECK((p.covariance - (2.0 / 15.0) * Mat5::Identity()).norm() < 1e-13);
}

TEST_CASE("partition matches the one-dimensional oracle") {
  const double lam = 5.0;
  const Vec5 L = lam * uniaxial(1.0, Vec3(0, 0, 1));
  auto p = partition(L);
  const double i0 = ms_integral(lam, 0), i1 = ms_integral(lam, 1);
  const double s = 1.5 * (i1 / i0) - 0.5;
  CHECK(s > 0);
  CHECK((p.mean - uniaxial(s, Vec3(0, 0, 1))).norm() < 1e-10);
  CHECK(p.logZ == doctest::Approx(std::log(4 * pi * i0)).epsilon(1e-12));
}

TEST_CASE("partition is frame indifferent") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    Vec5 L;
    for (int k = 0; k < 5; ++k) L[k] = 3 * nd(rng);
    const Mat3 R = random_rotation(rng);
    auto a = partition(L);
    auto b = partition(to_coeffs(R * to_matrix(L) * R.transpose()));
    CHECK(a.logZ == doctest::Approx(b.logZ).epsilon(1e-12));
    CHECK((to_coeffs(R * to_matrix(a.mean) * R.transpose()) - b.mean).norm() < 1e-12);
  }
}

TEST_CASE("solve_lambda") {
  SUBCASE("zero") {
    auto sol = solve_lambda(Vec5::Zero());
    CHECK(sol.lambda.norm() < 1e-12);
    CHECK(sol.psi_s == doctest::Approx(-std::log(4 * pi)).epsilon(1e-14));
  }
  SUBCASE("round trip") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 30; ++t) {
      Vec5 L0;
      for (int k = 0; k < 5; ++k) L0[k] = nd(rng);
      L0 *= (10.0 * std::uniform_real_distribution<double>(0, 1)(rng)) / L0.norm();
      const Vec5 b = partition(L0).mean;
      auto sol = solve_lambda(b);
      CHECK((sol.lambda - L0).norm() <= 1e-6);
      CHECK(sol.residual <= 1e-10);
    }
  }
  SUBCASE("boundary rejected") {
    CHECK_THROWS_AS(solve_lambda(diag_coeffs(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0)), DomainError);
    CHECK_THROWS_AS(solve_lambda(diag_coeffs(0.8, -0.4, -0.4)), DomainError);
  }
}

TEST_CASE("psi_s values") {
  CHECK(psi_s(Vec5::Zero()) == doctest::Approx(-2.531024).epsilon(1e-6));
  for (double s : {0.3, -0.2, 0.7, 0.95}) {
    const double ref = ms_psi(s);
    CHECK(std::abs(psi_s(uniaxial(s, Vec3(0, 0, 1))) - ref) < 1e-8);
  }
  // Strictly increasing toward the boundary along the uniaxial ray.
  double prev = psi_s(Vec5::Zero());
  for (double s = 0.05; s < 0.995; s += 0.05) {
    const double v = psi_s(uniaxial(s, Vec3(1, 2, 3)));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("Legendre gradient identity") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    const Vec5 b = random_interior(rng, 0.1);
    const Vec5 L = solve_lambda(b).lambda;
    for (int k = 0; k < 5; ++k) {
      const Vec5 e = Vec5::Unit(k);
      double err[2];
      for (int j = 0; j < 2; ++j) {
        const double h = j ? 5e-4 : 1e-3;
        const double fd = (psi_s(b + h * e) - psi_s(b - h * e)) / (2 * h);
        err[j] = std::abs(fd - L[k]);
      }
      CHECK(err[1] < 1e-4 * (1 + std::abs(L[k])));
      CHECK(err[1] <= err[0] + 1e-8);
    }
  }
}

TEST_CASE("convexity on random pairs") {
  std::mt19937_64 rng(23);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const Vec5 a = random_interior(rng, 0.01), b = random_interior(rng, 0.01);
    const double mid = psi_s(0.5 * (a + b));
    if (mid > 0.5 * psi_s(a) + 0.5 * psi_s(b) + 1e-10) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("psi_s is frame indifferent") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 20; ++t) {
    const Vec5 b = random_interior(rng, 0.02);
    const Mat3 R = random_rotation(rng);
    CHECK(std::abs(psi_s(b) - psi_s(to_coeffs(R * to_matrix(b) * R.transpose()))) < 1e-8);
  }
}

TEST_CASE("ground state") {
  SUBCASE("k0 = 0") {
    auto g = ground_state(0.0);
    CHECK(g.s_star == 0.0);
    CHECK(g.branch == Branch::Isotropic);
    CHECK(g.c5 == doctest::Approx(-std::log(4 * pi)).epsilon(1e-12));
  }
  SUBCASE("k0 = 30") {
    auto g = ground_state(30.0);
    CHECK(g.branch == Branch::Nematic);
    CHECK(g.s_star > 0);
    // Dense scan with the scalar oracle.
    double best = 1e300, sbest = 0;
    for (int i = 0; i <= 2000; ++i) {
      const double s = -0.45 + 1.4 * i / 2000.0;
      const double v = ms_psi(s) - 10.0 * s * s;
      if (v < best) best = v, sbest = s;
    }
    CHECK(std::abs(g.s_star - sbest) < 1.4 / 2000);
    CHECK(g.c5 <= best + 1e-10);
    CHECK(g.c5 > best - 1e-3);

    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 20; ++t) {
      const Vec3 n(nd(rng), nd(rng), nd(rng));
      CHECK(std::abs(psi(g, uniaxial(g.s_star, n))) < 1e-8);
    }
  }
}

TEST_CASE("psi is nonnegative on the closed set") {
  auto g = ground_state(30.0);
  std::mt19937_64 rng(37);
  int negative = 0;
  double min_val = 1e300, dist_at_min = 0;
  for (int t = 0; t < 10000; ++t) {
    const Vec5 b = project_Qbar(random_interior(rng, 0.0), 1e-6);
    const double v = psi(g, b);
    if (v < -1e-10) ++negative;
    if (v < min_val) min_val = v, dist_at_min = dist_to_M(b, g.s_star);
  }
  CHECK(negative == 0);
  // Exact zeros are on M.
  const Vec5 m = uniaxial(g.s_star, Vec3(0.3, -0.4, 0.8));
  CHECK(std::abs(psi(g, m)) < 1e-8);
  CHECK(dist_to_M(m, g.s_star) < 1e-4);
  // Samples of small psi lie near M.
  if (min_val < 1e-6) CHECK(dist_at_min < 1e-2);
}

TEST_CASE("project_Qbar") {
  const Vec5 inside = diag_coeffs(0.1, 0.2, -0.3);
  CHECK(project_Qbar(inside, 1e-6) == inside);
  CHECK(project_Qbar(Vec5(Vec5::Zero()), 0.0).norm() == 0.0);

  const Vec5 p = project_Qbar(diag_coeffs(1, -0.5, -0.5), 0.0);
  CHECK((p - diag_coeffs(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0)).norm() < 1e-12);

  // Brute force over the eigenvalue polytope for a diagonal input.
  const Vec3 y(0.9, 0.2, -1.1);
  const Vec5 q = project_Qbar(diag_coeffs(y[0], y[1], y[2]), 0.0);
  double best = 1e300;
  Vec3 xb;
  const int n = 3000;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double a = -1.0 / 3.0 + i / double(n), b = -1.0 / 3.0 + j / double(n), c = -a - b;
      if (c < -1.0 / 3.0 || c > 2.0 / 3.0) continue;
      const double d = (Vec3(a, b, c) - y).squaredNorm();
      if (d < best) best = d, xb = Vec3(a, b, c);
    }
  CHECK((q - diag_coeffs(xb[0], xb[1], xb[2])).norm() < 2e-3);

  // Idempotent, and never further than any feasible point.
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Vec5 r;
    for (int k = 0; k < 5; ++k) r[k] = nd(rng);
    const Vec5 a = project_Qbar(r, 1e-3);
    CHECK((project_Qbar(a, 1e-3) - a).norm() < 1e-12);
    const Vec5 f = random_interior(rng, 1e-3);
    CHECK((r - a).norm() <= (r - f).norm() + 1e-12);
    // Variational inequality of the projection.
    CHECK((r - a).dot(f - a) <= 1e-10);
  }
}

TEST_CASE("dist_to_M") {
  const double s = 0.6;
  CHECK(dist_to_M(uniaxial(s, Vec3(1, 1, 0)), s) < 1e-14);
  CHECK(dist_to_M(Vec5::Zero(), s) == doctest::Approx(s * std::sqrt(2.0 / 3.0)).epsilon(1e-14));

  const Vec5 b = diag_coeffs(0.2, 0.1, -0.3);
  double best = 1e300;
  const int nt = 400, np = 800;
  for (int i = 0; i <= nt; ++i)
    for (int j = 0; j < np; ++j) {
      const double th = pi * i / nt, ph = 2 * pi * j / np;
      const Vec3 n(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      best = std::min(best, (b - uniaxial(s, n)).norm());
    }
  CHECK(std::abs(dist_to_M(b, s) - best) < 1e-4);
}
