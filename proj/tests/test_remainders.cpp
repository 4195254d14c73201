#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mfof/error.hpp"
#include "mfof/remainders.hpp"

using namespace mfof;
namespace {
constexpr double pi = std::numbers::pi;
const KernelSpec kUnit = KernelSpec::inverse_power(1, 1, 1, 6.0, 0.1);

Vec3 twist(const Vec3& x) { return Vec3(std::cos(x[2]), std::sin(x[2]), 0); }

OrderField noisy(const TorusGrid& G, unsigned seed) {
  OrderField b = director_to_field(twist, 0.6, G);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (auto& v : b.values)
    for (int k = 0; k < 5; ++k) v[k] += u(rng);
  return b;
}

double brute_pair(const OrderField& b, const std::vector<char>& U1, const std::vector<char>& U2,
                  const PeriodizedKernelGrid& kg) {
  const TorusGrid& G = b.grid;
  double s = 0;
  for (std::size_t x = 0; x < G.size(); ++x) {
    if (!U1[x]) continue;
    int i, j, k;
    G.coords(x, i, j, k);
    for (std::size_t y = 0; y < G.size(); ++y) {
      if (!U2[y] || x == y) continue;
      int a, c, d;
      G.coords(y, a, c, d);
      const Vec5 diff = b[x] - b[y];
      s += diff.dot(kg.samples[G.wrap_index(i - a, j - c, k - d)] * diff);
    }
  }
  return std::pow(G.cell_volume(), 2) * s;
}
}  // namespace

TEST_CASE("predicted exponent") {
  CHECK(predicted_remainder_exponent(6.0, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(predicted_remainder_exponent(8.0, 0.5) == doctest::Approx(0.5));
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), DomainError);
}

TEST_CASE("cross form against the double sum") {
  const TorusGrid G = TorusGrid::make(8);
  const PeriodizedKernelGrid kg = build_periodized_kernel(kUnit, G, 1.0);
  const DomainMask mask = build_mask(Geometry::ball(Vec3::Constant(pi), 2.2), 1.0, {}, G);
  std::vector<char> I(G.size()), E(G.size()), all(G.size(), 1);
  for (std::size_t i = 0; i < G.size(); ++i) {
    I[i] = mask.interior(i);
    E[i] = !mask.in_omega(i);
  }
  const OrderField b = noisy(G, 5);
  for (const auto& [U1, U2] : {std::pair{I, E}, std::pair{E, E}, std::pair{all, all}, std::pair{I, all}}) {
    const double ref = brute_pair(b, U1, U2, kg);
    CHECK(cross_form(b, U1, U2, kg) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("constant fields leave no difference remainders") {
  const TorusGrid G = TorusGrid::make(16);
  const DomainMask mask = build_mask(Geometry::ball(Vec3::Constant(pi), 2.0), 0.4, {}, G);
  const PeriodizedKernelGrid kg = build_periodized_kernel(kUnit, G, 0.4);
  const OrderField c(G, director_to_field(twist, 0.6, G)[3]);
  const RemainderReport r = remainders(c, mask, kUnit, kg, 0.0, 6.0);
  CHECK(r.R2 == 0.0);
  CHECK(r.R3 == 0.0);
  CHECK(r.R1 < 0.0);
  CHECK(r.predicted_exponent == doctest::Approx(0.25));
}

TEST_CASE("remainders against direct sums") {
  const TorusGrid G = TorusGrid::make(16);
  const double eps = 0.4;
  const DomainMask mask = build_mask(Geometry::ball(Vec3::Constant(pi), 2.0), eps, {}, G);
  const PeriodizedKernelGrid kg = build_periodized_kernel(kUnit, G, eps);
  const OrderField b = noisy(G, 9);
  const double c5 = -1.5;
  const RemainderReport r = remainders(b, mask, kUnit, kg, c5, 6.0);
  const double h3 = G.cell_volume(), e2 = eps * eps;

  std::vector<char> I(G.size()), C(G.size()), E(G.size());
  for (std::size_t i = 0; i < G.size(); ++i) {
    I[i] = mask.labels[i] == CellLabel::Interior;
    C[i] = mask.labels[i] == CellLabel::Collar;
    E[i] = mask.labels[i] == CellLabel::Exterior;
  }
  CHECK(r.R3 == doctest::Approx(brute_pair(b, E, I, kg) / e2).epsilon(1e-10));
  const double m2 = 2 * brute_pair(b, E, C, kg) + brute_pair(b, E, E, kg);
  CHECK(r.m2 == doctest::Approx(m2).epsilon(1e-10));
  double m1 = 0, r1 = 0;
  for (std::size_t x = 0; x < G.size(); ++x) {
    if (C[x]) m1 += kg.k0 * b[x].squaredNorm();
    if (!I[x]) continue;
    Mat5 T = Mat5::Zero();
    for (std::size_t y = 0; y < G.size(); ++y)
      if (E[y]) {
        int i, j, k, a, c, d;
        G.coords(x, i, j, k);
        G.coords(y, a, c, d);
        T += kg.samples[G.wrap_index(i - a, j - c, k - d)];
      }
    r1 += b[x].dot(T * b[x]);
  }
  CHECK(r.m1 == doctest::Approx(h3 * m1).epsilon(1e-12));
  CHECK(r.R1 == doctest::Approx(-h3 * h3 * r1 / (2 * e2)).epsilon(1e-10));
  CHECK(r.m_eps == doctest::Approx(r.m1 - c5 * h3 * double(mask.n_interior) - m2 / e2).epsilon(1e-10));

  // R2: lattice images k != 0 of the raw kernel over Omega x Omega, unwrapped offsets.
  const int S = std::max(kg.image_shells, 1);
  const double R_eq = (2 * S + 1) * 2 * pi * std::cbrt(3.0 / (4.0 * pi));
  const double tail = isotropic_mass_outside(kUnit, R_eq / eps) / std::pow(2 * pi, 3);
  double r2 = 0;
  for (std::size_t x = 0; x < G.size(); ++x) {
    if (E[x]) continue;
    for (std::size_t y = 0; y < G.size(); ++y) {
      if (E[y] || x == y) continue;
      const Vec3 z = G.point(x) - G.point(y);
      Mat5 D = tail * Mat5::Identity();
      for (int kz = -S; kz <= S; ++kz)
        for (int ky = -S; ky <= S; ++ky)
          for (int kx = -S; kx <= S; ++kx)
            if (kx || ky || kz) D += kernel_matrix(kUnit, (z + 2 * pi * Vec3(kx, ky, kz)) / eps) / (eps * eps * eps);
      const Vec5 diff = b[x] - b[y];
      r2 += diff.dot(D * diff);
    }
  }
  CHECK(r.R2 == doctest::Approx(-h3 * h3 * r2 / e2).epsilon(1e-9));
}

TEST_CASE("remainders decay along an epsilon ladder") {
  const TorusGrid G = TorusGrid::make(32);
  const OrderField b = director_to_field(twist, 0.6, G);
  const RemainderLadder L =
      remainder_ladder(b, Geometry::ball(Vec3::Constant(pi), 2.0), kUnit, {0.8, 0.4, 0.2}, 0.0);
  REQUIRE(L.rows.size() == 3);
  for (std::size_t i = 1; i < L.rows.size(); ++i) {
    CHECK(std::abs(L.rows[i].R1) < std::abs(L.rows[i - 1].R1));
    CHECK(std::abs(L.rows[i].R2) < std::abs(L.rows[i - 1].R2));
    CHECK(std::abs(L.rows[i].R3) < std::abs(L.rows[i - 1].R3));
  }
  CHECK(L.predicted == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(L.slope_R1 >= 0.8 * L.predicted);
  CHECK(L.slope_R3 >= 0.8 * L.predicted);
}
