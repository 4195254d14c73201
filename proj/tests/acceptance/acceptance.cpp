// Acceptance run: one PASS/FAIL line per criterion A1..A12. Exit status 1 if any criterion fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mfof/energy.hpp"
#include "mfof/estat.hpp"
#include "mfof/minimize.hpp"
#include "mfof/reference_values.hpp"
#include "mfof/remainders.hpp"

using namespace mfof;
namespace {

constexpr double pi = std::numbers::pi;
const KernelSpec kUnit = KernelSpec::inverse_power(1, 1, 1, 6.0, 0.1);
// c = 0.0013 puts k0 near 8, a nematic bulk with s* about 0.67.
const KernelSpec kWeak = KernelSpec::inverse_power(0.0013, 0.0013, 0.0013, 6.0, 0.1);

Vec3 twist(const Vec3& x) { return Vec3(std::cos(x[2]), std::sin(x[2]), 0); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome a1() {
  const auto t0 = std::chrono::steady_clock::now();
  const MomentTable m = moments(kUnit);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double got[6] = {m.G1_100, m.G2_110, m.G2_200, m.G3_111, m.G3_210, m.G3_300};
  const double exact[6] = {40 * pi / 3, 8 * pi / 3, 8 * pi, 8 * pi / 21, 8 * pi / 7, 40 * pi / 7};
  const auto& R = reference::kMomentValues;
  const double ref[6] = {R.G1_100, R.G2_110, R.G2_200, R.G3_111, R.G3_210, R.G3_300};
  double e_exact = 0, e_ref = 0;
  for (int i = 0; i < 6; ++i) {
    e_exact = std::max(e_exact, rel(got[i], exact[i]));
    e_ref = std::max(e_ref, rel(got[i], ref[i]));
  }
  return {e_exact < 1e-3 && e_ref < 0.02 && secs < 1.0,
          fmt("max rel vs analytic %.2e (< 1e-3), vs tabulated %.4f (< 0.02), %.3f s (< 1 s)", e_exact, e_ref, secs)};
}

Outcome a2() {
  const ElasticCoefficients u = elastic_tensor(kUnit, {}, -1.0);
  const double ratio = std::abs(u.K1 - u.K2) / u.K1;
  bool ok = std::abs(ratio - 0.2) <= 0.01 && u.K3 == u.K1;
  double worst = 0;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<std::array<double, 3>> cs = {{1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}, {1, 0.2, 0.2}};
  for (int t = 0; t < 20; ++t) cs.push_back({1, U(rng), U(rng)});
  for (const auto& c : cs) {
    const ElasticCoefficients e = elastic_tensor(KernelSpec::inverse_power(c[0], c[1], c[2]), {}, -1.0);
    worst = std::max(worst, std::abs(e.K1 - e.K2) / e.K1);
    ok = ok && e.K3 == e.K1;
  }
  ok = ok && worst <= 0.3;
  return {ok, fmt("unit ratio %.4f (0.200 +- 0.01), max over %zu c1-dominant sets %.4f (<= 0.3), K3 == K1 exactly",
                  ratio, cs.size(), worst)};
}

Outcome a3() {
  const MomentTable m = moments(kUnit);
  const double exact[3] = {4000 * pi / 3, 4000 * pi / 9, 1600 * pi / 9};
  double e = 0;
  for (int i = 0; i < 3; ++i) e = std::max(e, rel(m.k0_components[i], exact[i]));
  const auto& R = reference::kK0Components;
  return {e < 1e-3, fmt("max rel vs analytic %.2e (< 1e-3); tabulated deviations %+.2f%% %+.2f%%, third %+.2f%% with "
                        "the 2/3 factor and %+.2f%% without [OPEN, not scored]",
                        e, 100 * (m.k0_components[0] / R[0] - 1), 100 * (m.k0_components[1] / R[1] - 1),
                        100 * (m.k0_components[2] / R[2] - 1), 100 * (m.k0_third_without_factor / R[2] - 1))};
}

Outcome a4() {
  const double r1 = std::abs(odd_moment_check(RadialProfile::inverse_power(1, 6, 0.1, 1.0)));
  const double r2 = std::abs(odd_moment_check(RadialProfile::table({0.5, 1.0, 2.0}, {1.0, 3.0, 0.5})));
  return {r1 < 1e-10 && r2 < 1e-10, fmt("residuals %.2e (truncated power), %.2e (table) (< 1e-10)", r1, r2)};
}

Outcome a5() {
  const double d = frame_check(kUnit, {}, 100);
  return {d < 1e-6, fmt("max rel deviation over 100 rotations %.2e (< 1e-6)", d)};
}

Outcome a6() {
  const double p0 = psi_s(Vec5::Zero());
  const double e0 = std::abs(p0 + std::log(4 * pi));
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> U(0, 1);
  double trip = 0;
  for (int t = 0; t < 100; ++t) {
    Vec5 L;
    for (int k = 0; k < 5; ++k) L[k] = nd(rng);
    L *= 10 * U(rng) / L.norm();
    trip = std::max(trip, (solve_lambda(partition(L).mean).lambda - L).norm());
  }
  auto interior = [&]() {
    while (true) {
      Vec5 b;
      for (int k = 0; k < 5; ++k) b[k] = 0.3 * nd(rng);
      if (in_open_Q(b, 0.01)) return b;
    }
  };
  int viol = 0;
  for (int t = 0; t < 1000; ++t) {
    const Vec5 a = interior(), b = interior();
    if (psi_s(0.5 * (a + b)) > 0.5 * psi_s(a) + 0.5 * psi_s(b) + 1e-10) ++viol;
  }
  // Blow-up probe on the uniaxial ray s (n n - I/3), s_max = 1: strictly increasing, and above
  // psi_s(0) + 10 before s = 0.995 s_max.
  bool increasing = true;
  double prev = p0;
  for (int i = 1; i <= 199; ++i) {
    const double v = psi_s(uniaxial(0.005 * i, Vec3(0, 0, 1)));
    increasing = increasing && v > prev;
    prev = v;
  }
  const double at_995 = psi_s(uniaxial(0.995, Vec3(0, 0, 1)));
  const bool blow = increasing && at_995 > p0 + 10;
  // Where the threshold is actually crossed (information only).
  double lo = 0.995, hi = 1 - 1e-12;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi_s(uniaxial(mid, Vec3(0, 0, 1))) > p0 + 10 ? hi : lo) = mid;
  }
  return {e0 < 1e-8 && trip < 1e-6 && viol == 0 && blow,
          fmt("|psi_s(0)+ln 4pi| %.1e (< 1e-8), round trip %.1e (< 1e-6), convexity violations %d/1000, blow-up %s "
              "(increasing %s; psi_s(0.995) = %.3f vs psi_s(0) + 10 = %.3f, crossed only at s = %.6f)",
              e0, trip, viol, blow ? "ok" : "FAILED", increasing ? "yes" : "no", at_995, p0 + 10, hi)};
}

Outcome a7() {
  const TorusGrid G = TorusGrid::make(16);
  const BulkData bulk = ground_state(moments(kWeak).k0);
  const PeriodizedKernelGrid kg = build_periodized_kernel(kWeak, G, 0.8);
  EnergyModel m(kg, bulk);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  OrderField b = director_to_field(twist, bulk.s_star, G);
  for (auto& v : b.values) {
    Vec5 z;
    for (int k = 0; k < 5; ++k) z[k] = 0.02 * U(rng);
    v = project_Qbar(Vec5(v + z), 1e-3);
  }
  OrderField g;
  m.energy_and_gradient(b, g);
  const double t = 1e-5;
  double worst = 0;
  for (int d = 0; d < 20; ++d) {
    OrderField v(G), bp = b, bm = b;
    double dir = 0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      for (int k = 0; k < 5; ++k) v[i][k] = U(rng);
      bp[i] += t * v[i];
      bm[i] -= t * v[i];
      dir += g[i].dot(v[i]);
    }
    const double fd = (m.energy(bp).total - m.energy(bm).total) / (2 * t);
    worst = std::max(worst, std::abs(fd - dir) / std::abs(dir));
  }
  double bil = 0;
  for (int N : {8, 12}) {
    const TorusGrid H = TorusGrid::make(N);
    const PeriodizedKernelGrid kh = build_periodized_kernel(kUnit, H, 1.0);
    EnergyModel mh(kh, bulk);
    OrderField c = director_to_field(twist, 0.6, H);
    for (auto& v : c.values)
      for (int k = 0; k < 5; ++k) v[k] += 0.05 * U(rng);
    bil = std::max(bil, rel(mh.bilinear(c), bilinear_direct(c, kh)));
  }
  return {worst < 1e-5 && bil < 1e-10,
          fmt("gradient vs central FD over 20 directions (N=16): max rel %.2e (< 1e-5); transform vs double sum "
              "(N=8,12): %.2e (< 1e-10)",
              worst, bil)};
}

Outcome a8() {
  const ElasticCoefficients c = elastic_tensor(kUnit, {}, 1.0);
  const TorusGrid G = TorusGrid::make(64);
  const double s = 0.6;
  const double limit = 0.25 * c.K2 * s * s * std::pow(2 * pi, 3);
  const auto rows = bilinear_vs_limit(director_to_field(twist, s, G), kUnit, c, limit, {0.8, 0.4, 0.2});
  const bool dec = rows[1].rel_error < rows[0].rel_error && rows[2].rel_error < rows[1].rel_error;
  return {dec && rows[2].rel_error < 0.05,
          fmt("twist N=64, rel errors %.4f %.4f %.4f at eps 0.8 0.4 0.2 (strictly decreasing, final < 0.05)",
              rows[0].rel_error, rows[1].rel_error, rows[2].rel_error)};
}

SweepConfig sweep_config(const DirectorFn& n) {
  SweepConfig cfg;
  cfg.spec = kWeak;
  cfg.geometry = Geometry::ball(Vec3::Constant(pi), 2.0);
  cfg.director = n;
  cfg.ladder = {0.4, 0.2, 0.1};
  cfg.grids = {64};
  cfg.minimize.grad_tol = 1e-5;
  cfg.minimize.max_iters = 400;
  cfg.director_opts.grad_tol = 1e-8;
  cfg.director_opts.max_iters = 5000;
  return cfg;
}

const SweepResult& twist_sweep() {
  static const SweepResult r = sweep_gamma(sweep_config(twist));
  return r;
}

Outcome a9() {
  const SweepResult& r = twist_sweep();
  std::string d;
  for (const auto& w : r.rows) d += fmt("%.4g@%.2g ", w.max_dist_M, w.epsilon);
  const double last = r.rows.empty() ? INFINITY : r.rows.back().max_dist_M;
  const bool ok = r.rows.size() == 3 && r.dist_decreasing && last < 0.05 * r.bulk.s_star;
  return {ok, fmt("max interior dist_to_M %s(strictly decreasing, final < 0.05 s* = %.4f)", d.c_str(),
                  0.05 * r.bulk.s_star)};
}

Outcome a10() {
  const TorusGrid G = TorusGrid::make(32);
  const double h = G.h;
  const DomainMask box = build_mask(Geometry::box(Vec3::Constant(7.5 * h), Vec3::Constant(23.5 * h)), 0.2, {}, G);
  ElectrostaticConfig cfg;
  cfg.phi0 = parse_phi0("linear:1,0,0");
  const EstatResult r = estat_solve(OrderField(G), box, cfg);
  double err = 0;
  for (std::size_t i = 0; i < G.size(); ++i)
    if (box.in_omega(i)) err = std::max(err, std::abs(r.phi[i] - cfg.phi0(G.point(i))));
  const double dE = std::abs(r.E + 0.5 * std::pow(16 * h, 3));

  ElectrostaticConfig var;
  var.A_aniso = 0.8;
  var.phi0 = parse_phi0("product");
  std::vector<double> E;
  for (int N : {32, 64, 128}) {
    const TorusGrid H = TorusGrid::make(N);
    const DomainMask m = build_mask(Geometry::box(Vec3::Constant(pi / 2), Vec3::Constant(3 * pi / 2)), 0.2, {}, H);
    E.push_back(estat_solve(director_to_field(twist, 0.6, H), m, var).E);
  }
  const double ratio = (E[0] - E[1]) / (E[1] - E[2]);
  const bool ok = r.residual < 1e-10 && err < 1e-10 && dE < 1e-8 && ratio > 4 / 1.5 && ratio < 4 * 1.5;
  return {ok, fmt("A=I linear data: residual %.1e, max |phi - phi0| %.1e (< 1e-10), |E + |Omega|/2| %.1e (< 1e-8); "
                  "variable A Richardson ratio (E32-E64)/(E64-E128) = %.3f (in [2.67, 6])",
                  r.residual, err, dE, ratio)};
}

Outcome a11() {
  const TorusGrid G = TorusGrid::make(64);
  const Geometry ball = Geometry::ball(Vec3::Constant(pi), 2.0);
  const OrderField b = director_to_field(twist, 0.6, G);
  const RemainderLadder L = remainder_ladder(b, ball, kUnit, {0.4, 0.2, 0.1}, 0.0);
  const double need = 0.8 * L.predicted;
  const RemainderLadder C = remainder_ladder(OrderField(G, b[0]), ball, kUnit, {0.2}, 0.0);
  const bool zero = C.rows[0].R2 == 0.0 && C.rows[0].R3 == 0.0;
  return {L.slope_R1 >= need && L.slope_R3 >= need && zero,
          fmt("slopes R1 %.3f, R3 %.3f (>= %.3f), R2 %.3f; constant field R2 = %g, R3 = %g (exactly 0)", L.slope_R1,
              L.slope_R3, need, L.slope_R2, C.rows[0].R2, C.rows[0].R3)};
}

Outcome a12() {
  const SweepResult& r = twist_sweep();
  std::string d;
  for (const auto& w : r.rows) d += fmt("%.4f@%.2g ", w.rel_error, w.epsilon);
  const double last = r.rows.empty() ? INFINITY : r.rows.back().rel_error;
  const bool twist_ok = r.rows.size() == 3 && r.error_decreasing && last < 0.10;

  SweepConfig cc = sweep_config([](const Vec3&) { return Vec3(0, 0, 1); });
  const SweepResult c = sweep_gamma(cc);
  double worst = 0;
  for (const auto& w : c.rows) worst = std::max(worst, std::abs(w.energy));
  const bool const_ok = c.rows.size() == 3 && worst < 1e-6;
  return {twist_ok && const_ok,
          fmt("twist rel error vs limit %.5f: %s(monotone, final < 0.10); constant data max |E| %.1e over %zu rungs "
              "(< 1e-6)",
              r.rows.empty() ? 0.0 : r.rows[0].gamma_energy, d.c_str(), worst, c.rows.size())};
}

}  // namespace

int main(int argc, char** argv) {
  // Arguments name criteria to run (default all); "--expect-fail X" marks a criterion recorded as
  // unattainable: its FAIL line is still printed, and the exit status only tracks the others.
  std::vector<std::string> only, expected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc)
      expected.push_back(argv[++i]);
    else
      only.push_back(a);
  }
  auto is_expected = [&](const std::string& n) { return std::find(expected.begin(), expected.end(), n) != expected.end(); };
  int unexpected = 0;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> items = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},  {"A5", a5},   {"A6", a6},
      {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A11", a11}, {"A12", a12}};
  int failed = 0;
  int run = 0;
  for (const auto& [name, fn] : items) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++run;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s %s  %s  [%.1f s]\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
    if (o.pass == is_expected(name)) {
      ++unexpected;
      if (o.pass) std::printf("%-4s passed although listed as an expected failure\n", name);
    }
  }
  std::printf("%d/%d criteria passed\n", run - failed, run);
  if (!expected.empty()) std::printf("%d unexpected outcome(s)\n", unexpected);
  return (expected.empty() ? failed : unexpected) ? 1 : 0;
}
