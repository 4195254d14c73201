#include "mfof/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "mfof/error.hpp"
#include "mfof/quadrature.hpp"
#include "mfof/simd.hpp"

namespace mfof {

namespace {

constexpr double kPi = std::numbers::pi;

struct PhiTable {
  std::vector<double> c2, s2;
};

const PhiTable& phi_table(int M) {
  thread_local std::map<int, PhiTable> cache;
  auto it = cache.find(M);
  if (it != cache.end()) return it->second;
  PhiTable t;
  t.c2.resize(M);
  t.s2.resize(M);
  for (int j = 0; j < M; ++j) {
    const double ph = kPi * j / M;
    t.c2[j] = std::cos(ph) * std::cos(ph);
    t.s2[j] = std::sin(ph) * std::sin(ph);
  }
  return cache.emplace(M, std::move(t)).first->second;
}

// Rule in w = 1 - t on [0, 1]; graded towards w = 0 when the polar peak is sharp.
const Rule1D& w_rule(double amax, int floor_nodes) {
  thread_local std::map<std::pair<int, int>, Rule1D> cache;
  int level = 0;
  if (amax > 4.0) level = static_cast<int>(std::ceil(std::log2(amax / 4.0)));
  auto key = std::make_pair(level, floor_nodes);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Rule1D r;
  if (level == 0) {
    r = gauss_legendre(floor_nodes, 0.0, 1.0);
  } else {
    // Breakpoints 4/a', 8/a', ... with a' = 4 * 2^level >= amax.
    const double w1 = std::ldexp(1.0, -level);
    std::vector<double> br{0.0};
    for (double w = w1; w < 1.0; w *= 2.0) br.push_back(w);
    br.push_back(1.0);
    r = gauss_panels(br, std::max(20, floor_nodes / 2));
  }
  return cache.emplace(key, std::move(r)).first->second;
}

int phi_count(double beta, int floor_m) {
  int m = 16 + static_cast<int>(std::ceil(9.0 * std::sqrt(beta)));
  m = std::max(m, floor_m);
  return (m + 3) / 4 * 4;
}

Mat5 frame_covariance(const Mat3& V, const FrameMoments& fm) {
  const auto& E = sym0_basis();
  std::array<Mat3, 5> F;
  Vec5 mean;
  for (int k = 0; k < 5; ++k) {
    F[k] = V.transpose() * E[k] * V;
    mean[k] = F[k].diagonal().dot(fm.m2);
  }
  Mat5 C;
  for (int k = 0; k < 5; ++k) {
    for (int l = k; l < 5; ++l) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        s += F[k](i, i) * F[l](i, i) * fm.m4(i, i);
        for (int j = 0; j < 3; ++j) {
          if (j == i) continue;
          s += (F[k](i, i) * F[l](j, j) + 2.0 * F[k](i, j) * F[l](i, j)) * fm.m4(i, j);
        }
      }
      C(k, l) = C(l, k) = s - mean[k] * mean[l];
    }
  }
  return C;
}

Vec5 frame_to_coeffs(const Mat3& V, const Vec3& diag) {
  return to_coeffs(V * diag.asDiagonal() * V.transpose());
}

const Vec3 kD1 = Vec3(1.0, -1.0, 0.0) / std::sqrt(2.0);
const Vec3 kD2 = Vec3(-1.0, -1.0, 2.0) / std::sqrt(6.0);

}  // namespace

FrameMoments frame_moments(const Vec3& lam, const SphereQuadSpec& quad) {
  int a = 0;
  for (int i = 1; i < 3; ++i)
    if (lam[i] > lam[a]) a = i;
  const int b = (a + 1) % 3, c = (a + 2) % 3;
  const double ab = lam[a] - lam[b], ac = lam[a] - lam[c];
  const double amax = std::max(ab, ac);
  const Rule1D& wr = w_rule(amax, std::max(16, quad.n_theta / 2));
  const int M = phi_count(0.5 * std::abs(ab - ac), quad.n_phi / 2);
  const PhiTable& pt = phi_table(M);

  double Z = 0, Paa = 0, Pbb = 0, Pcc = 0, Qaa = 0, Qbb = 0, Qcc = 0, Qab = 0, Qac = 0, Qbc = 0;
  for (size_t i = 0; i < wr.x.size(); ++i) {
    const double w = wr.x[i], t = 1.0 - w, u = w * (2.0 - w), wt = wr.w[i];
    const simd::ExpMoments e = simd::exp_moments(pt.c2.data(), pt.s2.data(), M, -u * ab, -u * ac);
    const double t2 = t * t;
    Z += wt * e.s0;
    Paa += wt * t2 * e.s0;
    Pbb += wt * u * e.sc;
    Pcc += wt * u * e.ss;
    Qaa += wt * t2 * t2 * e.s0;
    Qbb += wt * u * u * e.scc;
    Qcc += wt * u * u * e.sss;
    Qab += wt * t2 * u * e.sc;
    Qac += wt * t2 * u * e.ss;
    Qbc += wt * u * u * e.scs;
  }
  FrameMoments fm;
  fm.log_z = lam[a] + std::log(4.0 * kPi / M * Z);
  fm.m2[a] = Paa / Z;
  fm.m2[b] = Pbb / Z;
  fm.m2[c] = Pcc / Z;
  fm.m4(a, a) = Qaa / Z;
  fm.m4(b, b) = Qbb / Z;
  fm.m4(c, c) = Qcc / Z;
  fm.m4(a, b) = fm.m4(b, a) = Qab / Z;
  fm.m4(a, c) = fm.m4(c, a) = Qac / Z;
  fm.m4(b, c) = fm.m4(c, b) = Qbc / Z;
  return fm;
}

PartitionResult partition(const Multiplier& lambda, const SphereQuadSpec& quad) {
  const SymEigen es = sym_eigen(to_matrix(lambda));
  const FrameMoments fm = frame_moments(es.values, quad);
  PartitionResult r;
  r.logZ = fm.log_z;
  r.mean = frame_to_coeffs(es.vectors, fm.m2 - Vec3::Constant(1.0 / 3.0));
  r.covariance = frame_covariance(es.vectors, fm);
  return r;
}

bool in_open_Q(const QTensor& b, double margin) {
  const Vec3 ev = sym_eigen(to_matrix(b)).values;
  return ev[0] > -1.0 / 3.0 + margin && ev[2] < 2.0 / 3.0 - margin;
}

LambdaSolution solve_lambda(const QTensor& b, const MaxEntOptions& opts, const Multiplier* warm,
                            bool want_covariance) {
  const SymEigen es = sym_eigen(to_matrix(b));
  const Vec3& beta = es.values;
  if (!(beta[0] > -1.0 / 3.0) || !(beta[2] < 2.0 / 3.0) || !b.allFinite())
    throw DomainError("order parameter outside the open moment set");
  const Vec3 q = beta + Vec3::Constant(1.0 / 3.0);  // target <q_i^2>
  const Eigen::Vector2d y(kD1.dot(q), kD2.dot(q));

  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  if (warm) {
    const Mat3 W = to_matrix(*warm);
    Vec3 lw;
    for (int i = 0; i < 3; ++i) lw[i] = es.vectors.col(i).dot(W * es.vectors.col(i));
    x = Eigen::Vector2d(kD1.dot(lw), kD2.dot(lw));
  }
  auto lam_of = [](const Eigen::Vector2d& v) -> Vec3 { return v[0] * kD1 + v[1] * kD2; };

  FrameMoments fm = frame_moments(lam_of(x), opts.quad);
  double f = fm.log_z - x.dot(y);
  if (warm) {
    // A far-away warm start (e.g. from a node near the boundary of Q) can cost far more
    // damped Newton steps than the cold start; keep whichever has the lower dual value.
    const FrameMoments f0 = frame_moments(Vec3::Zero(), opts.quad);
    if (f0.log_z < f) {
      x.setZero();
      fm = f0;
      f = f0.log_z;
    }
  }
  auto resid = [&](const FrameMoments& f) -> Eigen::Vector2d { return Eigen::Vector2d(kD1.dot(f.m2), kD2.dot(f.m2)) - y; };
  Eigen::Vector2d r = resid(fm);
  int it = 0;
  while (r.norm() > opts.tol) {
    if (++it > opts.max_iter)
      throw NumericalError("solve_lambda: no convergence, residual " + std::to_string(r.norm()));
    Eigen::Matrix2d J;
    for (int k = 0; k < 2; ++k) {
      const Vec3& dk = k == 0 ? kD1 : kD2;
      for (int l = 0; l < 2; ++l) {
        const Vec3& dl = l == 0 ? kD1 : kD2;
        double s = 0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) s += dk[i] * dl[j] * (fm.m4(i, j) - fm.m2[i] * fm.m2[j]);
        J(k, l) = s;
      }
    }
    const Eigen::Vector2d step = -J.ldlt().solve(r);
    const double slope = r.dot(step);
    double t = 1.0;
    FrameMoments trial;
    double ft = 0;
    // Below roundoff in f the sufficient-decrease test is meaningless; take the full step.
    const bool noise = -slope < 1e-13 * (1.0 + std::abs(f));
    for (int ls = 0; ls < 60; ++ls) {
      trial = frame_moments(lam_of(x + t * step), opts.quad);
      ft = trial.log_z - (x + t * step).dot(y);
      if (noise || ft <= f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    x += t * step;
    fm = trial;
    f = ft;
    r = resid(fm);
  }

  const Vec3 lam = lam_of(x);
  LambdaSolution sol;
  sol.lambda = frame_to_coeffs(es.vectors, lam);
  sol.logZ = fm.log_z;
  sol.psi_s = lam.dot(beta) - fm.log_z;
  sol.iterations = it;
  sol.residual = r.norm();
  if (want_covariance)
    sol.covariance = frame_covariance(es.vectors, fm);
  else
    sol.covariance.setZero();
  return sol;
}

double psi_s(const QTensor& b, const MaxEntOptions& opts) { return solve_lambda(b, opts, nullptr, false).psi_s; }

QTensor uniaxial(double s, const Vec3& n) {
  const Vec3 u = n.normalized();
  return to_coeffs(s * (u * u.transpose() - Mat3::Identity() / 3.0));
}

BulkData ground_state(double k0, const MaxEntOptions& opts, double delta) {
  if (!std::isfinite(k0)) throw DomainError("k0 must be finite");
  const Vec3 e3(0, 0, 1);
  const QTensor D = uniaxial(1.0, e3);
  auto phi = [&](double s, LambdaSolution* out, const Multiplier* warm) {
    LambdaSolution sol = solve_lambda(s * D, opts, warm, out != nullptr);
    const double v = sol.psi_s - (k0 / 3.0) * s * s;
    if (out) *out = sol;
    return v;
  };

  const double lo = -0.5 + std::max(delta, 1e-3);
  std::vector<double> grid;
  for (int i = 0; i < 150; ++i) grid.push_back(lo + (0.98 - lo) * i / 149.0);
  for (int k = 1; k <= 24; ++k) {
    const double s = 1.0 - 0.02 * std::ldexp(1.0, -k);
    if (s < 1.0 - delta) grid.push_back(s);
  }
  std::vector<double> vals(grid.size());
  Multiplier warm = Multiplier::Zero();
  for (size_t i = 0; i < grid.size(); ++i) {
    LambdaSolution sol = solve_lambda(grid[i] * D, opts, &warm, false);
    warm = sol.lambda;
    vals[i] = sol.psi_s - (k0 / 3.0) * grid[i] * grid[i];
  }
  const size_t im = std::min_element(vals.begin(), vals.end()) - vals.begin();
  double a = grid[im > 0 ? im - 1 : 0], c = grid[std::min(im + 1, grid.size() - 1)];

  // Golden section inside the bracket, then Newton on phi'(s) = Lambda.D - (2/3) k0 s.
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = c - g * (c - a), x2 = a + g * (c - a);
  double f1 = phi(x1, nullptr, nullptr), f2 = phi(x2, nullptr, nullptr);
  for (int it = 0; it < 60 && c - a > 1e-7; ++it) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - g * (c - a);
      f1 = phi(x1, nullptr, nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (c - a);
      f2 = phi(x2, nullptr, nullptr);
    }
  }
  double s = f1 < f2 ? x1 : x2;
  const double a0 = grid[im > 0 ? im - 1 : 0], c0 = grid[std::min(im + 1, grid.size() - 1)];
  LambdaSolution sol;
  for (int it = 0; it < 30; ++it) {
    phi(s, &sol, nullptr);
    const double d1 = sol.lambda.dot(D) - (2.0 / 3.0) * k0 * s;
    const double d2 = D.dot(sol.covariance.ldlt().solve(D)) - (2.0 / 3.0) * k0;
    if (!(d2 > 0)) break;
    const double ns = std::clamp(s - d1 / d2, a0, c0);
    const bool done = std::abs(ns - s) < 1e-15;
    s = ns;
    if (done) break;
  }

  BulkData bd;
  bd.k0 = k0;
  if (std::abs(s) <= 1e-6) s = 0.0;
  bd.s_star = s;
  bd.branch = s > 1e-6 ? Branch::Nematic : Branch::Isotropic;
  bd.c5 = phi(s, nullptr, nullptr);
  bd.psi_at_sstar = 0.0;
  return bd;
}

double psi(const BulkData& bulk, const QTensor& b, const MaxEntOptions& opts) {
  return psi_s(b, opts) - 0.5 * bulk.k0 * b.squaredNorm() - bulk.c5;
}

QTensor project_Qbar(const Mat3& raw, double delta) {
  if (!(delta >= 0.0 && delta < 0.1)) throw DomainError("projection margin must lie in [0, 0.1)");
  Mat3 m = 0.5 * (raw + raw.transpose());
  m -= (m.trace() / 3.0) * Mat3::Identity();
  const double lo = -1.0 / 3.0 + delta, hi = 2.0 / 3.0 - delta;
  const SymEigen es = sym_eigen(m);
  const Vec3& y = es.values;
  if (y[0] >= lo && y[2] <= hi) return to_coeffs(m);

  auto g = [&](double mu) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += std::clamp(y[i] - mu, lo, hi);
    return s;
  };
  double a = y.minCoeff() - hi - 1.0, b = y.maxCoeff() - lo + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    (g(mid) > 0 ? a : b) = mid;
  }
  double mu = 0.5 * (a + b);
  // Exact solve on the active set found by bisection.
  int nfree = 0;
  double sum = 0;
  for (int i = 0; i < 3; ++i) {
    const double v = y[i] - mu;
    if (v <= lo) sum += lo;
    else if (v >= hi) sum += hi;
    else {
      ++nfree;
      sum += y[i];
    }
  }
  if (nfree > 0) mu = sum / nfree;
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = std::clamp(y[i] - mu, lo, hi);
  return frame_to_coeffs(es.vectors, x);
}

QTensor project_Qbar(const QTensor& raw, double delta) {
  const SymEigen es = sym_eigen(to_matrix(raw));
  if (es.values[0] >= -1.0 / 3.0 + delta && es.values[2] <= 2.0 / 3.0 - delta) return raw;
  return project_Qbar(to_matrix(raw), delta);
}

double dist_to_M(const QTensor& b, double s_star) {
  const SymEigen es = sym_eigen(to_matrix(b));
  Vec3 n = es.vectors.col(2);
  // Lexicographic sign convention; the distance does not depend on it.
  for (int i = 0; i < 3; ++i) {
    if (std::abs(n[i]) > 1e-14) {
      if (n[i] < 0) n = -n;
      break;
    }
  }
  return (b - uniaxial(s_star, n)).norm();
}

}  // namespace mfof
