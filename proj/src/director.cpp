#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfof/error.hpp"
#include "mfof/minimize.hpp"
#include "mfof/parallel.hpp"

namespace mfof {
namespace {

// Per-cell density and its partials in n(x) and D(a, g) = (n(x + e_g) - n(x))_a / h.
struct Cell {
  double f;
  Vec3 dn;
  Mat3 dD;
};

Cell density(const Vec3& n, const Mat3& D, double k, double a1, double a2, double a3) {
  const double div = D.trace();
  const Vec3 c(D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1));
  const double t = n.dot(c);
  const double nn = n.squaredNorm(), cc = c.squaredNorm();
  const double bend = nn * cc - t * t;  // |n x c|^2
  Cell out;
  out.f = k * D.squaredNorm() + a1 * div * div + a2 * t * t + a3 * bend;
  // d/dc and d/dn of the twist and bend parts.
  const Vec3 dc = 2 * a2 * t * n + a3 * (2 * nn * c - 2 * t * n);
  out.dn = 2 * a2 * t * c + a3 * (2 * cc * n - 2 * t * c);
  out.dD = 2 * k * D + 2 * a1 * div * Mat3::Identity();
  out.dD(2, 1) += dc[0], out.dD(1, 2) -= dc[0];
  out.dD(0, 2) += dc[1], out.dD(2, 0) -= dc[1];
  out.dD(1, 0) += dc[2], out.dD(0, 1) -= dc[2];
  return out;
}

}  // namespace

double frank_energy(const std::vector<Vec3>& n, const TorusGrid& G, const ElasticCoefficients& c,
                    std::vector<Vec3>* grad) {
  if (n.size() != G.size()) throw DomainError("frank_energy: size mismatch");
  const double s = c.s_star_scaling_applied ? c.s_star : 1.0;
  const double k = (2 * c.L1 + c.L3) * s * s;
  const double a1 = c.K1 - k, a2 = c.K2 - k, a3 = c.K3 - k;
  const double h = G.h, w = 0.25 * G.cell_volume();
  const std::size_t M = G.size();
  if (grad) grad->assign(M, Vec3::Zero());
  std::vector<Vec3> gself(grad ? M : 0, Vec3::Zero());
  std::vector<Mat3> gD(grad ? M : 0);
  std::vector<double> part(M);
  parallel_for(M, 0, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t x = lo; x < hi; ++x) {
      int i, j, l;
      G.coords(x, i, j, l);
      Mat3 D;
      D.col(0) = (n[G.wrap_index(i + 1, j, l)] - n[x]) / h;
      D.col(1) = (n[G.wrap_index(i, j + 1, l)] - n[x]) / h;
      D.col(2) = (n[G.wrap_index(i, j, l + 1)] - n[x]) / h;
      const Cell cl = density(n[x], D, k, a1, a2, a3);
      part[x] = cl.f;
      if (grad) {
        gself[x] = cl.dn - (cl.dD.col(0) + cl.dD.col(1) + cl.dD.col(2)) / h;
        gD[x] = cl.dD / h;
      }
    }
  });
  double E = 0;
  for (double v : part) E += v;
  if (grad) {
    for (std::size_t x = 0; x < M; ++x) {
      int i, j, l;
      G.coords(x, i, j, l);
      Vec3 g = gself[x];
      g += gD[G.wrap_index(i - 1, j, l)].col(0);
      g += gD[G.wrap_index(i, j - 1, l)].col(1);
      g += gD[G.wrap_index(i, j, l - 1)].col(2);
      (*grad)[x] = w * g;
    }
  }
  return w * E;
}

DirectorResult minimize_director(const std::vector<Vec3>& boundary, const std::vector<char>& free,
                                 const TorusGrid& G, const ElasticCoefficients& c, const MinimizeOptions& opts) {
  opts.check();
  const std::size_t M = G.size();
  if (boundary.size() != M || free.size() != M) throw DomainError("minimize_director: size mismatch");
  DirectorResult res;
  res.n = boundary;
  for (std::size_t i = 0; i < M; ++i) {
    const double r = res.n[i].norm();
    if (std::abs(r - 1) > 1e-8) throw DomainError("minimize_director: boundary director not unit length");
  }
  auto renormalize = [&](std::vector<Vec3>& v) {
    for (std::size_t i = 0; i < M; ++i) {
      if (!free[i]) continue;
      const double r = v[i].norm();
      if (r < 1e-8) {
        int a, b, d;
        G.coords(i, a, b, d);
        std::ostringstream os;
        os << "minimize_director: degenerate director at (" << a << "," << b << "," << d << ")";
        throw NumericalError(os.str());
      }
      v[i] /= r;
    }
  };
  // Tangential part of the gradient on free nodes.
  auto tangent = [&](const std::vector<Vec3>& n, std::vector<Vec3>& g) {
    double s = 0;
    for (std::size_t i = 0; i < M; ++i) {
      if (!free[i]) {
        g[i].setZero();
        continue;
      }
      g[i] -= g[i].dot(n[i]) * n[i];
      s += g[i].squaredNorm();
    }
    return std::sqrt(s / G.cell_volume());
  };

  std::vector<Vec3> g, gt, trial(M);
  double E = frank_energy(res.n, G, c, &g);
  double gn = tangent(res.n, g);
  double step = opts.step0;
  res.trace.push_back({0, E, gn, 0.0});
  for (int it = 1; it <= opts.max_iters; ++it) {
    if (gn < opts.grad_tol) {
      res.converged = true;
      break;
    }
    double a = std::clamp(step, opts.min_step, opts.max_step);
    if (a * gn * gn * G.cell_volume() < opts.roundoff * std::max(1.0, std::abs(E))) {
      res.converged = true;
      break;
    }
    double Et;
    while (true) {
      for (std::size_t i = 0; i < M; ++i) trial[i] = free[i] ? Vec3(res.n[i] - a * g[i]) : res.n[i];
      renormalize(trial);
      double dec = 0;
      for (std::size_t i = 0; i < M; ++i)
        if (free[i]) dec += g[i].dot(res.n[i] - trial[i]);
      Et = frank_energy(trial, G, c);
      if (dec > 0 && Et <= E - opts.armijo * dec) break;
      a *= opts.backtrack;
      if (a < opts.min_step) {
        std::ostringstream os;
        os << "minimize_director: line search stalled at iteration " << it << ", energy " << E
           << ", gradient norm " << gn;
        throw NumericalError(os.str());
      }
    }
    frank_energy(trial, G, c, &gt);
    const double gnt = tangent(trial, gt);
    double ss = 0, sy = 0;
    for (std::size_t i = 0; i < M; ++i) {
      if (!free[i]) continue;
      const Vec3 s = trial[i] - res.n[i];
      ss += s.squaredNorm();
      sy += s.dot(gt[i] - g[i]);
    }
    step = sy > 0 ? ss / sy : 2 * a;
    std::swap(res.n, trial);
    std::swap(g, gt);
    E = Et;
    gn = gnt;
    res.iterations = it;
    res.trace.push_back({it, E, gn, a});
  }
  if (gn < opts.grad_tol) res.converged = true;
  res.energy = E;
  return res;
}

DirectorResult minimize_director(const std::vector<Vec3>& boundary, const DomainMask& mask,
                                 const ElasticCoefficients& c, const MinimizeOptions& opts) {
  std::vector<char> free(mask.labels.size());
  for (std::size_t i = 0; i < free.size(); ++i) free[i] = mask.interior(i);
  return minimize_director(boundary, free, mask.grid, c, opts);
}

}  // namespace mfof
