#include "mfof/estat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfof/error.hpp"
#include "mfof/simd.hpp"

namespace mfof {

double ElectrostaticConfig::min_eigenvalue() const {
  return A_iso + std::min(-A_aniso / 3.0, 2.0 * A_aniso / 3.0);
}

void ElectrostaticConfig::check() const {
  if (!(min_eigenvalue() > 0))
    throw ConfigError("dielectric tensor not positive definite on the moment set (min eigenvalue " +
                      std::to_string(min_eigenvalue()) + ")");
  if (!(cg_tol > 0) || cg_maxiter < 1) throw ConfigError("invalid CG settings");
}

std::function<double(const Vec3&)> parse_phi0(const std::string& s) {
  if (s == "zero") return [](const Vec3&) { return 0.0; };
  if (s == "product") return [](const Vec3& x) { return x[0] * x[2]; };
  if (s.rfind("linear:", 0) == 0) {
    std::stringstream ss(s.substr(7));
    Vec3 a;
    char c1, c2;
    if (!(ss >> a[0] >> c1 >> a[1] >> c2 >> a[2]) || c1 != ',' || c2 != ',')
      throw ConfigError("phi0 linear needs three comma-separated numbers");
    return [a](const Vec3& x) { return a.dot(x); };
  }
  throw ConfigError("unknown phi0 '" + s + "'");
}

namespace {

// Geometry of the two-point flux scheme; independent of b.
struct Scheme {
  const TorusGrid* grid = nullptr;
  std::vector<char> omega;
  // theta[6 i + 2 g + (s > 0)] = distance to the boundary along +-e_g in units of h
  // (only meaningful where the neighbour is outside Omega).
  std::vector<double> theta;

  struct Face {
    std::size_t i, j;
    int axis;
    double w;
  };
  struct Bdry {
    std::size_t i;
    int axis;
    double w, theta;
    double phi0;
  };
  std::vector<Face> faces;
  std::vector<Bdry> bdry;
};

double crossing(const Geometry& g, const Vec3& x, int axis, double sign) {
  if (g.kind == Geometry::Kind::Box) return sign > 0 ? g.hi[axis] - x[axis] : x[axis] - g.lo[axis];
  const Vec3 d = x - g.center;
  const double disc = d[axis] * d[axis] - d.squaredNorm() + g.radius * g.radius;
  return -sign * d[axis] + std::sqrt(std::max(disc, 0.0));
}

Scheme build_scheme(const DomainMask& mask, const std::function<double(const Vec3&)>& phi0) {
  const TorusGrid& G = mask.grid;
  Scheme sc;
  sc.grid = &G;
  const std::size_t M = G.size();
  sc.omega.resize(M);
  for (std::size_t i = 0; i < M; ++i) sc.omega[i] = mask.in_omega(i);
  sc.theta.assign(6 * M, 0.0);
  const double h = G.h;
  auto nb = [&](std::size_t i, int axis, int s) {
    int c[3];
    G.coords(i, c[0], c[1], c[2]);
    c[axis] += s;
    return G.wrap_index(c[0], c[1], c[2]);
  };
  for (std::size_t i = 0; i < M; ++i) {
    if (!sc.omega[i]) continue;
    const Vec3 x = G.point(i);
    for (int a = 0; a < 3; ++a)
      for (int s : {-1, 1})
        if (!sc.omega[nb(i, a, s)])
          sc.theta[6 * i + 2 * a + (s > 0)] = std::clamp(crossing(mask.geometry, x, a, s) / h, 1e-6, 1.0);
  }
  auto ext = [&](std::size_t i, int a, int s) {
    return sc.omega[nb(i, a, s)] ? 0.5 : sc.theta[6 * i + 2 * a + (s > 0)];
  };
  for (std::size_t i = 0; i < M; ++i) {
    if (!sc.omega[i]) continue;
    for (int a = 0; a < 3; ++a) {
      const std::size_t j = nb(i, a, 1);
      const int t1 = (a + 1) % 3, t2 = (a + 2) % 3;
      if (sc.omega[j]) {
        double w = 1.0;
        for (int t : {t1, t2}) w *= 0.5 * (ext(i, t, -1) + ext(j, t, -1)) + 0.5 * (ext(i, t, 1) + ext(j, t, 1));
        sc.faces.push_back({i, j, a, w});
      }
      for (int s : {-1, 1}) {
        if (sc.omega[nb(i, a, s)]) continue;
        double w = 1.0;
        for (int t : {t1, t2}) w *= ext(i, t, -1) + ext(i, t, 1);
        const double th = sc.theta[6 * i + 2 * a + (s > 0)];
        Vec3 xb = G.point(i);
        xb[a] += s * th * h;
        sc.bdry.push_back({i, a, w, th, phi0(xb)});
      }
    }
  }
  return sc;
}

// Diagonal of A(b) at each Omega cell.
std::vector<Vec3> diag_coeffs(const OrderField& b, const Scheme& sc, const ElectrostaticConfig& cfg) {
  std::vector<Vec3> a(b.size(), Vec3::Zero());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!sc.omega[i]) continue;
    const Mat3 Q = to_matrix(b[i]);
    for (int g = 0; g < 3; ++g) a[i][g] = cfg.A_iso + cfg.A_aniso * Q(g, g);
  }
  return a;
}

double hmean(double x, double y) { return 2 * x * y / (x + y); }

double energy_of(const Scheme& sc, const std::vector<Vec3>& a, const std::vector<double>& phi, double h) {
  double s = 0;
  for (const auto& f : sc.faces) {
    const double d = phi[f.i] - phi[f.j];
    s += f.w * h * hmean(a[f.i][f.axis], a[f.j][f.axis]) * d * d;
  }
  for (const auto& e : sc.bdry) {
    const double d = phi[e.i] - e.phi0;
    s += e.w * h * a[e.i][e.axis] * d * d / e.theta;
  }
  return -0.5 * s;
}

}  // namespace

double estat_energy(const OrderField& b, const DomainMask& mask, const ElectrostaticConfig& cfg,
                    const std::vector<double>& phi) {
  const Scheme sc = build_scheme(mask, cfg.phi0);
  return energy_of(sc, diag_coeffs(b, sc, cfg), phi, mask.grid.h);
}

EstatResult estat_solve(const OrderField& b, const DomainMask& mask, const ElectrostaticConfig& cfg) {
  cfg.check();
  if (!(b.grid == mask.grid)) throw DomainError("estat: grid mismatch");
  const TorusGrid& G = mask.grid;
  const std::size_t M = G.size();
  const double h = G.h;
  const Scheme sc = build_scheme(mask, cfg.phi0);
  const std::vector<Vec3> a = diag_coeffs(b, sc, cfg);

  std::vector<double> diag(M, 0.0), cx(M, 0.0), cy(M, 0.0), cz(M, 0.0), rhs(M, 0.0);
  double* cc[3] = {cx.data(), cy.data(), cz.data()};
  for (const auto& f : sc.faces) {
    const double c = f.w * h * hmean(a[f.i][f.axis], a[f.j][f.axis]);
    diag[f.i] += c;
    diag[f.j] += c;
    cc[f.axis][f.i] = c;
  }
  for (const auto& e : sc.bdry) {
    const double c = e.w * h * a[e.i][e.axis] / e.theta;
    diag[e.i] += c;
    rhs[e.i] += c * e.phi0;
  }
  for (std::size_t i = 0; i < M; ++i)
    if (!sc.omega[i]) diag[i] = 1.0;

  simd::Stencil7 st{G.N, diag.data(), cx.data(), cy.data(), cz.data()};
  EstatResult res;
  std::vector<double> x(M, 0.0), r = rhs, z(M), p(M), Ap(M);
  double bnorm = 0;
  for (double v : rhs) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm > 0) {
    for (std::size_t i = 0; i < M; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = 0;
    for (std::size_t i = 0; i < M; ++i) rz += r[i] * z[i];
    double rn = bnorm;
    int it = 0;
    while (rn > cfg.cg_tol * bnorm) {
      if (++it > cfg.cg_maxiter)
        throw NumericalError("estat: CG did not converge, relative residual " + std::to_string(rn / bnorm));
      simd::stencil7_apply(st, p.data(), Ap.data());
      double pAp = 0;
      for (std::size_t i = 0; i < M; ++i) pAp += p[i] * Ap[i];
      const double alpha = rz / pAp;
      double rr = 0;
      for (std::size_t i = 0; i < M; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
        rr += r[i] * r[i];
      }
      rn = std::sqrt(rr);
      double rz_new = 0;
      for (std::size_t i = 0; i < M; ++i) {
        z[i] = r[i] / diag[i];
        rz_new += r[i] * z[i];
      }
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < M; ++i) p[i] = z[i] + beta * p[i];
    }
    // True residual of the returned iterate.
    simd::stencil7_apply(st, x.data(), Ap.data());
    double rr = 0;
    for (std::size_t i = 0; i < M; ++i) rr += (rhs[i] - Ap[i]) * (rhs[i] - Ap[i]);
    res.residual = std::sqrt(rr) / bnorm;
    res.iterations = it;
  }
  for (std::size_t i = 0; i < M; ++i)
    if (!sc.omega[i]) x[i] = 0.0;
  res.phi = x;
  res.E = energy_of(sc, a, x, h);

  // dE/da per cell and axis, then chain through a_g = A_iso + A_aniso Q_gg.
  std::vector<Vec3> dEda(M, Vec3::Zero());
  for (const auto& f : sc.faces) {
    const double d = x[f.i] - x[f.j];
    const double ai = a[f.i][f.axis], aj = a[f.j][f.axis];
    const double s = f.w * h * d * d / ((ai + aj) * (ai + aj));
    dEda[f.i][f.axis] += -0.5 * s * 2 * aj * aj;
    dEda[f.j][f.axis] += -0.5 * s * 2 * ai * ai;
  }
  for (const auto& e : sc.bdry) {
    const double d = x[e.i] - e.phi0;
    dEda[e.i][e.axis] += -0.5 * e.w * h * d * d / e.theta;
  }
  const auto& E = sym0_basis();
  res.envelope_gradient = OrderField(G);
  for (std::size_t i = 0; i < M; ++i) {
    if (!sc.omega[i]) continue;
    Vec5 g;
    for (int k = 0; k < 5; ++k) g[k] = cfg.A_aniso * (dEda[i][0] * E[k](0, 0) + dEda[i][1] * E[k](1, 1) + dEda[i][2] * E[k](2, 2));
    res.envelope_gradient[i] = g;
  }
  return res;
}

}  // namespace mfof
