#include "mfof/kernel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfof/error.hpp"
#include "mfof/parallel.hpp"
#include "mfof/quadrature.hpp"

namespace mfof {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

// Monomial tables: z_a z_b (a <= b) and z_a z_b z_c z_d (a <= b <= c <= d).
struct Monomials {
  int q2[3][3];
  int q4[3][3][3][3];
  // A2_kl = sum_m C2[m](k,l) zhat^m, A3_kl = sum_m C4[m](k,l) zhat^m
  std::array<Mat5, 6> C2;
  std::array<Mat5, 15> C4;

  Monomials() {
    int n = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) q2[a][b] = q2[b][a] = n++;
    n = 0;
    int tmp[3][3][3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b)
        for (int c = b; c < 3; ++c)
          for (int d = c; d < 3; ++d) tmp[a][b][c][d] = n++;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            int s[4] = {a, b, c, d};
            std::sort(s, s + 4);
            q4[a][b][c][d] = tmp[s[0]][s[1]][s[2]][s[3]];
          }
    const auto& E = sym0_basis();
    for (auto& m : C2) m.setZero();
    for (auto& m : C4) m.setZero();
    for (int k = 0; k < 5; ++k)
      for (int l = 0; l < 5; ++l) {
        const Mat3 P = E[k] * E[l];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            C2[q2[a][b]](k, l) += P(a, b);
            for (int c = 0; c < 3; ++c)
              for (int d = 0; d < 3; ++d) C4[q4[a][b][c][d]](k, l) += E[k](a, b) * E[l](c, d);
          }
      }
  }
};

const Monomials& monomials() {
  static const Monomials m;
  return m;
}

struct Acc {
  double s1 = 0;
  double m2[6] = {};
  double m4[15] = {};

  void add(const KernelSpec& spec, const Vec3& w, double weight) {
    const double r = w.norm();
    if (!(r > 0)) return;
    const double g1 = spec.g[0](r), g2 = spec.g[1](r), g3 = spec.g[2](r);
    s1 += weight * g1;
    if (g2 == 0.0 && g3 == 0.0) return;
    const Vec3 u = w / r;
    const double x[3] = {u[0], u[1], u[2]};
    if (g2 != 0.0) {
      int n = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) m2[n++] += weight * g2 * x[a] * x[b];
    }
    if (g3 != 0.0) {
      int n = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
          for (int c = b; c < 3; ++c)
            for (int d = c; d < 3; ++d) m4[n++] += weight * g3 * x[a] * x[b] * x[c] * x[d];
    }
  }

  Mat5 assemble(double scale) const {
    const Monomials& M = monomials();
    Mat5 K = s1 * Mat5::Identity();
    for (int m = 0; m < 6; ++m)
      if (m2[m] != 0.0) K += m2[m] * M.C2[m];
    for (int m = 0; m < 15; ++m)
      if (m4[m] != 0.0) K += m4[m] * M.C4[m];
    return scale * K;
  }
};

// Isotropic trace weight of int K over |w| > R: sum_n c_n 4 pi int_R^inf g_n r^2 dr.
double radial_mass(const KernelSpec& spec, double R) {
  static const double c[3] = {1.0, 1.0 / 3.0, 2.0 / 15.0};
  double s = 0;
  for (int n = 0; n < 3; ++n) s += c[n] * 4 * kPi * spec.g[n].moment_between(2, R, kInf);
  return s;
}

int min_image(int i, int N) { return i >= N / 2 ? i - N : i; }

}  // namespace

double isotropic_mass_outside(const KernelSpec& spec, double R) { return radial_mass(spec, R); }

Mat5 cube_moment(const KernelSpec& spec, double c, int a, int b, int face_nodes) {
  const Rule1D r = gauss_legendre(face_nodes, -1.0, 1.0);
  const int k = a < 0 ? 2 : 4;
  Mat5 out = Mat5::Zero();
  for (int f = 0; f < 3; ++f) {
    const int f1 = (f + 1) % 3, f2 = (f + 2) % 3;
    for (double sign : {-1.0, 1.0}) {
      for (size_t i = 0; i < r.x.size(); ++i)
        for (size_t j = 0; j < r.x.size(); ++j) {
          const double u = r.x[i], v = r.x[j];
          const double q = std::sqrt(1 + u * u + v * v);
          Vec3 w;
          w[f] = sign;
          w[f1] = u;
          w[f2] = v;
          w /= q;
          const double rho = c * q;
          const double wt = r.w[i] * r.w[j] / (q * q * q) * (a < 0 ? 1.0 : w[a] * w[b]);
          const double G1 = spec.g[0].moment_between(k, 0, rho);
          const double G2 = spec.g[1].moment_between(k, 0, rho);
          const double G3 = spec.g[2].moment_between(k, 0, rho);
          Mat5 A2, A3;
          angular_factors(w, A2, A3);
          out += wt * (G1 * Mat5::Identity() + G2 * A2 + G3 * A3);
        }
    }
  }
  return out;
}

PeriodizedKernelGrid build_periodized_kernel(const KernelSpec& spec, const TorusGrid& grid, double eps,
                                             const KernelGridOptions& opts) {
  if (!(eps > 0)) throw DomainError("epsilon must be positive");
  if (eps < grid.h * (1 - 1e-12))
    throw DomainError("resolution: epsilon " + std::to_string(eps) + " is below the grid spacing " +
                      std::to_string(grid.h));
  PeriodizedKernelGrid kg;
  kg.grid = grid;
  kg.epsilon = eps;
  const std::size_t M = grid.size();
  kg.samples.assign(M, Mat5::Zero());
  if (spec.is_zero()) {
    kg.zero = true;
    return kg;
  }
  const MomentTable mt = moments(spec);
  kg.k0 = mt.k0;
  const int N = grid.N;
  const double h = grid.h, h3 = grid.cell_volume();
  const double inv_e3 = 1.0 / (eps * eps * eps);

  // Image shells: omitted mass outside the inscribed radius of the image box.
  const double total = radial_mass(spec, 0.0);
  int S = 0;
  while (radial_mass(spec, (S + 0.5) * 2 * kPi / eps) > opts.tail_tol * total) {
    if (++S > opts.max_shells) throw NumericalError("lattice-sum truncation bound unattainable");
  }
  kg.image_shells = S;
  // Far field beyond the box, spread uniformly (volume-equivalent radius).
  const double L = (2 * S + 1) * 2 * kPi;
  const double R_eq = L * std::cbrt(3.0 / (4.0 * kPi));
  const double tail = radial_mass(spec, R_eq / eps) / std::pow(2 * kPi, 3);
  kg.omitted_mass = radial_mass(spec, R_eq / eps) / total;

  double rcut = 0;
  for (const auto& g : spec.g)
    if (!g.is_zero()) rcut = std::max(rcut, g.support_min());
  const double near = std::max(2 * eps * rcut + 2 * h, 6 * h);
  const int m = std::max(1, opts.subsample);

  // k = 0 image of offset d, cell-averaged near the origin.
  auto primary = [&](const Vec3& z, Acc& acc) {
    if (z.norm() <= near) {
      const double wsub = 1.0 / (double(m) * m * m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c) {
            const Vec3 off((a + 0.5) / m - 0.5, (b + 0.5) / m - 0.5, (c + 0.5) / m - 0.5);
            acc.add(spec, (z + h * off) / eps, wsub);
          }
    } else {
      acc.add(spec, z / eps, 1.0);
    }
  };

  auto offset_value = [&](int di, int dj, int dk) -> Mat5 {
    // Offsets at N/2 are averaged over both representatives so that K(d) = K(-d).
    int reps_i[2] = {di, di}, reps_j[2] = {dj, dj}, reps_k[2] = {dk, dk};
    int ni = 1, nj = 1, nk = 1;
    if (di == -N / 2) reps_i[ni++] = N / 2;
    if (dj == -N / 2) reps_j[nj++] = N / 2;
    if (dk == -N / 2) reps_k[nk++] = N / 2;
    Acc acc;
    const double w = 1.0 / (ni * nj * nk);
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < nj; ++b)
        for (int c = 0; c < nk; ++c) {
          const Vec3 z = h * Vec3(reps_i[a], reps_j[b], reps_k[c]);
          Acc part;
          for (int kz = -S; kz <= S; ++kz)
            for (int ky = -S; ky <= S; ++ky)
              for (int kx = -S; kx <= S; ++kx) {
                const Vec3 zk = z + 2 * kPi * Vec3(kx, ky, kz);
                if (kx == 0 && ky == 0 && kz == 0)
                  primary(zk, part);
                else
                  part.add(spec, zk / eps, 1.0);
              }
          acc.s1 += w * part.s1;
          for (int q = 0; q < 6; ++q) acc.m2[q] += w * part.m2[q];
          for (int q = 0; q < 15; ++q) acc.m4[q] += w * part.m4[q];
        }
    return acc.assemble(inv_e3);
  };

  auto mirror = [&](std::size_t idx) {
    int i, j, k;
    grid.coords(idx, i, j, k);
    return grid.wrap_index(-i, -j, -k);
  };

  parallel_for(M, 0, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      if (idx == 0 || mirror(idx) < idx) continue;
      int i, j, k;
      grid.coords(idx, i, j, k);
      kg.samples[idx] = offset_value(min_image(i, N), min_image(j, N), min_image(k, N)) + tail * Mat5::Identity();
    }
  });
  for (std::size_t idx = 1; idx < M; ++idx) {
    const std::size_t mi = mirror(idx);
    if (mi < idx) kg.samples[idx] = kg.samples[mi];
  }

  // Second-moment correction of the k = 0 part on the block |d|_inf <= B.
  const int B = opts.correction_block;
  if (B > 0 && 2 * B + 1 < N) {
    const double H = (B + 0.5) * h;
    Mat5 disc[3][3], exact[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) disc[a][b].setZero();
    for (int dk = -B; dk <= B; ++dk)
      for (int dj = -B; dj <= B; ++dj)
        for (int di = -B; di <= B; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const Vec3 z = h * Vec3(di, dj, dk);
          Acc acc;
          primary(z, acc);
          const Mat5 v = acc.assemble(inv_e3) * h3;
          for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) disc[a][b] += v * z[a] * z[b];
        }
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) exact[a][b] = eps * eps * cube_moment(spec, H / eps, a, b, opts.face_nodes);

    auto add_pair = [&](const Vec3& d, const Mat5& W) {
      const std::size_t p = grid.wrap_index(int(d[0]), int(d[1]), int(d[2]));
      const std::size_t q = grid.wrap_index(-int(d[0]), -int(d[1]), -int(d[2]));
      kg.samples[p] += W;
      if (q != p) kg.samples[q] += W;
    };
    const double h5 = h3 * h * h;
    for (int a = 0; a < 3; ++a) {
      const Mat5 dM = exact[a][a] - disc[a][a];
      add_pair(Vec3::Unit(a), dM / (2 * h5));
    }
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        const Mat5 W = (exact[a][b] - disc[a][b]) / (4 * h5);
        add_pair(Vec3::Unit(a) + Vec3::Unit(b), W);
        add_pair(Vec3::Unit(a) - Vec3::Unit(b), -W);
      }
  }

  // Mass identity fixes the origin sample.
  Mat5 off = Mat5::Zero();
  for (std::size_t idx = 1; idx < M; ++idx) off += kg.samples[idx];
  kg.K0_off = h3 * off;
  kg.samples[0] = (kg.k0 * Mat5::Identity() - kg.K0_off) / h3;
  kg.K0_discrete = kg.K0_off + h3 * kg.samples[0];
  return kg;
}

}  // namespace mfof
