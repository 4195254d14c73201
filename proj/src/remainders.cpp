#include "mfof/remainders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfof/error.hpp"
#include "mfof/fft.hpp"
#include "mfof/parallel.hpp"

namespace mfof {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<char> select(const DomainMask& m, bool (*pred)(CellLabel)) {
  std::vector<char> out(m.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pred(m.labels[i]) ? 1 : 0;
  return out;
}

std::vector<double> to_double(const std::vector<char>& c) { return std::vector<double>(c.begin(), c.end()); }

// sum_{x in U1} sum_{y in U2} K(x-y)(b(x)-b(y))^2 without volume factors, with b already shifted.
double pair_sum(const KernelSpectrum& ks, const OrderField& b, const std::vector<char>& U1,
                const std::vector<char>& U2) {
  const std::size_t M = b.size();
  const std::vector<Mat5> T1 = convolve_scalar(ks, to_double(U1));
  const std::vector<Mat5> T2 = convolve_scalar(ks, to_double(U2));
  OrderField b2(b.grid);
  for (std::size_t i = 0; i < M; ++i)
    if (U2[i]) b2[i] = b[i];
  const OrderField c2 = convolve(ks, b2);
  double s = 0;
  for (std::size_t i = 0; i < M; ++i) {
    if (U1[i]) s += b[i].dot(T2[i] * b[i]) - 2 * b[i].dot(c2[i]);
    if (U2[i]) s += b[i].dot(T1[i] * b[i]);
  }
  return s;
}

// Shift by the value at a reference cell so constant fields vanish exactly.
OrderField shifted(const OrderField& b, std::size_t ref) {
  OrderField out = b;
  const Vec5 r = b[ref];
  for (auto& v : out.values) v -= r;
  return out;
}

}  // namespace

double predicted_remainder_exponent(double p, double alpha) { return (1 - alpha) * (p - 3) - 2; }

double cross_form(const OrderField& b, const std::vector<char>& U1, const std::vector<char>& U2,
                  const PeriodizedKernelGrid& kg) {
  if (kg.zero) return 0.0;
  const double h3 = kg.grid.cell_volume();
  return h3 * h3 * pair_sum(kernel_spectrum(kg, true), shifted(b, 0), U1, U2);
}

RemainderReport remainders(const OrderField& b, const DomainMask& mask, const KernelSpec& spec,
                           const PeriodizedKernelGrid& kg, double c5, double decay_exponent) {
  if (!(b.grid == mask.grid) || !(kg.grid == mask.grid)) throw DomainError("remainders: grid mismatch");
  if (std::abs(kg.epsilon - mask.epsilon) > 1e-12 * mask.epsilon)
    throw DomainError("remainders: kernel and mask built at different epsilon");
  RemainderReport r;
  r.epsilon = mask.epsilon;
  r.predicted_exponent = predicted_remainder_exponent(decay_exponent, mask.alpha);
  const TorusGrid& G = b.grid;
  const std::size_t M = G.size();
  const double h = G.h, h3 = G.cell_volume(), e2 = mask.epsilon * mask.epsilon;

  const auto I = select(mask, [](CellLabel l) { return l == CellLabel::Interior; });
  const auto C = select(mask, [](CellLabel l) { return l == CellLabel::Collar; });
  const auto E = select(mask, [](CellLabel l) { return l == CellLabel::Exterior; });
  std::vector<char> Om(M);
  for (std::size_t i = 0; i < M; ++i) Om[i] = !E[i];

  double m1 = 0;
  for (std::size_t i = 0; i < M; ++i)
    if (C[i]) m1 += kg.k0 * b[i].squaredNorm();
  r.m1 = h3 * m1;
  if (kg.zero) {
    r.m_eps = r.m1 - c5 * h3 * double(mask.n_interior);
    return r;
  }

  const KernelSpectrum ks = kernel_spectrum(kg, true);
  std::size_t ref = 0;
  while (ref < M && !Om[ref]) ++ref;
  if (ref == M) throw DomainError("remainders: empty domain");
  const OrderField bs = shifted(b, ref);

  // Kernel mass of the interior cells that falls outside the domain.
  const std::vector<Mat5> TE = convolve_scalar(ks, to_double(E));
  double r1 = 0;
  for (std::size_t i = 0; i < M; ++i)
    if (I[i]) r1 += b[i].dot(TE[i] * b[i]);
  r.R1 = -h3 * h3 * r1 / (2 * e2);

  r.R3 = h3 * h3 * pair_sum(ks, bs, E, I) / e2;
  r.m2 = h3 * h3 * (2 * pair_sum(ks, bs, E, C) + pair_sum(ks, bs, E, E));
  r.m_eps = r.m1 - c5 * h3 * double(mask.n_interior) - r.m2 / e2;

  // Raw minus periodized kernel on Omega x Omega: minus the k != 0 images and the far-field constant.
  int lo[3] = {G.N, G.N, G.N}, hi[3] = {-1, -1, -1};
  for (std::size_t i = 0; i < M; ++i) {
    if (!Om[i]) continue;
    int c[3];
    G.coords(i, c[0], c[1], c[2]);
    for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], c[a]), hi[a] = std::max(hi[a], c[a]);
  }
  int ext = 0;
  for (int a = 0; a < 3; ++a) ext = std::max(ext, hi[a] - lo[a] + 1);
  const int P = 2 * ext;
  const TorusGrid GP = TorusGrid::make(P);
  const int S = std::max(kg.image_shells, 1);
  const double eps = mask.epsilon, inv_e3 = 1.0 / (eps * eps * eps);
  const double R_eq = (2 * S + 1) * 2 * kPi * std::cbrt(3.0 / (4.0 * kPi));
  const double tail = isotropic_mass_outside(spec, R_eq / eps) / std::pow(2 * kPi, 3);

  std::vector<Mat5> D(GP.size(), Mat5::Zero());
  auto image_sum = [&](int di, int dj, int dk) {
    const Vec3 z = h * Vec3(di, dj, dk);
    Mat5 acc = tail * Mat5::Identity();
    for (int kz = -S; kz <= S; ++kz)
      for (int ky = -S; ky <= S; ++ky)
        for (int kx = -S; kx <= S; ++kx) {
          if (kx == 0 && ky == 0 && kz == 0) continue;
          acc += inv_e3 * kernel_matrix(spec, (z + 2 * kPi * Vec3(kx, ky, kz)) / eps);
        }
    return acc;
  };
  const int W = 2 * ext - 1;
  parallel_for(std::size_t(W) * W * W, 0, [&](std::size_t a, std::size_t e) {
    for (std::size_t t = a; t < e; ++t) {
      const int di = int(t % W) - (ext - 1), dj = int((t / W) % W) - (ext - 1), dk = int(t / (std::size_t(W) * W)) - (ext - 1);
      D[GP.wrap_index(di, dj, dk)] = image_sum(di, dj, dk);
    }
  });
  const KernelSpectrum kd = kernel_spectrum(P, D, true);
  OrderField bp(GP);
  std::vector<char> OmP(GP.size(), 0);
  for (std::size_t i = 0; i < M; ++i) {
    if (!Om[i]) continue;
    int c[3];
    G.coords(i, c[0], c[1], c[2]);
    const std::size_t j = GP.index(c[0] - lo[0], c[1] - lo[1], c[2] - lo[2]);
    bp[j] = bs[i];
    OmP[j] = 1;
  }
  r.R2 = -h3 * h3 * pair_sum(kd, bp, OmP, OmP) / e2;
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RemainderLadder remainder_ladder(const OrderField& b, const Geometry& geom, const KernelSpec& spec,
                                 const std::vector<double>& ladder, double c5, const MaskParams& mp,
                                 const KernelGridOptions& kopt) {
  const ValidationReport vr = validate_assumptions(spec, mp.alpha);
  RemainderLadder out;
  out.predicted = predicted_remainder_exponent(vr.decay_exponent, mp.alpha);
  std::vector<double> e, r1, r2, r3;
  for (double eps : ladder) {
    const DomainMask mask = build_mask(geom, eps, mp, b.grid);
    const PeriodizedKernelGrid kg = build_periodized_kernel(spec, b.grid, eps, kopt);
    out.rows.push_back(remainders(b, mask, spec, kg, c5, vr.decay_exponent));
    e.push_back(eps);
    r1.push_back(out.rows.back().R1);
    r2.push_back(out.rows.back().R2);
    r3.push_back(out.rows.back().R3);
  }
  if (ladder.size() >= 2) {
    out.slope_R1 = loglog_slope(e, r1);
    out.slope_R2 = loglog_slope(e, r2);
    out.slope_R3 = loglog_slope(e, r3);
    std::vector<double> tot;
    for (const auto& row : out.rows) tot.push_back(row.R1 - 2 * row.R3 + row.R2);
    const double f = loglog_slope(e, tot);
    for (auto& row : out.rows) row.fitted_exponent = f;
  }
  return out;
}

}  // namespace mfof
