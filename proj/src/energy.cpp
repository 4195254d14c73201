#include "mfof/energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfof/error.hpp"
#include "mfof/estat.hpp"
#include "mfof/parallel.hpp"
#include "mfof/simd.hpp"

namespace mfof {

namespace {

double bilinear_of(const PeriodizedKernelGrid& kg, const KernelSpectrum& sym, const OrderField& b) {
  if (kg.zero) return 0.0;
  return b.grid.cell_volume() * spectral_quadratic(sym, b) / (2 * kg.epsilon * kg.epsilon);
}

OrderField bilinear_grad_of(const PeriodizedKernelGrid& kg, const KernelSpectrum& sym, const OrderField& b) {
  OrderField g(b.grid);
  if (kg.zero) return g;
  spectral_quadratic(sym, b, &g);
  const double f = b.grid.cell_volume() / (kg.epsilon * kg.epsilon);
  for (auto& v : g.values) v *= f;
  return g;
}

void check_grid(const OrderField& b, const PeriodizedKernelGrid& kg) {
  if (!(b.grid == kg.grid)) throw DomainError("energy: field grid N=" + std::to_string(b.grid.N) +
                                              " does not match kernel grid N=" + std::to_string(kg.grid.N));
}

}  // namespace

EnergyModel::EnergyModel(const PeriodizedKernelGrid& kg, const BulkData& bulk, const MaxEntOptions& opts)
    : kg_(kg), bulk_(bulk), opts_(opts) {
  if (!kg.zero) ks_ = difference_symbol(kg);
  lambda_.assign(kg.grid.size(), Multiplier::Zero());
  have_lambda_.assign(kg.grid.size(), 0);
}

double EnergyModel::bulk_sum(const OrderField& b, OrderField* grad) {
  const std::size_t M = b.size();
  std::vector<double> vals(M, 0.0);
  std::vector<char> sat(M, 0);
  const bool want_cov = false;
  const double k0 = bulk_.k0;
  parallel_for(M, 0, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (mask_ && !mask_->interior(i)) continue;
      const Multiplier* warm = have_lambda_[i] ? &lambda_[i] : nullptr;
      const LambdaSolution sol = solve_lambda(b[i], opts_, warm, want_cov);
      lambda_[i] = sol.lambda;
      have_lambda_[i] = 1;
      vals[i] = sol.psi_s - 0.5 * k0 * b[i].squaredNorm() - bulk_.c5;
      if (grad) {
        (*grad)[i] = sol.lambda - k0 * b[i];
        sat[i] = !in_open_Q(b[i], saturation_margin);
      }
    }
  });
  if (grad) {
    saturated_.clear();
    for (std::size_t i = 0; i < M; ++i)
      if (sat[i]) saturated_.push_back(i);
  }
  double s = 0;
  for (double v : vals) s += v;
  return s;
}

double EnergyModel::bilinear(const OrderField& b) const {
  check_grid(b, kg_);
  return bilinear_of(kg_, ks_, b);
}

OrderField EnergyModel::bilinear_gradient(const OrderField& b) const {
  check_grid(b, kg_);
  return bilinear_grad_of(kg_, ks_, b);
}

EnergyBreakdown EnergyModel::energy(const OrderField& b) {
  check_grid(b, kg_);
  const double eps = kg_.epsilon, h3 = b.grid.cell_volume();
  EnergyBreakdown e;
  e.epsilon = eps;
  e.bulk = h3 * bulk_sum(b, nullptr) / (eps * eps);
  e.bilinear = bilinear_of(kg_, ks_, b);
  if (estat_ && mask_ && estat_->enabled) e.electrostatic = estat_solve(b, *mask_, *estat_).E;
  e.total = e.bulk + e.bilinear + e.electrostatic;
  return e;
}

EnergyBreakdown EnergyModel::energy_and_gradient(const OrderField& b, OrderField& grad) {
  check_grid(b, kg_);
  const double eps = kg_.epsilon, h3 = b.grid.cell_volume();
  EnergyBreakdown e;
  e.epsilon = eps;
  grad = OrderField(b.grid);
  e.bulk = h3 * bulk_sum(b, &grad) / (eps * eps);
  const double f = h3 / (eps * eps);
  for (auto& v : grad.values) v *= f;
  if (!kg_.zero) {
    OrderField Sb;
    e.bilinear = h3 * spectral_quadratic(ks_, b, &Sb) / (2 * eps * eps);
    for (std::size_t i = 0; i < b.size(); ++i) grad[i] += f * Sb[i];
  }
  if (estat_ && mask_ && estat_->enabled) {
    const EstatResult r = estat_solve(b, *mask_, *estat_);
    e.electrostatic = r.E;
    for (std::size_t i = 0; i < b.size(); ++i) grad[i] += r.envelope_gradient[i];
  }
  e.total = e.bulk + e.bilinear + e.electrostatic;
  return e;
}

EnergyBreakdown F_eps(const OrderField& b, const PeriodizedKernelGrid& kg, const BulkData& bulk, double eps) {
  if (std::abs(eps - kg.epsilon) > 1e-14 * eps) throw DomainError("F_eps: kernel grid built for another epsilon");
  EnergyModel m(kg, bulk);
  return m.energy(b);
}

OrderField F_eps_gradient(const OrderField& b, const PeriodizedKernelGrid& kg, const BulkData& bulk, double eps) {
  if (std::abs(eps - kg.epsilon) > 1e-14 * eps) throw DomainError("F_eps: kernel grid built for another epsilon");
  EnergyModel m(kg, bulk);
  OrderField g;
  m.energy_and_gradient(b, g);
  return g;
}

double bilinear_direct(const OrderField& b, const PeriodizedKernelGrid& kg) {
  check_grid(b, kg);
  const TorusGrid& G = b.grid;
  if (G.N > 12) throw DomainError("bilinear_direct: N > 12");
  const int N = G.N;
  double s = 0;
  for (std::size_t x = 0; x < G.size(); ++x) {
    int xi, xj, xk;
    G.coords(x, xi, xj, xk);
    for (std::size_t y = 0; y < G.size(); ++y) {
      int yi, yj, yk;
      G.coords(y, yi, yj, yk);
      const Vec5 d = b[x] - b[y];
      const std::size_t off = G.index((xi - yi + N) % N, (xj - yj + N) % N, (xk - yk + N) % N);
      s += d.dot(kg.samples[off] * d);
    }
  }
  const double h3 = G.cell_volume();
  return h3 * h3 * s / (4 * kg.epsilon * kg.epsilon);
}

void check_admissible(const OrderField& b, const OrderField& b0, const DomainMask& mask, double tol) {
  if (!(b.grid == mask.grid) || !(b0.grid == mask.grid)) throw DomainError("admissibility: grid mismatch");
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (mask.fixed(i) && (b[i] - b0[i]).cwiseAbs().maxCoeff() > tol) bad.push_back(i);
  if (bad.empty()) return;
  std::ostringstream os;
  os << "field differs from boundary data on " << bad.size() << " collar/exterior cells:";
  for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 8); ++k) {
    int i, j, l;
    mask.grid.coords(bad[k], i, j, l);
    os << " (" << i << "," << j << "," << l << ")";
  }
  throw AdmissibilityError(os.str());
}

EnergyBreakdown G_eps(const OrderField& b, const OrderField& b0, const DomainMask& mask, const PeriodizedKernelGrid& kg,
                      const BulkData& bulk, const ElectrostaticConfig* cfg) {
  check_admissible(b, b0, mask);
  EnergyModel m(kg, bulk);
  m.set_mask(&mask);
  m.set_electrostatics(cfg);
  return m.energy(b);
}

double gamma_energy(const OrderField& b, const ElasticCoefficients& c, double s_star, double tol) {
  double worst = 0;
  std::size_t wi = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = dist_to_M(b[i], s_star);
    if (d > worst) worst = d, wi = i;
  }
  if (worst > tol) {
    int i, j, k;
    b.grid.coords(wi, i, j, k);
    throw DomainError("gamma_energy: field off the ground-state manifold, dist " + std::to_string(worst) + " at (" +
                      std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")");
  }
  const auto grad = discrete_gradient(b);
  double s = 0;
  for (const auto& g : grad) s += quadratic_form(c, to_grad3(g));
  return 0.25 * b.grid.cell_volume() * s;
}

FrankSplit gamma_energy_director(const std::vector<Vec3>& n, const TorusGrid& grid, const ElasticCoefficients& c) {
  if (n.size() != grid.size()) throw DomainError("gamma_energy_director: size mismatch");
  const double s = c.s_star_scaling_applied ? c.s_star : 1.0;
  const OrderField b = director_to_field(n, s, grid);
  FrankSplit out;
  out.total = gamma_energy(b, c, s, 1e-8);
  const double h = grid.h, h3 = grid.cell_volume();
  double sp = 0, tw = 0, be = 0, sa = 0;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    int i, j, k;
    grid.coords(x, i, j, k);
    Mat3 D;  // D(a, g) = d_g n_a
    for (int g = 0; g < 3; ++g) {
      int p[3] = {i, j, k}, m[3] = {i, j, k};
      p[g] += 1;
      m[g] -= 1;
      D.col(g) = (n[grid.wrap_index(p[0], p[1], p[2])] - n[grid.wrap_index(m[0], m[1], m[2])]) / (2 * h);
    }
    const double div = D.trace();
    const Vec3 curl(D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1));
    const Vec3& nv = n[x];
    sp += div * div;
    tw += std::pow(nv.dot(curl), 2);
    be += nv.cross(curl).squaredNorm();
    sa += (D * D).trace() - div * div;
  }
  out.splay = 0.25 * c.K1 * h3 * sp;
  out.twist = 0.25 * c.K2 * h3 * tw;
  out.bend = 0.25 * c.K3 * h3 * be;
  out.saddle = 0.25 * (2 * c.L1 + c.L3) * s * s * h3 * sa;
  return out;
}

std::vector<BilinearRow> bilinear_vs_limit(const OrderField& b, const KernelSpec& spec, const ElasticCoefficients&,
                                           double limit, const std::vector<double>& eps_ladder,
                                           const KernelGridOptions& kopts) {
  std::vector<BilinearRow> rows;
  for (double eps : eps_ladder) {
    const PeriodizedKernelGrid kg = build_periodized_kernel(spec, b.grid, eps, kopts);
    const KernelSpectrum ks = kg.zero ? KernelSpectrum{} : difference_symbol(kg);
    BilinearRow r;
    r.epsilon = eps;
    r.bilinear = bilinear_of(kg, ks, b);
    r.limit = limit;
    r.rel_error = limit != 0 ? std::abs(r.bilinear - limit) / std::abs(limit) : std::abs(r.bilinear);
    rows.push_back(r);
  }
  return rows;
}

OrderField harmonic_fill(const OrderField& b, const std::vector<char>& region, double tol, int max_iter) {
  const TorusGrid& G = b.grid;
  const std::size_t M = G.size();
  if (region.size() != M) throw DomainError("harmonic_fill: region size mismatch");
  std::size_t nreg = 0;
  for (char r : region) nreg += r != 0;
  if (nreg == 0) return b;
  if (nreg == M) throw DomainError("harmonic_fill: region has no boundary");

  std::vector<double> diag(M, 1.0), cx(M, 0.0), cy(M, 0.0), cz(M, 0.0);
  double* cc[3] = {cx.data(), cy.data(), cz.data()};
  auto nb = [&](std::size_t i, int a, int s) {
    int c[3];
    G.coords(i, c[0], c[1], c[2]);
    c[a] += s;
    return G.wrap_index(c[0], c[1], c[2]);
  };
  for (std::size_t i = 0; i < M; ++i) {
    if (!region[i]) continue;
    diag[i] = 6.0;
    for (int a = 0; a < 3; ++a)
      if (region[nb(i, a, 1)]) cc[a][i] = 1.0;
  }
  const simd::Stencil7 st{G.N, diag.data(), cx.data(), cy.data(), cz.data()};
  OrderField out = b;
  std::vector<double> rhs(M), x(M), r(M), z(M), p(M), Ap(M);
  for (int comp = 0; comp < 5; ++comp) {
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (std::size_t i = 0; i < M; ++i) {
      if (!region[i]) continue;
      for (int a = 0; a < 3; ++a)
        for (int s : {-1, 1}) {
          const std::size_t j = nb(i, a, s);
          if (!region[j]) rhs[i] += b[j][comp];
        }
    }
    // Start from the current values; the region is solved, the rest stays fixed at 0 shift.
    for (std::size_t i = 0; i < M; ++i) x[i] = region[i] ? b[i][comp] : 0.0;
    simd::stencil7_apply(st, x.data(), Ap.data());
    double bn = 0, rn = 0;
    for (std::size_t i = 0; i < M; ++i) {
      r[i] = rhs[i] - Ap[i];
      bn += rhs[i] * rhs[i];
      rn += r[i] * r[i];
    }
    rn = std::sqrt(rn);
    // Relative to the data or, when the data vanish, to the starting residual.
    bn = std::max({std::sqrt(bn), rn, 1e-300});
    double rz = 0;
    for (std::size_t i = 0; i < M; ++i) {
      z[i] = r[i] / diag[i];
      p[i] = z[i];
      rz += r[i] * z[i];
    }
    int it = 0;
    while (rn > tol * bn) {
      if (++it > max_iter) throw NumericalError("harmonic_fill: CG did not converge, residual " + std::to_string(rn / bn));
      simd::stencil7_apply(st, p.data(), Ap.data());
      double pAp = 0;
      for (std::size_t i = 0; i < M; ++i) pAp += p[i] * Ap[i];
      const double al = rz / pAp;
      double rr = 0, rzn = 0;
      for (std::size_t i = 0; i < M; ++i) {
        x[i] += al * p[i];
        r[i] -= al * Ap[i];
        rr += r[i] * r[i];
        z[i] = r[i] / diag[i];
        rzn += r[i] * z[i];
      }
      rn = std::sqrt(rr);
      const double be = rzn / rz;
      rz = rzn;
      for (std::size_t i = 0; i < M; ++i) p[i] = z[i] + be * p[i];
    }
    for (std::size_t i = 0; i < M; ++i)
      if (region[i]) out[i][comp] = x[i];
  }
  return out;
}

}  // namespace mfof
