#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mfof/fft.hpp"
#include "mfof/field.hpp"
#include "mfof/kernel.hpp"
#include "mfof/kernel_grid.hpp"
#include "mfof/maxent.hpp"

namespace mfof {

struct EnergyBreakdown {
  double bulk = 0, bilinear = 0, electrostatic = 0, total = 0, epsilon = 0;
};

struct ElectrostaticConfig;

// Discrete F_eps on the torus, or G_eps when a mask is attached. Keeps the kernel
// spectrum and per-node multipliers (warm starts) between calls.
class EnergyModel {
 public:
  EnergyModel(const PeriodizedKernelGrid& kg, const BulkData& bulk, const MaxEntOptions& opts = {});

  // Bulk restricted to interior cells; the bilinear term stays on the whole torus.
  void set_mask(const DomainMask* mask) { mask_ = mask; }
  void set_electrostatics(const ElectrostaticConfig* cfg) { estat_ = cfg; }

  const PeriodizedKernelGrid& kernel() const { return kg_; }
  const BulkData& bulk() const { return bulk_; }
  const MaxEntOptions& maxent() const { return opts_; }
  double epsilon() const { return kg_.epsilon; }

  EnergyBreakdown energy(const OrderField& b);
  // grad has the layout of b; entries are dE/db(x) for each node value.
  EnergyBreakdown energy_and_gradient(const OrderField& b, OrderField& grad);

  // (1/(2 eps^2)) h^3 sum b.(S * b), S the difference symbol (K0_off - h^3 K^ off the origin).
  double bilinear(const OrderField& b) const;
  // eps^-2 h^3 [K0_off b - h^3 K * b]
  OrderField bilinear_gradient(const OrderField& b) const;

  // Nodes within `margin` of the boundary of Q after the last gradient call.
  const std::vector<std::size_t>& saturated() const { return saturated_; }
  const std::vector<Multiplier>& multipliers() const { return lambda_; }
  const std::vector<Mat5>& covariances() const { return cov_; }

  double saturation_margin = 1e-7;

 private:
  double bulk_sum(const OrderField& b, OrderField* grad);

  const PeriodizedKernelGrid& kg_;
  BulkData bulk_;
  MaxEntOptions opts_;
  KernelSpectrum ks_;
  const DomainMask* mask_ = nullptr;
  const ElectrostaticConfig* estat_ = nullptr;
  std::vector<Multiplier> lambda_;
  std::vector<char> have_lambda_;
  std::vector<Mat5> cov_;
  std::vector<std::size_t> saturated_;
};

EnergyBreakdown F_eps(const OrderField& b, const PeriodizedKernelGrid& kg, const BulkData& bulk, double eps);
OrderField F_eps_gradient(const OrderField& b, const PeriodizedKernelGrid& kg, const BulkData& bulk, double eps);

// (1/(4 eps^2)) h^6 sum_x sum_y K(x - y)(b(x) - b(y))^2, O(N^6); N <= 12.
double bilinear_direct(const OrderField& b, const PeriodizedKernelGrid& kg);

// Throws AdmissibilityError listing cells of collar or exterior where b differs from b0.
void check_admissible(const OrderField& b, const OrderField& b0, const DomainMask& mask, double tol = 0.0);

EnergyBreakdown G_eps(const OrderField& b, const OrderField& b0, const DomainMask& mask, const PeriodizedKernelGrid& kg,
                      const BulkData& bulk, const ElectrostaticConfig* cfg);

// (1/4) h^3 sum L grad b . grad b with central differences. Throws DomainError when a
// node is farther than tol from M.
double gamma_energy(const OrderField& b, const ElasticCoefficients& c, double s_star, double tol = 1e-6);

struct FrankSplit {
  double total = 0;     // (1/4) int L grad b . grad b for b lifted from n
  double splay = 0;     // (1/4) K1 int (div n)^2
  double twist = 0;     // (1/4) K2 int (n . curl n)^2
  double bend = 0;      // (1/4) K3 int |n x curl n|^2
  double saddle = 0;    // (1/4) (2 L1 + L3) s^2 int [tr(grad n)^2 - (div n)^2]
};
FrankSplit gamma_energy_director(const std::vector<Vec3>& n, const TorusGrid& grid, const ElasticCoefficients& c);

struct BilinearRow {
  double epsilon = 0, bilinear = 0, limit = 0, rel_error = 0;
};
std::vector<BilinearRow> bilinear_vs_limit(const OrderField& b, const KernelSpec& spec, const ElasticCoefficients& c,
                                           double limit, const std::vector<double>& eps_ladder,
                                           const KernelGridOptions& kopts = {});

// Component-wise discrete harmonic extension into `region` (7-point Laplacian, CG).
OrderField harmonic_fill(const OrderField& b, const std::vector<char>& region, double tol = 1e-12, int max_iter = 20000);

}  // namespace mfof
