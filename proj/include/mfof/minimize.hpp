#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mfof/energy.hpp"
#include "mfof/estat.hpp"
#include "mfof/field.hpp"
#include "mfof/kernel.hpp"

namespace mfof {

struct MinimizeOptions {
  double step0 = 1e-2;
  double backtrack = 0.5;
  double grad_tol = 1e-6;  // L2 norm of the gradient density over free nodes
  int max_iters = 2000;
  double delta = 1e-6;     // projection margin inside Qbar
  double armijo = 1e-4;
  double min_step = 1e-14;
  double max_step = 1e6;
  // Stop once the predicted decrease of a step falls below roundoff * max(1, |E|).
  double roundoff = 1e-13;
  std::uint64_t seed = 1;

  void check() const;
};

struct TraceRow {
  int iter = 0;
  double energy = 0, grad_norm = 0, step = 0;
};

struct MinimizeResult {
  OrderField field;
  EnergyBreakdown energy;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
  bool roundoff_floor = false;  // stopped on the roundoff test rather than grad_tol
};

// Projected gradient with Barzilai-Borwein trial steps and monotone Armijo backtracking.
MinimizeResult minimize_Feps(EnergyModel& model, const OrderField& init, const MinimizeOptions& opts = {});

// Collar and exterior nodes stay at b0. The model carries the electrostatic config, if any;
// its mask is set to `mask` for the duration of the call.
MinimizeResult minimize_Geps(EnergyModel& model, const OrderField& b0, const DomainMask& mask,
                             const MinimizeOptions& opts = {});

// Writes iter,energy,grad_norm,step.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

// Discrete Frank energy with forward differences on the torus:
// (1/4) h^3 sum [k|D n|^2 + (K1-k) div^2 + (K2-k)(n.curl)^2 + (K3-k)|n x curl|^2], k = (2 L1 + L3) s^2.
double frank_energy(const std::vector<Vec3>& n, const TorusGrid& grid, const ElasticCoefficients& c,
                    std::vector<Vec3>* grad = nullptr);

struct DirectorResult {
  std::vector<Vec3> n;
  double energy = 0;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
};

// Nodes with free[i] == 0 keep the boundary director. Riemannian gradient with renormalization.
DirectorResult minimize_director(const std::vector<Vec3>& boundary, const std::vector<char>& free,
                                 const TorusGrid& grid, const ElasticCoefficients& c,
                                 const MinimizeOptions& opts = {});
// Free nodes are the interior cells of the mask.
DirectorResult minimize_director(const std::vector<Vec3>& boundary, const DomainMask& mask,
                                 const ElasticCoefficients& c, const MinimizeOptions& opts = {});

struct SweepConfig {
  KernelSpec spec;
  Geometry geometry;
  DirectorFn director;
  std::vector<double> ladder;
  std::vector<int> grids;  // one N per rung, or a single N for all
  MaskParams mask;
  MinimizeOptions minimize;
  MinimizeOptions director_opts;
  KernelGridOptions kernel;
  MaxEntOptions maxent;
  double min_eps_over_h = 1.0;  // rungs with eps < this * h are skipped
  double k0_override = -1.0;    // negative: k0 from the kernel moments
  const ElectrostaticConfig* estat = nullptr;
  std::function<void(const std::string&)> log;
};

struct SweepRow {
  double epsilon = 0;
  int N = 0;
  double energy = 0;        // minimum G_eps
  double gamma_energy = 0;  // limit energy of the director candidate
  double rel_error = 0;     // |energy - gamma_energy| / |gamma_energy|
  double l2_distance = 0;   // minimizer vs lifted limit director
  double max_dist_M = 0;    // over interior cells
  int iterations = 0;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // decreasing epsilon
  BulkData bulk;
  ElasticCoefficients coeffs;
  std::vector<std::string> warnings;
  bool energies_bounded = false;
  bool dist_decreasing = false;
  bool error_decreasing = false;
};

SweepResult sweep_gamma(const SweepConfig& cfg);
void write_sweep_csv(const std::string& path, const SweepResult& r);

struct ProbeReport {
  int trials = 0;
  int returned = 0;
  double fraction = 0;
  std::vector<double> distances;  // after re-minimization, modulo lattice translation
};

// Lattice shift s maximizing sum_x a(x) . b(x + s), and the L2 distance of a to the shifted b.
double distance_modulo_translation(const OrderField& a, const OrderField& b, int* shift = nullptr);

// Perturbs free nodes by Gaussian noise of L2 norm `amplitude`, re-minimizes, and counts trials
// whose result lies within amplitude / 2 of the original modulo translation. With a mask the
// translation search is skipped.
ProbeReport local_min_probe(EnergyModel& model, const OrderField& minimizer, int trials, double amplitude,
                            const MinimizeOptions& opts = {}, const DomainMask* mask = nullptr);

}  // namespace mfof
