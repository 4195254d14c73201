#pragma once

#include <vector>

#include "mfof/field.hpp"
#include "mfof/kernel.hpp"

namespace mfof {

struct KernelGridOptions {
  int subsample = 5;            // per-axis midpoint subcells near the origin
  double tail_tol = 1e-6;       // relative omitted mass of the lattice sum
  int correction_block = 2;     // second-moment correction on |d|_inf <= block; 0 disables
  int face_nodes = 48;          // Gauss nodes per face axis for the exact cube moments
  int max_shells = 64;
};

struct PeriodizedKernelGrid {
  TorusGrid grid;
  double epsilon = 0.0;
  std::vector<Mat5> samples;  // K_eps at offset d, index = grid.index of d mod N
  Mat5 K0_discrete = Mat5::Zero();  // h^3 sum over all samples (= k0 I by construction)
  Mat5 K0_off = Mat5::Zero();       // h^3 sum over d != 0
  double k0 = 0.0;
  int image_shells = 0;
  double omitted_mass = 0.0;        // relative, re-added as a uniform constant
  bool zero = false;
};

// samples[d] = eps^-3 sum_k K((h d + 2 pi k) / eps), truncated at |k|_inf <= S with the
// omitted far field spread uniformly. Requires eps >= h.
PeriodizedKernelGrid build_periodized_kernel(const KernelSpec& spec, const TorusGrid& grid, double eps,
                                             const KernelGridOptions& opts = {});

// Isotropic trace weight of int_{|w| > R} K(w) dw (equal to k0 at R = 0).
double isotropic_mass_outside(const KernelSpec& spec, double R);

// int_{[-c, c]^3} K(w) w_a w_b dw; a = b = -1 gives the mass
// int_{[-c, c]^3} K(w) dw. Face-wise Gauss quadrature with the exact radial integrals.
Mat5 cube_moment(const KernelSpec& spec, double c, int a, int b, int face_nodes = 48);

}  // namespace mfof
