#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfof/field.hpp"

namespace mfof {

struct ElectrostaticConfig {
  double A_iso = 1.0;
  double A_aniso = 0.0;
  std::function<double(const Vec3&)> phi0 = [](const Vec3&) { return 0.0; };
  double cg_tol = 1e-12;
  int cg_maxiter = 20000;
  bool enabled = true;

  // Smallest eigenvalue of A(b) = A_iso I + A_aniso mat(b) over the closed moment set.
  double min_eigenvalue() const;
  void check() const;  // ConfigError unless min_eigenvalue() > 0
};

struct EstatResult {
  std::vector<double> phi;          // Omega cells; exterior cells hold 0
  double E = 0.0;                   // -1/2 of the discrete Dirichlet form
  OrderField envelope_gradient;     // dE/db per node with phi held fixed
  double residual = 0.0;            // relative CG residual
  int iterations = 0;
};

// Cell-centred two-point flux scheme on Omega cells with face-harmonic means of the
// diagonal of A(b); Dirichlet data at the true boundary crossing; dual faces of cells
// next to the boundary are stretched to reach it. Jacobi-preconditioned CG.
EstatResult estat_solve(const OrderField& b, const DomainMask& mask, const ElectrostaticConfig& cfg);

// The discrete energy for a given potential (used for the maximum-structure check).
double estat_energy(const OrderField& b, const DomainMask& mask, const ElectrostaticConfig& cfg,
                    const std::vector<double>& phi);

// Parses "zero", "linear:a,b,c" (a x1 + b x2 + c x3) or "product" (x1 x3).
std::function<double(const Vec3&)> parse_phi0(const std::string& s);

}  // namespace mfof
