#pragma once

#include <array>
#include <string>
#include <vector>

#include "mfof/estat.hpp"
#include "mfof/field.hpp"
#include "mfof/kernel.hpp"
#include "mfof/maxent.hpp"
#include "mfof/minimize.hpp"

namespace mfof {

// Sectioned key = value configuration; grammar in docs/config.md.
struct RunConfig {
  struct Kernel {
    std::string profile = "inverse_power";  // inverse_power | zero
    std::array<double, 3> coefficients{1, 1, 1};
    double exponent = 6.0;
    double cutoff = 0.1;
    double truncation = std::numeric_limits<double>::infinity();
    double M_bound = 0.0;
    int radial_nodes = 16;
    int angular_order = 8;
  } kernel;
  struct Bulk {
    bool auto_k0 = true;
    double k0_override = 0.0;
    double delta = 1e-6;
    double maxent_tol = 1e-10;
    int psi_points = 41;
  } bulk;
  struct Grid {
    int N = 32;
  } grid;
  struct Domain {
    std::string geometry = "torus";  // torus | ball | box
    Vec3 center = Vec3::Constant(3.141592653589793);
    double radius = 2.0;
    Vec3 lo = Vec3::Constant(1.0), hi = Vec3::Constant(5.0);
    double alpha = 0.25, c6 = 0.5, c7 = 1.0, delta1 = 0.1;
    std::string director = "twist";  // twist | splay_bend | constant:x,y,z
  } domain;
  struct Estat {
    bool enabled = false;
    double A_iso = 1.0, A_aniso = 0.0;
    std::string phi0 = "zero";
    double cg_tol = 1e-12;
    int cg_maxiter = 20000;
  } estat;
  struct Sweep {
    std::vector<double> epsilons{0.4, 0.2, 0.1};
    std::vector<int> grids{};  // empty: grid.N for every rung
    double min_eps_over_h = 1.0;
  } sweep;
  struct Minimize {
    double epsilon = 0.4;
    MinimizeOptions opts;
    std::string init = "lift";  // lift | random
    double noise = 0.02;
    int director_max_iters = 20000;
    double director_grad_tol = 1e-8;
  } minimize;
  struct Output {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
    bool wants(const std::string& f) const;
  } output;

  KernelSpec kernel_spec() const;
  QuadratureSpec quadrature() const;
  MaxEntOptions maxent() const;
  MaskParams mask_params() const;
  bool bounded() const { return domain.geometry != "torus"; }
  Geometry geometry() const;
  DirectorFn director() const;
  ElectrostaticConfig electrostatics() const;
  double k0() const;  // moments of the kernel unless overridden
};

// Throws ConfigError with the line number on malformed input or unknown keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace mfof
