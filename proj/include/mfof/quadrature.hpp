#pragma once

#include <vector>

namespace mfof {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre on [a, b]; nodes cached per n.
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Product of Gauss-Legendre panels with the given breakpoints.
Rule1D gauss_panels(const std::vector<double>& breaks, int nodes_per_panel);

}  // namespace mfof
