#pragma once

#include <vector>

#include "mfof/field.hpp"
#include "mfof/kernel.hpp"
#include "mfof/kernel_grid.hpp"

namespace mfof {

struct RemainderReport {
  double epsilon = 0.0;
  double R1 = 0.0, R2 = 0.0, R3 = 0.0;
  double m_eps = 0.0;
  double m1 = 0.0, m2 = 0.0;  // collar bulk and exterior bilinear parts of m_eps
  double predicted_exponent = 0.0;
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
};

// (1 - alpha)(p - 3) - 2.
double predicted_remainder_exponent(double decay_exponent, double alpha);

// B(b, U1, U2) = h^6 sum_{x in U1} sum_{y in U2} b~(x)-b~(y) . K(x - y) (b~(x)-b~(y)), on the torus.
double cross_form(const OrderField& b, const std::vector<char>& U1, const std::vector<char>& U2,
                  const PeriodizedKernelGrid& kg);

// Remainders of the bounded-domain energy for one epsilon; kg must be built at mask.epsilon.
// c5 is the bulk constant entering m_eps.
RemainderReport remainders(const OrderField& b, const DomainMask& mask, const KernelSpec& spec,
                           const PeriodizedKernelGrid& kg, double c5, double decay_exponent);

struct RemainderLadder {
  std::vector<RemainderReport> rows;
  double slope_R1 = 0.0, slope_R2 = 0.0, slope_R3 = 0.0;
  double predicted = 0.0;
};

// Builds mask and kernel per epsilon; field(G) supplies the data on the grid.
RemainderLadder remainder_ladder(const OrderField& b, const Geometry& geom, const KernelSpec& spec,
                                 const std::vector<double>& ladder, double c5, const MaskParams& mp = {},
                                 const KernelGridOptions& kopt = {});

// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mfof
