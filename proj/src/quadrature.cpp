#include "mfof/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace mfof {

namespace {

// Newton on P_n from the Chebyshev-like initial guess.
Rule1D compute_gl(int n) {
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

const Rule1D& cached(int n) {
  static std::mutex mu;
  static std::map<int, Rule1D> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

}  // namespace

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  Rule1D r = cached(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.x[i] = mid + half * r.x[i];
    r.w[i] *= half;
  }
  return r;
}

Rule1D gauss_panels(const std::vector<double>& breaks, int nodes_per_panel) {
  Rule1D out;
  for (size_t p = 0; p + 1 < breaks.size(); ++p) {
    Rule1D r = gauss_legendre(nodes_per_panel, breaks[p], breaks[p + 1]);
    out.x.insert(out.x.end(), r.x.begin(), r.x.end());
    out.w.insert(out.w.end(), r.w.begin(), r.w.end());
  }
  return out;
}

}  // namespace mfof
