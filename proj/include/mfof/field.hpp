#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "mfof/linalg.hpp"

namespace mfof {

// N cells per axis on [0, 2pi)^3, cell values at x = h (i, j, k); index i fastest.
struct TorusGrid {
  int N = 0;
  double h = 0.0;

  static TorusGrid make(int N);
  std::size_t size() const { return std::size_t(N) * N * N; }
  std::size_t index(int i, int j, int k) const { return std::size_t(i) + std::size_t(N) * (j + std::size_t(N) * k); }
  std::size_t wrap_index(int i, int j, int k) const;
  void coords(std::size_t idx, int& i, int& j, int& k) const;
  Vec3 point(std::size_t idx) const;
  double cell_volume() const { return h * h * h; }
  bool operator==(const TorusGrid& o) const { return N == o.N; }
};

struct OrderField {
  TorusGrid grid;
  std::vector<Vec5> values;

  OrderField() = default;
  explicit OrderField(const TorusGrid& g, const Vec5& fill = Vec5::Zero()) : grid(g), values(g.size(), fill) {}
  Vec5& operator[](std::size_t i) { return values[i]; }
  const Vec5& operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// Lattice translation: out(x) = in(x + h d).
OrderField translate(const OrderField& f, int di, int dj, int dk);

// (b(x + h d) - b(x)) / |h d|
OrderField difference_quotient(const OrderField& f, int di, int dj, int dk);

// Central differences, periodic; grad[x][g] = d_g b(x).
using Grad5 = std::array<Vec5, 3>;
std::vector<Grad5> discrete_gradient(const OrderField& f);

// h^3 sum |b|^2
double l2_norm_sq(const OrderField& f);
double l2_distance(const OrderField& a, const OrderField& b);

using DirectorFn = std::function<Vec3(const Vec3&)>;
std::vector<Vec3> sample_director(const TorusGrid& grid, const DirectorFn& n);
OrderField director_to_field(const std::vector<Vec3>& n, double s_star, const TorusGrid& grid);
OrderField director_to_field(const DirectorFn& n, double s_star, const TorusGrid& grid);

enum class CellLabel : std::uint8_t { Interior = 0, Collar = 1, Exterior = 2 };

struct Geometry {
  enum class Kind { Box, Ball } kind = Kind::Ball;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();  // box
  Vec3 center = Vec3::Constant(3.141592653589793);
  double radius = 0.0;                        // ball

  static Geometry box(const Vec3& lo, const Vec3& hi);
  static Geometry ball(const Vec3& c, double r);
  bool contains(const Vec3& x) const;
  // Distance from an interior point to the boundary of the region.
  double depth(const Vec3& x) const;
  // Distance of the region to the boundary of the cube [0, 2pi]^3.
  double cube_margin() const;
  double volume() const;
};

struct DomainMask {
  TorusGrid grid;
  std::vector<CellLabel> labels;
  Geometry geometry;
  double delta1 = 0.0;
  double alpha = 0.25, c6 = 0.5, c7 = 1.0;
  double epsilon = 0.0;
  double delta_eps = 0.0;
  std::size_t n_interior = 0, n_collar = 0, n_exterior = 0;

  bool interior(std::size_t i) const { return labels[i] == CellLabel::Interior; }
  bool fixed(std::size_t i) const { return labels[i] != CellLabel::Interior; }
  bool in_omega(std::size_t i) const { return labels[i] != CellLabel::Exterior; }
};

struct MaskParams {
  double alpha = 0.25;
  double c6 = 0.5;
  double c7 = 1.0;
  double delta1 = 0.1;  // required margin to the cube boundary
  // Kernel decay exponent for the (1-alpha)(p-3) > 2 check; NaN skips it.
  double decay_exponent = std::numeric_limits<double>::quiet_NaN();
};

// Throws ConfigError on a violated margin, alpha >= 1, c7 <= c6 or the exponent condition.
DomainMask build_mask(const Geometry& geom, double eps, const MaskParams& p, const TorusGrid& grid);

}  // namespace mfof
