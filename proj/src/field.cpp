#include "mfof/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfof/error.hpp"

namespace mfof {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline int wrap(int i, int N) {
  i %= N;
  return i < 0 ? i + N : i;
}
}  // namespace

TorusGrid TorusGrid::make(int N) {
  if (N < 4 || N % 2 != 0) throw DomainError("grid size must be even and at least 4");
  return TorusGrid{N, kTwoPi / N};
}

std::size_t TorusGrid::wrap_index(int i, int j, int k) const { return index(wrap(i, N), wrap(j, N), wrap(k, N)); }

void TorusGrid::coords(std::size_t idx, int& i, int& j, int& k) const {
  i = static_cast<int>(idx % N);
  j = static_cast<int>((idx / N) % N);
  k = static_cast<int>(idx / (std::size_t(N) * N));
}

Vec3 TorusGrid::point(std::size_t idx) const {
  int i, j, k;
  coords(idx, i, j, k);
  return Vec3(h * i, h * j, h * k);
}

OrderField translate(const OrderField& f, int di, int dj, int dk) {
  const TorusGrid& g = f.grid;
  OrderField out(g);
  for (int k = 0; k < g.N; ++k)
    for (int j = 0; j < g.N; ++j)
      for (int i = 0; i < g.N; ++i) out[g.index(i, j, k)] = f[g.wrap_index(i + di, j + dj, k + dk)];
  return out;
}

OrderField difference_quotient(const OrderField& f, int di, int dj, int dk) {
  if (di == 0 && dj == 0 && dk == 0) throw DomainError("difference quotient needs a nonzero offset");
  const double len = f.grid.h * std::sqrt(double(di * di + dj * dj + dk * dk));
  OrderField out = translate(f, di, dj, dk);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - f[i]) / len;
  return out;
}

std::vector<Grad5> discrete_gradient(const OrderField& f) {
  const TorusGrid& g = f.grid;
  std::vector<Grad5> out(g.size());
  const double s = 0.5 / g.h;
  for (int k = 0; k < g.N; ++k)
    for (int j = 0; j < g.N; ++j)
      for (int i = 0; i < g.N; ++i) {
        Grad5& d = out[g.index(i, j, k)];
        d[0] = s * (f[g.wrap_index(i + 1, j, k)] - f[g.wrap_index(i - 1, j, k)]);
        d[1] = s * (f[g.wrap_index(i, j + 1, k)] - f[g.wrap_index(i, j - 1, k)]);
        d[2] = s * (f[g.wrap_index(i, j, k + 1)] - f[g.wrap_index(i, j, k - 1)]);
      }
  return out;
}

double l2_norm_sq(const OrderField& f) {
  double s = 0;
  for (const auto& v : f.values) s += v.squaredNorm();
  return s * f.grid.cell_volume();
}

double l2_distance(const OrderField& a, const OrderField& b) {
  if (!(a.grid == b.grid)) throw DomainError("grid mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s * a.grid.cell_volume());
}

std::vector<Vec3> sample_director(const TorusGrid& grid, const DirectorFn& n) {
  std::vector<Vec3> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = n(grid.point(i));
  return out;
}

OrderField director_to_field(const std::vector<Vec3>& n, double s_star, const TorusGrid& grid) {
  if (n.size() != grid.size()) throw DomainError("director size does not match the grid");
  OrderField out(grid);
  const auto& E = sym0_basis();
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double len = n[i].norm();
    if (!(len > 0.0)) throw DomainError("zero director at node " + std::to_string(i));
    const Vec3 u = n[i] / len;
    Vec5 c;
    for (int k = 0; k < 5; ++k) c[k] = s_star * u.dot(E[k] * u);
    out[i] = c;
  }
  return out;
}

OrderField director_to_field(const DirectorFn& n, double s_star, const TorusGrid& grid) {
  return director_to_field(sample_director(grid, n), s_star, grid);
}

Geometry Geometry::box(const Vec3& lo, const Vec3& hi) {
  Geometry g;
  g.kind = Kind::Box;
  g.lo = lo;
  g.hi = hi;
  if (!((hi - lo).minCoeff() > 0)) throw ConfigError("box must have positive extent");
  return g;
}

Geometry Geometry::ball(const Vec3& c, double r) {
  Geometry g;
  g.kind = Kind::Ball;
  g.center = c;
  g.radius = r;
  if (!(r > 0)) throw ConfigError("ball radius must be positive");
  return g;
}

bool Geometry::contains(const Vec3& x) const {
  if (kind == Kind::Ball) return (x - center).norm() < radius;
  return (x.array() > lo.array()).all() && (x.array() < hi.array()).all();
}

double Geometry::depth(const Vec3& x) const {
  if (kind == Kind::Ball) return radius - (x - center).norm();
  return std::min((x - lo).minCoeff(), (hi - x).minCoeff());
}

double Geometry::cube_margin() const {
  if (kind == Kind::Ball) return std::min((center.array() - radius).minCoeff(), (kTwoPi - center.array() - radius).minCoeff());
  return std::min(lo.minCoeff(), (kTwoPi - hi.array()).minCoeff());
}

double Geometry::volume() const {
  if (kind == Kind::Ball) return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  return (hi - lo).prod();
}

DomainMask build_mask(const Geometry& geom, double eps, const MaskParams& p, const TorusGrid& grid) {
  if (!(p.alpha > 0 && p.alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(p.c6 > 0 && p.c7 > p.c6)) throw ConfigError("collar constants need 0 < c6 < c7");
  if (!(p.delta1 > 0)) throw ConfigError("delta1 must be positive");
  if (!(eps > 0)) throw ConfigError("epsilon must be positive");
  const double margin = geom.cube_margin();
  if (margin < p.delta1)
    throw ConfigError("domain is closer than delta1 to the cube boundary (margin " + std::to_string(margin) + ")");
  if (!std::isnan(p.decay_exponent) && !((1 - p.alpha) * (p.decay_exponent - 3) > 2))
    throw ConfigError("(1 - alpha)(p - 3) > 2 fails for the active kernel");

  DomainMask m;
  m.grid = grid;
  m.geometry = geom;
  m.delta1 = margin;
  m.alpha = p.alpha;
  m.c6 = p.c6;
  m.c7 = p.c7;
  m.epsilon = eps;
  m.delta_eps = p.c6 * std::pow(eps, p.alpha);
  m.labels.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.point(i);
    CellLabel l = CellLabel::Exterior;
    if (geom.contains(x)) l = geom.depth(x) > m.delta_eps ? CellLabel::Interior : CellLabel::Collar;
    m.labels[i] = l;
    (l == CellLabel::Interior ? m.n_interior : l == CellLabel::Collar ? m.n_collar : m.n_exterior)++;
  }
  return m;
}

}  // namespace mfof
