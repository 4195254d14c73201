#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mfof/error.hpp"
#include "mfof/minimize.hpp"

namespace mfof {

SweepResult sweep_gamma(const SweepConfig& cfg) {
  if (cfg.ladder.empty()) throw ConfigError("sweep: empty epsilon ladder");
  if (cfg.grids.empty() || (cfg.grids.size() != 1 && cfg.grids.size() != cfg.ladder.size()))
    throw ConfigError("sweep: give one grid size or one per rung");
  for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
    if (!(cfg.ladder[i] < cfg.ladder[i - 1])) throw ConfigError("sweep: ladder must be strictly decreasing");
  if (!cfg.director) throw ConfigError("sweep: no boundary director");
  auto log = [&](const std::string& s) {
    if (cfg.log) cfg.log(s);
  };

  SweepResult out;
  out.bulk = ground_state(cfg.k0_override >= 0 ? cfg.k0_override : moments(cfg.spec).k0, cfg.maxent, cfg.minimize.delta);
  const double s = out.bulk.s_star;
  out.coeffs = elastic_tensor(cfg.spec, {}, s);

  struct Limit {
    std::vector<Vec3> n0, n;
    double energy;
  };
  std::map<int, Limit> limits;
  auto limit_for = [&](const TorusGrid& G) -> const Limit& {
    auto it = limits.find(G.N);
    if (it != limits.end()) return it->second;
    Limit L;
    L.n0 = sample_director(G, cfg.director);
    // Dirichlet data on the complement of the domain.
    const DomainMask m = build_mask(cfg.geometry, cfg.ladder.back(), cfg.mask, G);
    std::vector<char> free(G.size());
    for (std::size_t i = 0; i < free.size(); ++i) free[i] = m.in_omega(i);
    const DirectorResult dr = minimize_director(L.n0, free, G, out.coeffs, cfg.director_opts);
    if (!dr.converged) log("limit director not converged at N=" + std::to_string(G.N));
    L.n = dr.n;
    L.energy = gamma_energy(director_to_field(L.n, s, G), out.coeffs, s, 1e-8);
    return limits.emplace(G.N, std::move(L)).first->second;
  };

  for (std::size_t r = 0; r < cfg.ladder.size(); ++r) {
    const double eps = cfg.ladder[r];
    const int N = cfg.grids.size() == 1 ? cfg.grids[0] : cfg.grids[r];
    const TorusGrid G = TorusGrid::make(N);
    if (eps < cfg.min_eps_over_h * G.h * (1 - 1e-12)) {
      std::ostringstream os;
      os << "rung eps=" << eps << " skipped: below " << cfg.min_eps_over_h << " h at N=" << N;
      out.warnings.push_back(os.str());
      log(os.str());
      continue;
    }
    const Limit& L = limit_for(G);
    const DomainMask mask = build_mask(cfg.geometry, eps, cfg.mask, G);
    const OrderField data = director_to_field(L.n0, s, G);
    const OrderField lim = director_to_field(L.n, s, G);
    OrderField init = data;
    for (std::size_t i = 0; i < G.size(); ++i)
      if (mask.interior(i)) init[i] = lim[i];

    const PeriodizedKernelGrid kg = build_periodized_kernel(cfg.spec, G, eps, cfg.kernel);
    EnergyModel model(kg, out.bulk, cfg.maxent);
    model.set_electrostatics(cfg.estat);
    const MinimizeResult mr = minimize_Geps(model, init, mask, cfg.minimize);

    SweepRow row;
    row.epsilon = eps;
    row.N = N;
    row.energy = mr.energy.total;
    row.gamma_energy = L.energy;
    row.rel_error = L.energy != 0 ? std::abs(row.energy - L.energy) / std::abs(L.energy) : std::abs(row.energy);
    row.l2_distance = l2_distance(mr.field, lim);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (mask.interior(i)) row.max_dist_M = std::max(row.max_dist_M, dist_to_M(mr.field[i], s));
    row.iterations = mr.iterations;
    row.converged = mr.converged;
    out.rows.push_back(row);
    std::ostringstream os;
    os << "eps=" << eps << " N=" << N << " E=" << row.energy << " E_limit=" << row.gamma_energy
       << " rel=" << row.rel_error << " distM=" << row.max_dist_M << " iters=" << row.iterations;
    log(os.str());
  }

  out.energies_bounded = !out.rows.empty();
  out.dist_decreasing = out.error_decreasing = out.rows.size() >= 2;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& row = out.rows[i];
    if (!std::isfinite(row.energy) || std::abs(row.energy) > 10 * (std::abs(row.gamma_energy) + 1))
      out.energies_bounded = false;
    if (i > 0) {
      if (!(row.max_dist_M < out.rows[i - 1].max_dist_M)) out.dist_decreasing = false;
      if (!(row.rel_error < out.rows[i - 1].rel_error)) out.error_decreasing = false;
    }
  }
  return out;
}

void write_sweep_csv(const std::string& path, const SweepResult& r) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "epsilon,N,energy,gamma_energy,rel_error,l2_distance,max_dist_M,iterations,converged\r\n";
  char buf[512];
  for (const auto& w : r.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\r\n", w.epsilon, w.N, w.energy,
                  w.gamma_energy, w.rel_error, w.l2_distance, w.max_dist_M, w.iterations, w.converged ? 1 : 0);
    f << buf;
  }
}

}  // namespace mfof
