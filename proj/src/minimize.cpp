#include "mfof/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "mfof/error.hpp"
#include "mfof/fft.hpp"

namespace mfof {

void MinimizeOptions::check() const {
  if (!(step0 > 0)) throw ConfigError("minimize: step0 must be positive");
  if (!(backtrack > 0 && backtrack < 1)) throw ConfigError("minimize: backtrack must lie in (0, 1)");
  if (!(grad_tol > 0)) throw ConfigError("minimize: grad_tol must be positive");
  if (max_iters < 0) throw ConfigError("minimize: max_iters must be nonnegative");
  if (!(delta > 0 && delta < 1.0 / 3.0)) throw ConfigError("minimize: projection margin out of range");
  if (!(min_step > 0 && max_step > min_step)) throw ConfigError("minimize: bad step bounds");
}

namespace {

struct Problem {
  EnergyModel& model;
  const std::vector<char>* fixed;  // null: everything free
  double delta;
};

bool is_free(const Problem& p, std::size_t i) { return !p.fixed || !(*p.fixed)[i]; }

double grad_norm(const Problem& p, const OrderField& g) {
  double s = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (is_free(p, i)) s += g[i].squaredNorm();
  return std::sqrt(s / g.grid.cell_volume());
}

MinimizeResult run(Problem p, const OrderField& init, const MinimizeOptions& opts) {
  opts.check();
  MinimizeResult res;
  res.field = init;
  OrderField& b = res.field;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (is_free(p, i)) b[i] = project_Qbar(b[i], opts.delta);

  OrderField g;
  EnergyBreakdown E = p.model.energy_and_gradient(b, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!is_free(p, i)) g[i].setZero();
  double step = opts.step0;
  double gn = grad_norm(p, g);
  res.trace.push_back({0, E.total, gn, 0.0});

  OrderField trial(b.grid), gt;
  for (int it = 1; it <= opts.max_iters; ++it) {
    if (gn < opts.grad_tol) {
      res.converged = true;
      break;
    }
    double a = std::clamp(step, opts.min_step, opts.max_step);
    // Predicted decrease below the resolution of the energy: stationary to roundoff.
    if (a * gn * gn * b.grid.cell_volume() < opts.roundoff * std::max(1.0, std::abs(E.total))) {
      res.converged = true;
      res.roundoff_floor = true;
      break;
    }
    EnergyBreakdown Et;
    while (true) {
      double decrease_model = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!is_free(p, i)) {
          trial[i] = b[i];
          continue;
        }
        trial[i] = project_Qbar(Vec5(b[i] - a * g[i]), opts.delta);
        decrease_model += g[i].dot(b[i] - trial[i]);
      }
      bool ok = decrease_model > 0;
      if (ok) {
        try {
          Et = p.model.energy(trial);
          ok = std::isfinite(Et.total) && Et.total <= E.total - opts.armijo * decrease_model;
        } catch (const DomainError&) {
          ok = false;
        } catch (const NumericalError&) {
          ok = false;
        }
      }
      if (ok) break;
      a *= opts.backtrack;
      if (a < opts.min_step) {
        std::ostringstream os;
        os << "minimize: line search stalled at iteration " << it << ", energy " << E.total << ", gradient norm "
           << gn << ", step below " << opts.min_step;
        throw NumericalError(os.str());
      }
    }
    p.model.energy_and_gradient(trial, gt);
    for (std::size_t i = 0; i < gt.size(); ++i)
      if (!is_free(p, i)) gt[i].setZero();
    // Barzilai-Borwein (long) step for the next trial.
    double ss = 0, sy = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!is_free(p, i)) continue;
      const Vec5 s = trial[i] - b[i];
      ss += s.squaredNorm();
      sy += s.dot(gt[i] - g[i]);
    }
    step = sy > 0 ? ss / sy : 2 * a;
    std::swap(b.values, trial.values);
    std::swap(g.values, gt.values);
    E = Et;
    gn = grad_norm(p, g);
    res.iterations = it;
    res.trace.push_back({it, E.total, gn, a});
  }
  if (!res.converged && gn < opts.grad_tol) res.converged = true;
  res.energy = E;
  return res;
}

}  // namespace

MinimizeResult minimize_Feps(EnergyModel& model, const OrderField& init, const MinimizeOptions& opts) {
  model.set_mask(nullptr);
  return run({model, nullptr, opts.delta}, init, opts);
}

MinimizeResult minimize_Geps(EnergyModel& model, const OrderField& b0, const DomainMask& mask,
                             const MinimizeOptions& opts) {
  if (!(b0.grid == mask.grid)) throw DomainError("minimize_Geps: grid mismatch");
  const double s = model.bulk().s_star;
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < b0.size(); ++i)
    if (mask.labels[i] == CellLabel::Collar && dist_to_M(b0[i], s) > 1e-8) bad.push_back(i);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "boundary data off the ground-state manifold on " << bad.size() << " collar cells:";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 8); ++k) {
      int i, j, l;
      mask.grid.coords(bad[k], i, j, l);
      os << " (" << i << "," << j << "," << l << ")";
    }
    throw AdmissibilityError(os.str());
  }
  std::vector<char> fixed(mask.labels.size());
  for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] = mask.fixed(i);
  model.set_mask(&mask);
  MinimizeResult r = run({model, &fixed, opts.delta}, b0, opts);
  model.set_mask(nullptr);
  return r;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "iter,energy,grad_norm,step\r\n";
  char buf[128];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\r\n", r.iter, r.energy, r.grad_norm, r.step);
    f << buf;
  }
}

double distance_modulo_translation(const OrderField& a, const OrderField& b, int* shift) {
  if (!(a.grid == b.grid)) throw DomainError("distance_modulo_translation: grid mismatch");
  const TorusGrid& G = a.grid;
  const std::size_t M = G.size();
  std::vector<double> corr(M, 0.0), ca(M), cb(M);
  for (int k = 0; k < 5; ++k) {
    for (std::size_t i = 0; i < M; ++i) ca[i] = a[i][k], cb[i] = b[i][k];
    const auto c = circular_correlate(G.N, ca, cb);
    for (std::size_t i = 0; i < M; ++i) corr[i] += c[i];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < M; ++i)
    if (corr[i] > corr[best] + 1e-12 * std::abs(corr[best])) best = i;
  if (shift) *shift = int(best);
  int di, dj, dk;
  G.coords(best, di, dj, dk);
  return l2_distance(a, translate(b, di, dj, dk));
}

ProbeReport local_min_probe(EnergyModel& model, const OrderField& minimizer, int trials, double amplitude,
                            const MinimizeOptions& opts, const DomainMask* mask) {
  ProbeReport rep;
  rep.trials = trials;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  const TorusGrid& G = minimizer.grid;
  for (int t = 0; t < trials; ++t) {
    OrderField v(G);
    double n2 = 0;
    for (std::size_t i = 0; i < G.size(); ++i) {
      if (mask && mask->fixed(i)) continue;
      for (int k = 0; k < 5; ++k) v[i][k] = nd(rng);
      n2 += v[i].squaredNorm();
    }
    const double scale = n2 > 0 ? amplitude / std::sqrt(n2 * G.cell_volume()) : 0.0;
    OrderField init = minimizer;
    for (std::size_t i = 0; i < G.size(); ++i) init[i] += scale * v[i];
    double d;
    if (mask) {
      // Perturb the interior only; collar and exterior keep the boundary data.
      OrderField b0 = minimizer;
      for (std::size_t i = 0; i < G.size(); ++i)
        if (mask->interior(i)) b0[i] = init[i];
      d = l2_distance(minimize_Geps(model, b0, *mask, opts).field, minimizer);
    } else {
      d = distance_modulo_translation(minimizer, minimize_Feps(model, init, opts).field);
    }
    rep.distances.push_back(d);
    if (d <= 0.5 * amplitude) ++rep.returned;
  }
  rep.fraction = trials > 0 ? double(rep.returned) / trials : 1.0;
  return rep;
}

}  // namespace mfof
