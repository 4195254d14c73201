#include "mfof/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mfof/error.hpp"

namespace mfof {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_real(const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("not a number: '" + v + "'");
  return x;
}

int to_int(const std::string& v) {
  const double x = to_real(v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("not an integer: '" + v + "'");
  return int(x);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

std::vector<double> to_reals(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(to_real(s));
  return out;
}

Vec3 to_vec3(const std::string& v) {
  const auto x = to_reals(v);
  if (x.size() != 3) throw ConfigError("expected three comma-separated numbers: '" + v + "'");
  return Vec3(x[0], x[1], x[2]);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& table() {
  static const std::map<std::string, std::map<std::string, Setter>> t = {
      {"kernel",
       {{"profile", [](RunConfig& c, const std::string& v) { c.kernel.profile = v; }},
        {"coefficients",
         [](RunConfig& c, const std::string& v) {
           const auto x = to_reals(v);
           if (x.size() != 3) throw ConfigError("coefficients needs three values");
           c.kernel.coefficients = {x[0], x[1], x[2]};
         }},
        {"exponent", [](RunConfig& c, const std::string& v) { c.kernel.exponent = to_real(v); }},
        {"cutoff", [](RunConfig& c, const std::string& v) { c.kernel.cutoff = to_real(v); }},
        {"truncation", [](RunConfig& c, const std::string& v) { c.kernel.truncation = to_real(v); }},
        {"M_bound", [](RunConfig& c, const std::string& v) { c.kernel.M_bound = to_real(v); }},
        {"radial_nodes", [](RunConfig& c, const std::string& v) { c.kernel.radial_nodes = to_int(v); }},
        {"angular_order", [](RunConfig& c, const std::string& v) { c.kernel.angular_order = to_int(v); }}}},
      {"bulk",
       {{"auto_k0", [](RunConfig& c, const std::string& v) { c.bulk.auto_k0 = to_bool(v); }},
        {"k0_override",
         [](RunConfig& c, const std::string& v) {
           c.bulk.k0_override = to_real(v);
           c.bulk.auto_k0 = false;
         }},
        {"delta", [](RunConfig& c, const std::string& v) { c.bulk.delta = to_real(v); }},
        {"maxent_tol", [](RunConfig& c, const std::string& v) { c.bulk.maxent_tol = to_real(v); }},
        {"psi_points", [](RunConfig& c, const std::string& v) { c.bulk.psi_points = to_int(v); }}}},
      {"grid", {{"N", [](RunConfig& c, const std::string& v) { c.grid.N = to_int(v); }}}},
      {"domain",
       {{"geometry", [](RunConfig& c, const std::string& v) { c.domain.geometry = v; }},
        {"center", [](RunConfig& c, const std::string& v) { c.domain.center = to_vec3(v); }},
        {"radius", [](RunConfig& c, const std::string& v) { c.domain.radius = to_real(v); }},
        {"lo", [](RunConfig& c, const std::string& v) { c.domain.lo = to_vec3(v); }},
        {"hi", [](RunConfig& c, const std::string& v) { c.domain.hi = to_vec3(v); }},
        {"alpha", [](RunConfig& c, const std::string& v) { c.domain.alpha = to_real(v); }},
        {"c6", [](RunConfig& c, const std::string& v) { c.domain.c6 = to_real(v); }},
        {"c7", [](RunConfig& c, const std::string& v) { c.domain.c7 = to_real(v); }},
        {"delta1", [](RunConfig& c, const std::string& v) { c.domain.delta1 = to_real(v); }},
        {"director", [](RunConfig& c, const std::string& v) { c.domain.director = v; }}}},
      {"electrostatics",
       {{"enabled", [](RunConfig& c, const std::string& v) { c.estat.enabled = to_bool(v); }},
        {"A_iso", [](RunConfig& c, const std::string& v) { c.estat.A_iso = to_real(v); }},
        {"A_aniso", [](RunConfig& c, const std::string& v) { c.estat.A_aniso = to_real(v); }},
        {"phi0", [](RunConfig& c, const std::string& v) { c.estat.phi0 = v; }},
        {"cg_tol", [](RunConfig& c, const std::string& v) { c.estat.cg_tol = to_real(v); }},
        {"cg_maxiter", [](RunConfig& c, const std::string& v) { c.estat.cg_maxiter = to_int(v); }}}},
      {"sweep",
       {{"epsilons", [](RunConfig& c, const std::string& v) { c.sweep.epsilons = to_reals(v); }},
        {"grids",
         [](RunConfig& c, const std::string& v) {
           c.sweep.grids.clear();
           for (const auto& x : split(v, ',')) c.sweep.grids.push_back(to_int(x));
         }},
        {"min_eps_over_h", [](RunConfig& c, const std::string& v) { c.sweep.min_eps_over_h = to_real(v); }}}},
      {"minimize",
       {{"epsilon", [](RunConfig& c, const std::string& v) { c.minimize.epsilon = to_real(v); }},
        {"step0", [](RunConfig& c, const std::string& v) { c.minimize.opts.step0 = to_real(v); }},
        {"backtrack", [](RunConfig& c, const std::string& v) { c.minimize.opts.backtrack = to_real(v); }},
        {"grad_tol", [](RunConfig& c, const std::string& v) { c.minimize.opts.grad_tol = to_real(v); }},
        {"max_iters", [](RunConfig& c, const std::string& v) { c.minimize.opts.max_iters = to_int(v); }},
        {"delta", [](RunConfig& c, const std::string& v) { c.minimize.opts.delta = to_real(v); }},
        {"roundoff", [](RunConfig& c, const std::string& v) { c.minimize.opts.roundoff = to_real(v); }},
        {"init", [](RunConfig& c, const std::string& v) { c.minimize.init = v; }},
        {"noise", [](RunConfig& c, const std::string& v) { c.minimize.noise = to_real(v); }},
        {"director_max_iters", [](RunConfig& c, const std::string& v) { c.minimize.director_max_iters = to_int(v); }},
        {"director_grad_tol",
         [](RunConfig& c, const std::string& v) { c.minimize.director_grad_tol = to_real(v); }}}},
      {"output",
       {{"directory", [](RunConfig& c, const std::string& v) { c.output.directory = v; }},
        {"formats", [](RunConfig& c, const std::string& v) { c.output.formats = split(v, ','); }}}},
  };
  return t;
}

void validate(const RunConfig& c) {
  if (c.kernel.profile != "inverse_power" && c.kernel.profile != "zero")
    throw ConfigError("kernel.profile must be inverse_power or zero");
  if (c.kernel.profile == "inverse_power" && !(c.kernel.cutoff > 0))
    throw ConfigError("kernel.cutoff must be positive");
  if (c.grid.N < 4 || c.grid.N % 2) throw ConfigError("grid.N must be even and at least 4");
  if (c.domain.geometry != "torus" && c.domain.geometry != "ball" && c.domain.geometry != "box")
    throw ConfigError("domain.geometry must be torus, ball or box");
  if (c.bulk.psi_points < 2) throw ConfigError("bulk.psi_points must be at least 2");
  if (!c.bulk.auto_k0 && !(c.bulk.k0_override >= 0)) throw ConfigError("bulk.k0_override must be nonnegative");
  if (c.sweep.epsilons.empty()) throw ConfigError("sweep.epsilons is empty");
  for (std::size_t i = 0; i < c.sweep.epsilons.size(); ++i) {
    if (!(c.sweep.epsilons[i] > 0)) throw ConfigError("sweep.epsilons must be positive");
    if (i && !(c.sweep.epsilons[i] < c.sweep.epsilons[i - 1]))
      throw ConfigError("sweep.epsilons must be strictly decreasing");
  }
  if (!c.sweep.grids.empty() && c.sweep.grids.size() != 1 && c.sweep.grids.size() != c.sweep.epsilons.size())
    throw ConfigError("sweep.grids needs one value or one per epsilon");
  if (!(c.minimize.epsilon > 0)) throw ConfigError("minimize.epsilon must be positive");
  if (c.minimize.init != "lift" && c.minimize.init != "random") throw ConfigError("minimize.init must be lift or random");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json" && f != "raw") throw ConfigError("output.formats: unknown format '" + f + "'");
  c.minimize.opts.check();
  if (c.estat.enabled) c.electrostatics().check();
  c.director();  // parses the director spec
}

}  // namespace

bool RunConfig::Output::wants(const std::string& f) const {
  for (const auto& g : formats)
    if (g == f) return true;
  return false;
}

KernelSpec RunConfig::kernel_spec() const {
  if (kernel.profile == "zero") return KernelSpec{};
  KernelSpec s = KernelSpec::inverse_power(kernel.coefficients[0], kernel.coefficients[1], kernel.coefficients[2],
                                           kernel.exponent, kernel.cutoff, kernel.truncation);
  s.M_bound = kernel.M_bound;
  return s;
}

QuadratureSpec RunConfig::quadrature() const {
  QuadratureSpec q;
  q.radial_nodes = kernel.radial_nodes;
  q.angular_order = kernel.angular_order;
  return q;
}

MaxEntOptions RunConfig::maxent() const {
  MaxEntOptions o;
  o.tol = bulk.maxent_tol;
  return o;
}

MaskParams RunConfig::mask_params() const {
  MaskParams p;
  p.alpha = domain.alpha;
  p.c6 = domain.c6;
  p.c7 = domain.c7;
  p.delta1 = domain.delta1;
  return p;
}

Geometry RunConfig::geometry() const {
  if (domain.geometry == "ball") return Geometry::ball(domain.center, domain.radius);
  if (domain.geometry == "box") return Geometry::box(domain.lo, domain.hi);
  throw ConfigError("the torus has no bounded geometry");
}

DirectorFn RunConfig::director() const {
  const std::string& d = domain.director;
  if (d == "twist") return [](const Vec3& x) { return Vec3(std::cos(x[2]), std::sin(x[2]), 0); };
  if (d == "splay_bend") return [](const Vec3& x) { return Vec3(std::sin(x[2]), 0, std::cos(x[2])); };
  if (d.rfind("constant:", 0) == 0) {
    const Vec3 n = to_vec3(d.substr(9));
    if (n.norm() == 0) throw ConfigError("constant director must be nonzero");
    const Vec3 u = n.normalized();
    return [u](const Vec3&) { return u; };
  }
  throw ConfigError("domain.director must be twist, splay_bend or constant:x,y,z");
}

ElectrostaticConfig RunConfig::electrostatics() const {
  ElectrostaticConfig e;
  e.enabled = estat.enabled;
  e.A_iso = estat.A_iso;
  e.A_aniso = estat.A_aniso;
  e.phi0 = parse_phi0(estat.phi0);
  e.cg_tol = estat.cg_tol;
  e.cg_maxiter = estat.cg_maxiter;
  return e;
}

double RunConfig::k0() const { return bulk.auto_k0 ? moments(kernel_spec(), quadrature()).k0 : bulk.k0_override; }

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!table().count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside a section");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    const auto& keys = table().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(c, val);
    } catch (const ConfigError& e) {
      throw ConfigError(where + section + "." + key + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mfof
