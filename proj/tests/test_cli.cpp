#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mfof/cli.hpp"
#include "mfof/error.hpp"
#include "mfof/io.hpp"

using namespace mfof;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfof_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mfof");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(int(argv.size()), argv.data());
}

const cli::FrankRow& row(const cli::FrankReport& r, const std::string& name) {
  for (const auto& w : r.rows)
    if (w.name == name) return w;
  FAIL("missing row " << name);
  return r.rows.front();
}
}  // namespace

TEST_CASE("config: defaults and overrides") {
  const RunConfig c = parse_config(
      "# comment\n"
      "[kernel]\n"
      "coefficients = 1, 0.5, 0.25   # trailing comment\n"
      "cutoff = 0.2\n"
      "[grid]\nN = 16\n"
      "[domain]\ngeometry = ball\nradius = 1.5\ndirector = constant:0,0,2\n"
      "[sweep]\nepsilons = 0.8, 0.4\ngrids = 16, 32\n"
      "[minimize]\ngrad_tol = 1e-7\nmax_iters = 12\n"
      "[output]\nformats = csv, raw\n");
  CHECK(c.kernel.coefficients[1] == 0.5);
  CHECK(c.kernel.cutoff == 0.2);
  CHECK(c.kernel.exponent == 6.0);
  CHECK(c.grid.N == 16);
  CHECK(c.bounded());
  CHECK(c.geometry().radius == 1.5);
  CHECK((c.director()(Vec3::Zero()) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(c.sweep.grids == std::vector<int>{16, 32});
  CHECK(c.minimize.opts.max_iters == 12);
  CHECK(c.output.wants("raw"));
  CHECK(!c.output.wants("json"));
}

TEST_CASE("config: errors carry line numbers") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[kernel]\nbogus = 1\n").find("line 2") != std::string::npos);
  CHECK(message("[kernel]\ncutoff = 1\ncutoff = 2\n").find("duplicate") != std::string::npos);
  CHECK(message("[nowhere]\n").find("unknown section") != std::string::npos);
  CHECK(message("N = 4\n").find("outside a section") != std::string::npos);
  CHECK(message("[grid]\nN = 4.5\n").find("line 2") != std::string::npos);
  CHECK(message("[grid]\nN = 7\n").find("even") != std::string::npos);
  CHECK(message("[sweep]\nepsilons = 0.2, 0.4\n").find("decreasing") != std::string::npos);
  CHECK(message("[domain]\ndirector = radial\n").find("director") != std::string::npos);
  CHECK(message("[electrostatics]\nenabled = true\nA_iso = 0.1\nA_aniso = 1\n") != "");
  CHECK(message("[kernel]\ncoefficients = 1, 2\n").find("three") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/mfof.cfg"), ConfigError);
}

TEST_CASE("frank report: unit coefficients match the tabulated ratio") {
  const cli::FrankReport r = cli::frank_report(parse_config(""));
  CHECK(r.reference_kernel);
  CHECK(!r.one_constant);
  CHECK(r.ratio == doctest::Approx(0.2).epsilon(0.05));
  CHECK(row(r, "ratio |K1-K2|/K1").flag == "MATCH");
  for (const char* g : {"G1_100", "G2_110", "G2_200", "G3_111", "G3_210", "G3_300", "K1/s*^2", "K2/s*^2"})
    CHECK(row(r, g).flag == "MATCH");
  CHECK(row(r, "k0[3] (2/3 factor)").flag == "OPEN");
  CHECK(row(r, "k0[3] (no factor)").flag == "OPEN");
  const std::string table = cli::format_frank_table(r);
  CHECK(table.find("ratio |K1-K2|/K1") != std::string::npos);
  CHECK(table.find("0.200") != std::string::npos);
}

TEST_CASE("frank report: c1-dominant bound and the one-constant flag") {
  const cli::FrankReport a = cli::frank_report(parse_config("[kernel]\ncoefficients = 1, 0.2, 0.2\n"));
  CHECK(a.ratio <= 0.3);
  CHECK(row(a, "ratio |K1-K2|/K1").flag == "BOUND");
  const cli::FrankReport b = cli::frank_report(parse_config("[kernel]\ncoefficients = 1, 0, 0\n"));
  CHECK(b.one_constant);
  CHECK(b.coeffs.K1 == doctest::Approx(b.coeffs.K2).epsilon(1e-12));
  CHECK(b.coeffs.K1 == doctest::Approx(b.coeffs.K3).epsilon(1e-12));
}

TEST_CASE("cli: frank writes the JSON artifacts with exact field names") {
  const fs::path out = scratch("frank");
  REQUIRE(run_cli({"frank", "--out", out.string()}) == cli::kOk);
  const auto m = nlohmann::json::parse(slurp(out / "moments.json"));
  for (const char* k : {"G1_100", "G2_110", "G2_200", "G3_111", "G3_210", "G3_300", "k0"}) CHECK(m.contains(k));
  const auto f = nlohmann::json::parse(slurp(out / "frank.json"));
  for (const char* k : {"L1", "L2", "L3", "K1", "K2", "K3"}) CHECK(f.contains(k));
  CHECK(f["K1"].get<double>() == f["K3"].get<double>());
  CHECK(fs::exists(out / "frank_table.txt"));
  fs::remove_all(out);
}

TEST_CASE("cli: bulk with k0 = 0 is isotropic") {
  const fs::path out = scratch("bulk");
  const fs::path cfg = scratch("bulk.cfg");
  io::write_text(cfg.string(), "[bulk]\nk0_override = 0\n");
  REQUIRE(run_cli({"bulk", "--config", cfg.string(), "--out", out.string()}) == cli::kOk);
  const auto j = nlohmann::json::parse(slurp(out / "bulk.json"));
  CHECK(j["s_star"].get<double>() == 0.0);
  CHECK(j["c5"].get<double>() == doctest::Approx(-std::log(4 * M_PI)).epsilon(1e-10));
  fs::remove_all(out);
  fs::remove(cfg);
}

TEST_CASE("cli: exit codes") {
  const fs::path cfg = scratch("exit.cfg");
  const fs::path out = scratch("exit");
  io::write_text(cfg.string(), "[kernel]\ncoefficients = 1, -5, 0\n");
  CHECK(run_cli({"validate", "--config", cfg.string(), "--out", out.string()}) == cli::kInvalid);
  io::write_text(cfg.string(), "[kernel]\nunknown = 3\n");
  CHECK(run_cli({"bulk", "--config", cfg.string(), "--out", out.string()}) == cli::kInvalid);
  CHECK(run_cli({"validate", "--out", out.string()}) == cli::kOk);
  CHECK(run_cli({"nosuchcommand"}) == cli::kInvalid);
  io::write_text(cfg.string(), "[grid]\nN = 8\n[minimize]\nepsilon = 0.1\n");
  CHECK(run_cli({"minimize", "--config", cfg.string(), "--out", out.string()}) == cli::kInvalid);
  fs::remove_all(out);
  fs::remove(cfg);
}

TEST_CASE("cli: psi CSV columns and reruns are byte-identical") {
  const fs::path cfg = scratch("psi.cfg");
  io::write_text(cfg.string(), "[bulk]\npsi_points = 9\n");
  const fs::path a = scratch("psi_a"), b = scratch("psi_b");
  REQUIRE(run_cli({"psi", "--config", cfg.string(), "--out", a.string()}) == cli::kOk);
  REQUIRE(run_cli({"psi", "--config", cfg.string(), "--out", b.string()}) == cli::kOk);
  const std::string s = slurp(a / "psi.csv");
  CHECK(s.rfind("s,psi_s,psi,lambda_norm\r\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 10);
  CHECK(s == slurp(b / "psi.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove(cfg);
}

TEST_CASE("cli: minimize and estat runs are reproducible") {
  const fs::path cfg = scratch("min.cfg");
  io::write_text(cfg.string(),
                 "[kernel]\ncoefficients = 0.0013, 0.0013, 0.0013\n[grid]\nN = 8\n"
                 "[minimize]\nepsilon = 0.8\nmax_iters = 10\nnoise = 0.01\n[output]\nformats = csv, json, raw\n");
  const fs::path a = scratch("min_a"), b = scratch("min_b");
  REQUIRE(run_cli({"minimize", "--config", cfg.string(), "--out", a.string(), "--seed", "4"}) == cli::kOk);
  REQUIRE(run_cli({"minimize", "--config", cfg.string(), "--out", b.string(), "--seed", "4"}) == cli::kOk);
  for (const char* f : {"minimize.json", "trace.csv", "field.bin", "field.json"}) CHECK(slurp(a / f) == slurp(b / f));
  const OrderField field = io::read_field((a / "field").string());
  CHECK(field.grid.N == 8);

  io::write_text(cfg.string(),
                 "[grid]\nN = 16\n[domain]\ngeometry = box\nlo = 1, 1, 1\nhi = 5, 5, 5\n"
                 "[electrostatics]\nenabled = true\nphi0 = linear:1,0,0\n");
  REQUIRE(run_cli({"estat", "--config", cfg.string(), "--out", a.string()}) == cli::kOk);
  const auto j = nlohmann::json::parse(slurp(a / "estat.json"));
  CHECK(j["E"].get<double>() == doctest::Approx(-32.0).epsilon(1e-10));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove(cfg);
}

TEST_CASE("io: grid round trip and mask labels") {
  const TorusGrid G = TorusGrid::make(4);
  OrderField b(G);
  for (std::size_t i = 0; i < G.size(); ++i)
    for (int k = 0; k < 5; ++k) b[i][k] = 1e-3 * double(i) - 0.1 * k + 1.0 / 3.0;
  const fs::path d = scratch("io");
  fs::create_directories(d);
  io::write_field((d / "b").string(), b);
  CHECK(fs::file_size(d / "b.bin") == G.size() * 5 * 8);
  const OrderField c = io::read_field((d / "b").string());
  CHECK(l2_distance(b, c) == 0.0);
  io::write_csv((d / "t.csv").string(), {"a", "b"}, {{0.1, 2.0}});
  CHECK(slurp(d / "t.csv") == "a,b\r\n0.10000000000000001,2\r\n");
  fs::remove_all(d);
}
