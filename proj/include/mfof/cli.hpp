#pragma once

#include <string>
#include <vector>

#include "mfof/config.hpp"
#include "mfof/kernel.hpp"

namespace mfof::cli {

enum ExitCode { kOk = 0, kInvalid = 2, kNumerical = 3 };

struct FrankRow {
  std::string name;
  double computed = 0;
  double reference = 0;  // NaN: no reference value
  double deviation = 0;  // relative
  std::string flag;      // MATCH, DEVIATES, BOUND, OPEN or n/a
};

struct FrankReport {
  MomentTable moments;
  ElasticCoefficients coeffs;  // per unit s*^2
  std::vector<FrankRow> rows;
  double ratio = 0;            // |K1 - K2| / K1
  bool one_constant = false;
  bool reference_kernel = false;  // r^-6 profile, cutoff 0.1, untruncated
};

FrankReport frank_report(const RunConfig& cfg);
std::string format_frank_table(const FrankReport& r);

// Each command writes into `out` (created if missing) and returns an exit code.
int cmd_validate(const RunConfig& cfg, const std::string& out);
int cmd_frank(const RunConfig& cfg, const std::string& out);
int cmd_psi(const RunConfig& cfg, const std::string& out);
int cmd_bulk(const RunConfig& cfg, const std::string& out);
int cmd_minimize(const RunConfig& cfg, const std::string& out);
int cmd_sweep(const RunConfig& cfg, const std::string& out);
int cmd_estat(const RunConfig& cfg, const std::string& out);

// Parses argv, dispatches, and maps ConfigError/DomainError to 2 and NumericalError to 3.
int run(int argc, char** argv);

}  // namespace mfof::cli
