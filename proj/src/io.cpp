#include "mfof/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "mfof/error.hpp"

namespace mfof::io {
namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

void write_grid(const std::string& base, const TorusGrid& grid, const std::vector<double>& values, int components,
                const std::string& kind) {
  if (values.size() != grid.size() * std::size_t(components)) throw DomainError("write_grid: size mismatch");
  std::ofstream f(base + ".bin", std::ios::binary);
  if (!f) throw ConfigError("cannot write " + base + ".bin");
  for (double v : values) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    u = to_le(u);
    f.write(reinterpret_cast<const char*>(&u), 8);
  }
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["N"] = grid.N;
  j["h"] = grid.h;
  j["components"] = components;
  j["dtype"] = "float64";
  j["endianness"] = "little";
  j["layout"] = "index = i + N*(j + N*k), components contiguous per node";
  j["file"] = base.substr(base.find_last_of('/') + 1) + ".bin";
  write_text(base + ".json", j.dump(2) + "\n");
}

std::vector<double> read_grid(const std::string& base, TorusGrid& grid, int& components) {
  std::ifstream js(base + ".json");
  if (!js) throw ConfigError("cannot read " + base + ".json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(js);
  } catch (const std::exception& e) {
    throw ConfigError(base + ".json: " + e.what());
  }
  if (j.value("dtype", "") != "float64" || j.value("endianness", "") != "little")
    throw ConfigError(base + ".json: unsupported dtype");
  grid = TorusGrid::make(j.at("N").get<int>());
  components = j.at("components").get<int>();
  std::ifstream f(base + ".bin", std::ios::binary);
  if (!f) throw ConfigError("cannot read " + base + ".bin");
  std::vector<double> out(grid.size() * std::size_t(components));
  for (auto& v : out) {
    std::uint64_t u;
    if (!f.read(reinterpret_cast<char*>(&u), 8)) throw ConfigError(base + ".bin: truncated");
    u = to_le(u);
    std::memcpy(&v, &u, 8);
  }
  return out;
}

void write_field(const std::string& base, const OrderField& b) {
  std::vector<double> v;
  v.reserve(b.size() * 5);
  for (const auto& x : b.values)
    for (int k = 0; k < 5; ++k) v.push_back(x[k]);
  write_grid(base, b.grid, v, 5, "order_parameter_sym0");
}

OrderField read_field(const std::string& base) {
  TorusGrid G;
  int c = 0;
  const std::vector<double> v = read_grid(base, G, c);
  if (c != 5) throw ConfigError(base + ": expected 5 components");
  OrderField b(G);
  for (std::size_t i = 0; i < G.size(); ++i)
    for (int k = 0; k < 5; ++k) b[i][k] = v[5 * i + k];
  return b;
}

void write_mask(const std::string& base, const DomainMask& mask) {
  std::ofstream f(base + ".bin", std::ios::binary);
  if (!f) throw ConfigError("cannot write " + base + ".bin");
  for (CellLabel l : mask.labels) {
    const char c = l == CellLabel::Interior ? 0 : l == CellLabel::Collar ? 1 : 2;
    f.put(c);
  }
  nlohmann::ordered_json j;
  j["kind"] = "mask";
  j["N"] = mask.grid.N;
  j["dtype"] = "uint8";
  j["labels"] = {{"interior", 0}, {"collar", 1}, {"exterior", 2}};
  j["epsilon"] = mask.epsilon;
  j["delta_eps"] = mask.delta_eps;
  j["n_interior"] = mask.n_interior;
  j["n_collar"] = mask.n_collar;
  j["n_exterior"] = mask.n_exterior;
  write_text(base + ".json", j.dump(2) + "\n");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\r\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + num(r[i]);
    s += "\r\n";
  }
  write_text(path, s);
}

}  // namespace mfof::io
