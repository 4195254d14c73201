#pragma once

#include <string>
#include <vector>

#include "mfof/field.hpp"

namespace mfof::io {

// <base>.bin holds little-endian float64 values, node-major (x fastest), `components` per node;
// <base>.json describes N, h, components, dtype and layout.
void write_grid(const std::string& base, const TorusGrid& grid, const std::vector<double>& values, int components,
                const std::string& kind);
std::vector<double> read_grid(const std::string& base, TorusGrid& grid, int& components);

void write_field(const std::string& base, const OrderField& b);
OrderField read_field(const std::string& base);

// One byte per cell: 0 interior, 1 collar, 2 exterior.
void write_mask(const std::string& base, const DomainMask& mask);

// Formats a double with 17 significant digits.
std::string num(double v);

// RFC-4180 CSV: header plus rows, CRLF line ends.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& text);

}  // namespace mfof::io
