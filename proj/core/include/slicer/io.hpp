#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicer/specimg.hpp"

namespace slicer {

// Locale-independent number formatting (shortest round-trip via to_chars);
// identical inputs give identical bytes.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

// Reads a two-column CSV (t_s, n) with a header row; reports the offending
// line number on malformed input.
CsvTable read_csv(const std::string& path, std::size_t expected_columns);

// 16-bit binary PGM, most significant byte first, values scaled from [0,1].
void write_pgm16(const std::string& path, const ImageGrid& img);

// Simple polyline plot of CSV-style columns, y columns against column 0.
void write_svg_plot(const std::string& path, const CsvTable& table);

std::uint64_t fnv1a_hash(const std::string& bytes);

} // namespace slicer
