#include "slicer/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slicer/errors.hpp"

namespace slicer {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

CsvTable read_csv(const std::string& path, std::size_t expected_columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line_no == 1) {
            table.header = cells;
            if (cells.size() != expected_columns)
                throw ConfigError(path + ": line 1: expected " +
                                  std::to_string(expected_columns) + " columns");
            continue;
        }
        std::vector<double> row;
        for (const std::string& c : cells) {
            double v = 0.0;
            const char* first = c.data();
            const char* last = c.data() + c.size();
            while (first != last && *first == ' ') ++first;
            const auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc{} || res.ptr != last)
                throw ConfigError(path + ": line " + std::to_string(line_no) +
                                  ": malformed number '" + c + "'");
            row.push_back(v);
        }
        if (row.size() != expected_columns)
            throw ConfigError(path + ": line " + std::to_string(line_no) +
                              ": expected " + std::to_string(expected_columns) +
                              " columns");
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty())
        throw ConfigError(path + ": no data rows");
    return table;
}

void write_pgm16(const std::string& path, const ImageGrid& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "P5\n" << img.pixels << ' ' << img.pixels << "\n65535\n";
    std::vector<unsigned char> bytes;
    bytes.reserve(img.data.size() * 2);
    // rows are y from top; x runs left to right
    for (int iy = img.pixels - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < img.pixels; ++ix) {
            const double v = std::clamp(img.at(ix, iy), 0.0, 1.0);
            const auto q = static_cast<unsigned>(std::lround(v * 65535.0));
            bytes.push_back(static_cast<unsigned char>(q >> 8));
            bytes.push_back(static_cast<unsigned char>(q & 0xff));
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("write failed: " + path);
}

void write_svg_plot(const std::string& path, const CsvTable& table) {
    if (table.rows.empty() || table.header.size() < 2)
        throw ConfigError("svg plot: need at least two columns");
    const int w = 800, h = 500, margin = 50;
    double xmin = table.rows.front()[0], xmax = xmin;
    double ymin = table.rows.front()[1], ymax = ymin;
    for (const auto& row : table.rows) {
        xmin = std::min(xmin, row[0]);
        xmax = std::max(xmax, row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) continue;
            ymin = std::min(ymin, row[c]);
            ymax = std::max(ymax, row[c]);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    auto px = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin);
    };
    auto py = [&](double y) {
        return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin);
    };
    static const char* colors[] = {"#1f6fb4", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2"};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
        << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\""
        << w - margin << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[(c - 1) % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : table.rows) {
            if (c < row.size() && std::isfinite(row[c]))
                out << format_double(px(row[0])) << ',' << format_double(py(row[c])) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << w - margin + 5 << "\" y=\"" << margin + 16 * c
            << "\" font-size=\"11\" fill=\"" << colors[(c - 1) % 6] << "\">"
            << table.header[c] << "</text>\n";
    }
    out << "<text x=\"" << margin << "\" y=\"" << h - margin + 30
        << "\" font-size=\"11\">" << table.header[0] << ": "
        << format_double(xmin) << " .. " << format_double(xmax) << "</text>\n";
    out << "<text x=\"" << margin << "\" y=\"" << margin - 10
        << "\" font-size=\"11\">" << format_double(ymin) << " .. "
        << format_double(ymax) << "</text>\n";
    out << "</svg>\n";
    if (!out) throw ConfigError("write failed: " + path);
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace slicer
