#pragma once

// Minimal comma-separated numeric tables: optional '#' comment lines, one
// mandatory header row, '.' decimal separator.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracmono/errors.hpp"
#include "fracmono/monops.hpp"

namespace fracmono::io {

struct Table {
    std::vector<std::string> comments;  ///< without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument(where + ": not a number: '" + s + "'");
    }
    if (pos != s.size()) throw InvalidArgument(where + ": not a number: '" + s + "'");
    return v;
}

inline Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    Table t;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.substr(1));
            continue;
        }
        auto cells = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.header.size()) + " columns");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_number(c, path + ":" + std::to_string(lineno)));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw InvalidArgument(path + ": missing header row");
    return t;
}

inline Matrix read_matrix(const std::string& path) {
    const Table t = read_table(path);
    Matrix M(static_cast<long>(t.rows.size()), static_cast<long>(t.header.size()));
    for (long i = 0; i < M.rows(); ++i)
        for (long j = 0; j < M.cols(); ++j) M(i, j) = t.rows[i][j];
    return M;
}

/// A vector stored either as one column or as one row.
inline HVector read_vector(const std::string& path) {
    const Matrix M = read_matrix(path);
    if (M.cols() == 1) return M.col(0);
    if (M.rows() == 1) return M.row(0).transpose();
    throw InvalidArgument(path + ": expected a single row or column");
}

}  // namespace fracmono::io
