#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmmd/dataset.hpp"
#include "cmmd/errors.hpp"

namespace cmmd {

/// Shortest decimal representation that round-trips a double exactly.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        // try to shorten
        for (int prec = 1; prec < 17; ++prec) {
            char b2[64];
            std::snprintf(b2, sizeof(b2), "%.*g", prec, v);
            double r = 0.0;
            std::sscanf(b2, "%lf", &r);
            if (r == v) return b2;
        }
    }
    return buf;
}

/// Writes `content` to `path` atomically: temp file in the same directory,
/// then rename. No partial file survives a failure.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("rename failed for " + path.string() + ": " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Dataset CSV: header `x1,...,xk,y1..`, one row per replication, LF newlines.
inline std::string dataset_to_csv(const Dataset& data) {
    std::string out;
    const std::size_t xd = data.input_dim();
    const std::size_t yd = data.output_dim();
    for (std::size_t c = 0; c < xd; ++c) out += "x" + std::to_string(c + 1) + ",";
    if (yd <= 1) {
        out += "y\n";
    } else {
        for (std::size_t c = 0; c < yd; ++c) {
            out += "y" + std::to_string(c + 1);
            out += (c + 1 < yd) ? ',' : '\n';
        }
    }
    for (std::size_t i = 0; i < data.design_points.size(); ++i) {
        for (const auto& y : data.replications[i]) {
            for (std::size_t c = 0; c < xd; ++c) {
                out += format_double(data.design_points[i][c]);
                out += ',';
            }
            for (std::size_t c = 0; c < y.size(); ++c) {
                out += format_double(y[c]);
                out += (c + 1 < y.size()) ? ',' : '\n';
            }
        }
    }
    return out;
}

inline Dataset dataset_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t xd = 0, yd = 0;
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (!col.empty() && col[0] == 'x')
                ++xd;
            else if (!col.empty() && col[0] == 'y')
                ++yd;
            else
                throw IoError("dataset csv: unexpected column '" + col + "'");
        }
    }
    if (yd == 0) throw IoError("dataset csv: no output column");
    Dataset data;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        Vector row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("dataset csv: bad number at line " + std::to_string(lineno));
            }
        }
        if (row.size() != xd + yd)
            throw IoError("dataset csv: wrong field count at line " + std::to_string(lineno));
        Vector x(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(xd));
        Vector y(row.begin() + static_cast<std::ptrdiff_t>(xd), row.end());
        if (!data.design_points.empty() && data.design_points.back() == x) {
            data.replications.back().push_back(std::move(y));
        } else {
            data.design_points.push_back(std::move(x));
            data.replications.push_back({std::move(y)});
        }
    }
    if (data.design_points.empty()) throw IoError("dataset csv: no data rows");
    return data;
}

}  // namespace cmmd
