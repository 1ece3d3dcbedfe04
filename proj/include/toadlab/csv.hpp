#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/grid.hpp"
#include "toadlab/version.hpp"

namespace toadlab {

// CSV / snapshot emission. Every file starts with '#'-prefixed header
// comments carrying the library version and the config hash, so outputs are
// traceable to the run that produced them. Numbers are printed with %.17g,
// which round-trips doubles and keeps byte-identical reruns.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash) : out_(path) {
        if (!out_) throw config_error("cannot open output file: " + path);
        out_ << "# " << kVersion << "\n";
        out_ << "# config_hash = " << config_hash << "\n";
    }

    void comment(const std::string& key, const std::string& value) {
        out_ << "# " << key << " = " << value << "\n";
    }
    void comment(const std::string& key, double value) { comment(key, format_double(value)); }

    void columns(const std::string& header) { out_ << header << "\n"; }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << format_double(values[i]);
        }
        out_ << "\n";
    }

    void raw(const std::string& line) { out_ << line << "\n"; }

private:
    std::ofstream out_;
};

// Self-describing snapshot: header comments with time/grid/hash, then one
// line of nx comma-separated values per theta node.
inline void write_snapshot(const std::string& path, const Field2D& f,
                           const std::string& config_hash) {
    CsvWriter w(path, config_hash);
    w.comment("time", f.time);
    w.comment("x_min", f.grid.x_min);
    w.comment("x_max", f.grid.x_max);
    w.comment("theta_min", f.grid.theta_min);
    w.comment("theta_max", f.grid.theta_max);
    w.comment("nx", static_cast<double>(f.grid.nx));
    w.comment("ntheta", static_cast<double>(f.grid.ntheta));
    w.comment("layout", "one line per theta node, nx values each");
    std::vector<double> row(f.grid.nx);
    for (int j = 0; j < f.grid.ntheta; ++j) {
        for (int i = 0; i < f.grid.nx; ++i) row[i] = f.at(i, j);
        w.row(row);
    }
}

struct ParsedTable {
    std::map<std::string, std::string> header;
    std::vector<std::vector<double>> rows;
};

inline ParsedTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open file: " + path);
    ParsedTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string val = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    const auto a = s.find_first_not_of(" \t");
                    const auto b = s.find_last_not_of(" \t\r");
                    s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
                };
                trim(key);
                trim(val);
                t.header[key] = val;
            }
            continue;
        }
        if (line.find_first_not_of("0123456789+-.eEnaif, \t\r") != std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
            row.push_back(std::stod(cell));
        }
        if (!row.empty()) t.rows.push_back(std::move(row));
    }
    return t;
}

inline Field2D read_snapshot(const std::string& path) {
    const ParsedTable t = read_table(path);
    GridSpec g;
    auto get = [&](const std::string& key) {
        const auto it = t.header.find(key);
        if (it == t.header.end()) throw config_error("snapshot missing header key: " + key);
        return std::stod(it->second);
    };
    g.x_min = get("x_min");
    g.x_max = get("x_max");
    g.theta_min = get("theta_min");
    g.theta_max = get("theta_max");
    g.nx = static_cast<int>(get("nx"));
    g.ntheta = static_cast<int>(get("ntheta"));
    Field2D f(g, get("time"));
    if (static_cast<int>(t.rows.size()) != g.ntheta)
        throw config_error("snapshot row count does not match ntheta: " + path);
    for (int j = 0; j < g.ntheta; ++j) {
        if (static_cast<int>(t.rows[j].size()) != g.nx)
            throw config_error("snapshot column count does not match nx: " + path);
        for (int i = 0; i < g.nx; ++i) f.at(i, j) = t.rows[j][i];
    }
    return f;
}

} // namespace toadlab
