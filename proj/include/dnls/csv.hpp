#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

// 17 significant digits: doubles round-trip exactly.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

struct CsvWriter {
    std::ostringstream body;
    explicit CsvWriter(const std::string& header) { body << header << "\n"; }

    template <class... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((body << (first ? "" : ","), body << cell_str(cells), first = false), ...);
        body << "\n";
    }

    static std::string cell_str(double v) { return fmt(v); }
    static std::string cell_str(std::size_t v) { return fmt(v); }
    static std::string cell_str(int v) { return fmt(v); }
    static std::string cell_str(const std::string& s) { return s; }
    static std::string cell_str(const char* s) { return s; }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << body.str();
    }
    std::string str() const { return body.str(); }
};

// EvenField file format: header "x,re,im", one row per node, x ascending.
inline void save_field(const std::string& path, const HalfLineGrid& g, const EvenField& u) {
    check_field(g, u);
    CsvWriter w("x,re,im");
    for (std::size_t j = 0; j < u.size(); ++j)
        w.row(g.x(j), u[j].real(), u[j].imag());
    w.save(path);
}

inline EvenField load_field(const std::string& path, const HalfLineGrid& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,re,im", 0) != 0)
        throw std::runtime_error("bad field file header in " + path);
    std::vector<cplx> vals;
    vals.reserve(g.nodes());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cx, cre, cim;
        if (!std::getline(ss, cx, ',') || !std::getline(ss, cre, ',') || !std::getline(ss, cim, ','))
            throw std::runtime_error("bad field row in " + path);
        vals.emplace_back(std::stod(cre), std::stod(cim));
    }
    if (vals.size() != g.nodes())
        throw std::runtime_error("field file node count does not match grid");
    return EvenField(std::move(vals));
}

} // namespace dnls
