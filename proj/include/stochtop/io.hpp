#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochtop/field_ops.hpp"
#include "stochtop/optimizer.hpp"

namespace stochtop {

/// Binary PGM (P5) image of a density field, one pixel per element,
/// row-major, dark = solid (pixel value = 255 * (1 - density)).
inline void export_design(const Field& xPhys, int nely, int nelx, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export_design: cannot open " + path);
    out << "P5\n" << nelx << " " << nely << "\n255\n";
    for (int r = 0; r < nely; ++r)
        for (int c = 0; c < nelx; ++c) {
            const double v = (1.0 - xPhys[c * nely + r]) * 255.0;
            const int byte = std::max(0, std::min(255, static_cast<int>(std::lround(v))));
            out.put(static_cast<char>(byte));
        }
    if (!out) throw std::runtime_error("export_design: write failed for " + path);
}

/// Parse a P5 file back into densities (inverse of export_design up to the
/// 8-bit quantization).
inline Field import_design(const std::string& path, int& nely, int& nelx) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("import_design: cannot open " + path);
    std::string magic;
    int maxval = 0;
    in >> magic >> nelx >> nely >> maxval;
    if (magic != "P5" || maxval != 255)
        throw std::runtime_error("import_design: not an 8-bit P5 file: " + path);
    in.get();  // single whitespace after the header
    Field x(static_cast<Eigen::Index>(nely) * nelx);
    for (int r = 0; r < nely; ++r)
        for (int c = 0; c < nelx; ++c) {
            const int byte = in.get();
            if (byte < 0) throw std::runtime_error("import_design: truncated file " + path);
            x[c * nely + r] = 1.0 - byte / 255.0;
        }
    return x;
}

/// Plain-text density dump, one value per line, row-major.
inline void write_field_txt(const Field& x, int nely, int nelx, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_txt: cannot open " + path);
    char buf[32];
    for (int r = 0; r < nely; ++r)
        for (int c = 0; c < nelx; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", x[c * nely + r]);
            out << buf;
        }
}

inline Field read_field_txt(const std::string& path, int nely, int nelx) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_field_txt: cannot open " + path);
    Field x(static_cast<Eigen::Index>(nely) * nelx);
    for (int r = 0; r < nely; ++r)
        for (int c = 0; c < nelx; ++c)
            if (!(in >> x[c * nely + r]))
                throw std::runtime_error("read_field_txt: short file " + path);
    return x;
}

inline std::string format_record(const IterationRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.loop,
                  r.Compl, r.Cp, r.volume, r.penal, r.beta, r.eta, r.wall_ms);
    return buf;
}

constexpr const char* kHistoryHeader = "loop,Compl,Cp,volume,penal,beta,eta,wall_ms";

inline void export_history(const std::vector<IterationRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_history: cannot open " + path);
    out << kHistoryHeader << "\n";
    for (const auto& r : records) out << format_record(r) << "\n";
}

inline std::vector<IterationRecord> parse_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_history: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHistoryHeader)
        throw std::runtime_error("parse_history: bad header in " + path);
    std::vector<IterationRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        IterationRecord r;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        if (!(ss >> r.loop >> r.Compl >> r.Cp >> r.volume >> r.penal >> r.beta >> r.eta >>
              r.wall_ms))
            throw std::runtime_error("parse_history: bad row in " + path);
        records.push_back(r);
    }
    return records;
}

/// Streaming history writer; each appended record is flushed so running
/// jobs stay inspectable.
class HistoryWriter {
public:
    explicit HistoryWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("HistoryWriter: cannot open " + path);
        out_ << kHistoryHeader << "\n" << std::flush;
    }
    void append(const IterationRecord& r) { out_ << format_record(r) << "\n" << std::flush; }

private:
    std::ofstream out_;
};

/// One 1-based node index per line.
inline void write_dataset(const std::vector<int>& nodes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
    for (int v : nodes) out << v << "\n";
}

inline std::vector<int> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_dataset: cannot open " + path);
    std::vector<int> nodes;
    int v;
    while (in >> v) nodes.push_back(v);
    if (nodes.empty()) throw std::runtime_error("read_dataset: empty dataset " + path);
    return nodes;
}

}  // namespace stochtop
