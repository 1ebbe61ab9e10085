#include "wca/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace wca {

std::string fmt_double(double v) {
    char buf[40];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%.0f", v);
    } else {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
    }
    return buf;
}

CsvWriter::CsvWriter(std::string config_hash, std::uint64_t seed) {
    out_ += "# config=" + config_hash + " seed=" + std::to_string(seed) + "\n";
}

void CsvWriter::comment(const std::string& text) {
    if (row_open_) throw std::logic_error("CsvWriter: comment inside a row");
    out_ += "# " + text + "\n";
}

void CsvWriter::header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out_ += ",";
        out_ += cols[i];
    }
    out_ += "\n";
}

void CsvWriter::cell(const std::string& v) {
    if (row_open_) out_ += ",";
    out_ += v;
    row_open_ = true;
}

void CsvWriter::cell(double v) { cell(fmt_double(v)); }

void CsvWriter::cell(std::int64_t v) { cell(std::to_string(v)); }

void CsvWriter::end_row() {
    out_ += "\n";
    row_open_ = false;
}

void CsvWriter::write_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("CsvWriter: cannot open " + path);
    os << out_;
    if (!os) throw std::runtime_error("CsvWriter: write failed for " + path);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wca
