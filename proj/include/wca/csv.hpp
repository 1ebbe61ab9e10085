#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wca {

/// Deterministic %.17g rendering; integers print without exponent noise.
std::string fmt_double(double v);

/// CSV emitter: LF endings, comment header with config hash and seed so runs
/// are attributable. Numeric cells go through fmt_double.
class CsvWriter {
public:
    CsvWriter(std::string config_hash, std::uint64_t seed);

    void comment(const std::string& text);
    void header(const std::vector<std::string>& cols);
    void cell(const std::string& v);
    void cell(double v);
    void cell(std::int64_t v);
    void end_row();

    const std::string& str() const { return out_; }
    void write_file(const std::string& path) const;

private:
    std::string out_;
    bool row_open_ = false;
};

std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

}  // namespace wca
