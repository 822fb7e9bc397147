#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace execq {

// Shortest round-trip decimal representation (std::to_chars), so output
// files are byte-deterministic and parse back to the same double.
std::string format_double(double v);

// Buffered CSV writer; numeric and enum columns only, no quoting.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    std::string str() const { return body_; }
    void write_file(const std::filesystem::path& path) const;

private:
    std::size_t columns_;
    std::string body_;
};

// FNV-1a 64-bit content hash, reported in manifests.
std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

}  // namespace execq
