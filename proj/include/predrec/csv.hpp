#pragma once

// Small CSV and text helpers shared by the I/O layer and the CLI.
// No quoting support: every format in this project uses plain tokens.

#include <cstdint>
#include <string>
#include <vector>

namespace predrec {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // raw tokens, row-major

    // Index of a header column, -1 if absent.
    int column(const std::string& name) const;
};

// Reads a whole CSV file; trims spaces and CR, skips blank lines.
// Throws ConfigError if the file cannot be opened or has no header.
CsvTable read_csv(const std::string& path);

CsvTable parse_csv(const std::string& text);

// Round-trip-safe formatting for doubles ("%.17g"); all serialized numbers
// go through this so reruns are byte-identical.
std::string format_double(double value);

std::string trim(const std::string& s);

std::vector<std::string> split(const std::string& line, char sep);

// FNV-1a 64-bit hash; used for input digests and data-anchored seeds.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);
std::string to_hex(std::uint64_t value);

// Whole-file read; throws ConfigError when missing.
std::string read_file(const std::string& path);

// Parses a double/long with full-token validation; throws ConfigError that
// names `what` on failure.
double parse_double(const std::string& token, const std::string& what);
long parse_long(const std::string& token, const std::string& what);

}  // namespace predrec
