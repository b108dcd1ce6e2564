#include "predrec/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "predrec/errors.hpp"

namespace predrec {

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && (s[begin] == ' ' || s[begin] == '\t' || s[begin] == '\r')) ++begin;
    while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(line);
    while (std::getline(in, token, sep)) out.push_back(trim(token));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto tokens = split(line, ',');
        if (!have_header) {
            table.header = std::move(tokens);
            have_header = true;
        } else {
            table.rows.push_back(std::move(tokens));
        }
    }
    if (!have_header) throw ConfigError("CSV input has no header row");
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a64(const std::string& text) { return fnv1a64(text.data(), text.size()); }

std::string to_hex(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

double parse_double(const std::string& token, const std::string& what) {
    const std::string t = trim(token);
    if (t.empty()) throw ConfigError(what + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(what + ": not a number: '" + t + "'");
    return value;
}

long parse_long(const std::string& token, const std::string& what) {
    const std::string t = trim(token);
    if (t.empty()) throw ConfigError(what + ": empty integer field");
    errno = 0;
    char* end = nullptr;
    long value = std::strtol(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(what + ": not an integer: '" + t + "'");
    return value;
}

}  // namespace predrec
