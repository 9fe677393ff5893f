#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sharecap {

// Delimiter-separated table with a mandatory header row. UTF-8, '.' decimal
// separator, no quoting (fields must not contain the delimiter).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column_index(const std::string& name) const;
    // empty string when the column is absent or the cell is blank
    std::string cell(std::size_t row, const std::string& name) const;
};

Table read_csv(std::istream& in, char delimiter = ',');
Table read_csv_file(const std::string& path, char delimiter = ',');
void write_csv(std::ostream& out, const Table& table, char delimiter = ',');

// FNV-1a 64-bit digest of a byte string, hex-encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string digest_file(const std::string& path);

} // namespace sharecap
