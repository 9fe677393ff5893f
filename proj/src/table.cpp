#include "sharecap/table.hpp"
#include "sharecap/errors.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace sharecap {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, delimiter)) {
        // trim surrounding whitespace
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == delimiter) fields.push_back("");
    return fields;
}

} // namespace

std::optional<std::size_t> Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    return std::nullopt;
}

std::string Table::cell(std::size_t row, const std::string& name) const {
    const auto index = column_index(name);
    if (!index || row >= rows.size() || *index >= rows[row].size()) return "";
    return rows[row][*index];
}

Table read_csv(std::istream& in, char delimiter) {
    Table table;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_done) {
            table.columns = split_line(line, delimiter);
            header_done = true;
        } else {
            table.rows.push_back(split_line(line, delimiter));
        }
    }
    if (!header_done) table.columns = {};
    return table;
}

Table read_csv_file(const std::string& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return read_csv(in, delimiter);
}

void write_csv(std::ostream& out, const Table& table, char delimiter) {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << table.columns[i] << (i + 1 < table.columns.size() ? std::string(1, delimiter) : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? std::string(1, delimiter) : "");
        out << "\n";
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for digest");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return fnv1a_hex(buffer.str());
}

} // namespace sharecap
