#include "spadsim/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spadsim/errors.hpp"

namespace spadsim {

void Table::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw config_error("row width does not match the column count");
    rows.push_back(std::move(row));
}

std::string format_double(double value) {
    char buf[48];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

namespace {

void write_field(std::ostream& out, const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out << ',';
        write_field(out, table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
}

std::string to_csv(const Table& table) {
    std::ostringstream out;
    write_csv(table, out);
    return out.str();
}

void write_csv_file(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sim_error("cannot open " + path + " for writing");
    write_csv(table, out);
    out.flush();
    if (!out) throw sim_error("failed writing " + path);
}

}  // namespace spadsim
