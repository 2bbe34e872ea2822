#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spadsim {

// Rectangular numeric result set; the unit of output for every scenario.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);  // throws config_error on width mismatch
};

// Shortest-of-9-significant-digits decimal rendering, identical across runs
// and platforms.
std::string format_double(double value);

// RFC-4180 with LF line endings; numeric cells via format_double.
void write_csv(const Table& table, std::ostream& out);
std::string to_csv(const Table& table);
void write_csv_file(const Table& table, const std::string& path);  // throws sim_error

}  // namespace spadsim
