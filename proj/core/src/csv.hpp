#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace nbplan::csv {

struct Table {
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // rows[i] came from this (1-based) line of the file.
    std::vector<std::size_t> line_numbers;

    int column(std::string_view name) const;
    int require_column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

double parse_double(const Table& table, std::size_t row, std::size_t col);
bool parse_bool(const Table& table, std::size_t row, std::size_t col);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace nbplan::csv
