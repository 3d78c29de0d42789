#include "harqopt/cli/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace harqopt::cli {

namespace {

std::string quoted(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

void write_line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out << ',';
        out << quoted(cells[i]);
    }
    out << '\n';
}

}  // namespace

std::string format_value(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

std::string format_value(std::uint64_t value) { return std::to_string(value); }

std::string format_value(int value) { return std::to_string(value); }

std::string format_value(bool value) { return value ? "1" : "0"; }

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw std::invalid_argument("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(header_.size()));
    }
    rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
    write_line(out, header_);
    for (const auto& row : rows_) write_line(out, row);
}

std::vector<std::string> numbered(std::string_view name, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(std::string(name) + "_" + std::to_string(i));
    return out;
}

}  // namespace harqopt::cli
