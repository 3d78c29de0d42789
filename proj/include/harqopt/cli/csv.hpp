#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace harqopt::cli {

/// Nine significant digits, %g style.
std::string format_value(double value);
std::string format_value(std::uint64_t value);
std::string format_value(int value);
std::string format_value(bool value);

/// Header plus rows of already formatted cells, written with LF endings.
class CsvTable {
public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    /// Throws std::invalid_argument if the width differs from the header.
    void add_row(std::vector<std::string> cells);

    void write(std::ostream& out) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// "name_1", ..., "name_n".
std::vector<std::string> numbered(std::string_view name, std::size_t n);

}  // namespace harqopt::cli
