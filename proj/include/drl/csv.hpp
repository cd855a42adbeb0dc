#pragma once

// RFC 4180 tables. Each cell keeps its original bytes so that rows the
// refiner leaves alone are written back unchanged.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "drl/constraint_lang.hpp"
#include "drl/matrix.hpp"

namespace drl {

struct CsvCell {
    std::string value;  // unquoted content
    std::string raw;    // as it appeared in the input, quotes included
};

struct CsvTable {
    std::vector<CsvCell> header;
    std::vector<std::vector<CsvCell>> rows;

    std::vector<std::string> header_names() const;
};

// Header row mandatory; every record must have the header's width. CRLF and
// LF are both accepted. Throws ParseError with 1-based line and column.
CsvTable read_csv(std::string_view text);

// Writes raw cell text, LF line endings, and a final newline.
std::string write_csv(const CsvTable& table);

// Quotes when the value contains a separator, quote or line break.
std::string csv_quote(std::string_view value);

// Shortest decimal text that reads back as the same double.
std::string format_double(double value);

// Columns of the table bound to variables, in binding order. Variables absent
// from the header are an error; other columns are left alone.
std::vector<std::size_t> bind_columns(const CsvTable& table, const VariableBinding& binding);

// Numeric matrix of the bound columns. Throws ParseError on non-numeric cells.
Matrix to_matrix(const CsvTable& table, std::span<const std::size_t> columns);

// Replaces bound cells whose value changed (bitwise); returns the number of
// cells rewritten.
std::size_t apply_matrix(CsvTable& table, std::span<const std::size_t> columns, const Matrix& original,
                         const Matrix& updated);

}  // namespace drl
