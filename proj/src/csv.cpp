#include "drl/csv.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <unordered_map>

#include "drl/errors.hpp"

namespace drl {

std::vector<std::string> CsvTable::header_names() const {
    std::vector<std::string> out;
    for (const auto& c : header) out.push_back(c.value);
    return out;
}

CsvTable read_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<std::vector<CsvCell>> records;
    std::vector<std::size_t> record_lines;
    std::size_t line = 1;
    std::size_t col = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    while (i < n) {
        std::vector<CsvCell> record;
        const std::size_t record_line = line;
        for (;;) {
            CsvCell cell;
            const std::size_t start = i;
            if (i < n && text[i] == '"') {
                const std::size_t open_line = line;
                const std::size_t open_col = col;
                ++i;
                ++col;
                bool closed = false;
                while (i < n) {
                    if (text[i] == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            cell.value += '"';
                            i += 2;
                            col += 2;
                            continue;
                        }
                        ++i;
                        ++col;
                        closed = true;
                        break;
                    }
                    if (text[i] == '\n') {
                        ++line;
                        col = 0;
                    }
                    cell.value += text[i++];
                    ++col;
                }
                if (!closed) throw ParseError("unterminated quoted field", open_line, open_col);
                if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    throw ParseError("unexpected character after closing quote", line, col);
                }
            } else {
                while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    if (text[i] == '"') throw ParseError("quote inside unquoted field", line, col);
                    cell.value += text[i++];
                    ++col;
                }
            }
            cell.raw = std::string(text.substr(start, i - start));
            record.push_back(std::move(cell));
            if (i < n && text[i] == ',') {
                ++i;
                ++col;
                continue;
            }
            break;
        }
        if (i < n && text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') ++i;
        ++line;
        col = 1;
        // Blank lines carry no record.
        if (record.size() == 1 && record[0].raw.empty()) continue;
        records.push_back(std::move(record));
        record_lines.push_back(record_line);
    }

    if (records.empty()) throw ParseError("missing header row", 1, 0);
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size()) {
            throw ParseError("record has " + std::to_string(records[r].size()) + " fields, header has " +
                                 std::to_string(table.header.size()),
                             record_lines[r], 0);
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

std::string csv_quote(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string write_csv(const CsvTable& table) {
    std::string out;
    auto emit = [&](const std::vector<CsvCell>& record) {
        for (std::size_t i = 0; i < record.size(); ++i) {
            if (i) out += ',';
            out += record[i].raw;
        }
        out += '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, end);
}

std::vector<std::size_t> bind_columns(const CsvTable& table, const VariableBinding& binding) {
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (!where.emplace(table.header[c].value, c).second) {
            throw ParseError("duplicate column '" + table.header[c].value + "'", 1, 0);
        }
    }
    std::vector<std::size_t> out;
    for (const auto& name : binding.names()) {
        auto it = where.find(name);
        if (it == where.end()) throw DimensionMismatch("data has no column '" + name + "'");
        out.push_back(it->second);
    }
    return out;
}

Matrix to_matrix(const CsvTable& table, std::span<const std::size_t> columns) {
    Matrix m(table.rows.size(), columns.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            std::string_view s = table.rows[r][columns[j]].value;
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
            if (!s.empty() && s.front() == '+') s.remove_prefix(1);
            double v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
                throw ParseError("not a number: '" + table.rows[r][columns[j]].value + "' in column '" +
                                     table.header[columns[j]].value + "'",
                                 r + 2, columns[j] + 1);
            }
            m(r, j) = v;
        }
    }
    return m;
}

std::size_t apply_matrix(CsvTable& table, std::span<const std::size_t> columns, const Matrix& original,
                         const Matrix& updated) {
    std::size_t changed = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (std::bit_cast<std::uint64_t>(original(r, j)) == std::bit_cast<std::uint64_t>(updated(r, j))) continue;
            CsvCell& cell = table.rows[r][columns[j]];
            cell.value = format_double(updated(r, j));
            cell.raw = cell.value;
            ++changed;
        }
    }
    return changed;
}

}  // namespace drl
