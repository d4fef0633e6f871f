#pragma once

// Result tables and their CSV form: header row, LF endings, shortest round-trip doubles.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "../errors.hpp"

namespace catmap::harness {

using Cell = std::variant<std::int64_t, double, std::string>;

struct ResultTable {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns.size())
            throw Error("row width does not match schema '" + schema + "'");
        rows.push_back(std::move(row));
    }
};

inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell& c)
{
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c))
        return format_double(*d);
    return std::get<std::string>(c);
}

inline std::string to_csv(const ResultTable& t)
{
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), std::streamsize(content.size()));
    out.close();
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

} // namespace catmap::harness
