#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptb {

/// Rows of doubles under named columns, plus an ordered metadata block. NaN marks
/// an undefined or failed value.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::out_of_range("ResultTable: no column '" + name + "'");
    }

    bool has_column(const std::string& name) const
    {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }

    std::vector<double> values(const std::string& name) const
    {
        const std::size_t k = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }

    std::string meta(const std::string& key) const
    {
        for (const auto& [k, v] : metadata)
            if (k == key) return v;
        throw std::out_of_range("ResultTable: no metadata '" + key + "'");
    }
};

enum class OutputFormat { csv, json };

namespace detail {

inline std::string number17(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string to_csv(const ResultTable& t)
{
    std::string out;
    for (const auto& [k, v] : t.metadata) out += "# " + k + " = " + v + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::number17(row[i]);
        out += "\n";
    }
    return out;
}

/// Numbers are written by hand with 17 significant digits (non-finite as null);
/// strings are escaped by the JSON library.
inline std::string to_json(const ResultTable& t)
{
    auto str = [](const std::string& s) { return nlohmann::json(s).dump(); };
    std::string out = "{\n  \"metadata\": {";
    for (std::size_t i = 0; i < t.metadata.size(); ++i) {
        out += (i ? ",\n    " : "\n    ") + str(t.metadata[i].first) + ": " + str(t.metadata[i].second);
    }
    out += t.metadata.empty() ? "},\n" : "\n  },\n";
    out += "  \"columns\": [";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? ", " : "") + str(t.columns[i]);
    out += "],\n  \"rows\": [";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += r ? ",\n    [" : "\n    [";
        for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
            const double v = t.rows[r][i];
            out += (i ? ", " : "") + (std::isfinite(v) ? detail::number17(v) : std::string("null"));
        }
        out += "]";
    }
    out += t.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

/// Writes the table; I/O failures are reported with the system's message.
inline void emit(const ResultTable& t, OutputFormat format, const std::string& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("emit: cannot open '" + path + "': " + std::strerror(errno));
    const std::string text = format == OutputFormat::csv ? to_csv(t) : to_json(t);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f) throw std::runtime_error("emit: write to '" + path + "' failed: " + std::strerror(errno));
}

/// Reads a table written by to_csv.
inline ResultTable parse_csv(const std::string& text)
{
    ResultTable t;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0 && !header) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) throw std::runtime_error("parse_csv: bad metadata line '" + line + "'");
            t.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size()) throw std::runtime_error("parse_csv: ragged row '" + line + "'");
        std::vector<double> row;
        for (const auto& c : cells) {
            if (c == "nan") row.push_back(std::numeric_limits<double>::quiet_NaN());
            else row.push_back(std::stod(c));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline ResultTable read_csv(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_csv: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str());
}

} // namespace ptb
