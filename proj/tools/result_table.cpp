#include "result_table.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "run_config.hpp"

namespace mtg::cli {

void ResultTable::add_meta(std::string key, std::string value) { metadata.emplace_back(std::move(key), std::move(value)); }

void ResultTable::add_meta(std::string key, double value) { add_meta(std::move(key), format_number(value)); }

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw std::logic_error("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::vector<double> ResultTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("ResultTable: no column '" + name + "'");
    const size_t j = static_cast<size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
}

const std::string* ResultTable::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return &v;
    return nullptr;
}

void write_table(std::ostream& out, const ResultTable& t, char delimiter) {
    for (const auto& [k, v] : t.metadata) out << '#' << k << " = " << v << '\n';
    for (size_t j = 0; j < t.columns.size(); ++j) out << (j ? std::string(1, delimiter) : "") << t.columns[j];
    out << '\n';
    for (const auto& r : t.rows) {
        for (size_t j = 0; j < r.size(); ++j) out << (j ? std::string(1, delimiter) : "") << format_number(r[j]);
        out << '\n';
    }
}

ResultTable read_table(std::istream& in, char delimiter) {
    ResultTable t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            const size_t eq = line.find(" = ");
            if (eq != std::string::npos) t.metadata.emplace_back(line.substr(1, eq - 1), line.substr(eq + 3));
            continue;
        }
        std::vector<std::string> cells;
        size_t pos = 0;
        while (true) {
            const size_t next = line.find(delimiter, pos);
            cells.push_back(line.substr(pos, next - pos));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        std::vector<double> row;
        for (const std::string& c : cells) {
            double v = 0.0;
            if (c == "nan" || c == "inf" || c == "-inf") {
                v = c == "nan" ? std::numeric_limits<double>::quiet_NaN()
                    : c == "inf" ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
            } else {
                const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
                if (ec != std::errc() || ptr != c.data() + c.size())
                    throw std::runtime_error("read_table: bad cell '" + c + "'");
            }
            row.push_back(v);
        }
        t.add_row(std::move(row));
    }
    return t;
}

}  // namespace mtg::cli
