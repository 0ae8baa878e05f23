#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mtg::cli {

struct ResultTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_meta(std::string key, std::string value);
    void add_meta(std::string key, double value);
    void add_row(std::vector<double> row);
    // Column by name; throws std::out_of_range if absent.
    std::vector<double> column(const std::string& name) const;
    const std::string* meta(const std::string& key) const;
};

// `#key = value` header lines, then the column header, then rows. No quoting.
void write_table(std::ostream& out, const ResultTable& t, char delimiter = ',');
ResultTable read_table(std::istream& in, char delimiter = ',');

}  // namespace mtg::cli
