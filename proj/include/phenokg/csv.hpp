#pragma once

#include <string>
#include <vector>

namespace phenokg::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;
};

// Comma-separated with a header row, UTF-8. Quoted fields with embedded
// commas/quotes are supported ("" escapes a quote).
Table read_file(const std::string& path);
Table parse(const std::string& text);

std::string escape_field(const std::string& field);
void write_file(const std::string& path, const Table& table);

}  // namespace phenokg::csv
