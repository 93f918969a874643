#pragma once

#include <string>
#include <vector>

namespace castle::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 when absent
};

// RFC-4180: quoted fields, doubled-quote escapes, CRLF or LF row ends.
Table parse(const std::string& text);
Table read_file(const std::string& path);

std::string escape_field(const std::string& field);
std::string render(const Table& table);

} // namespace castle::csv
