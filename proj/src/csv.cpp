#include "castle/csv.hpp"

#include <fstream>
#include <sstream>

#include "castle/error.hpp"

namespace castle::csv {

int Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return static_cast<int>(i);
    return -1;
}

Table parse(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
            continue;
        }
        if (c == ',') {
            end_field();
            continue;
        }
        if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            end_record();
            continue;
        }
        if (c == '\n') {
            end_record();
            continue;
        }
        field.push_back(c);
        field_started = true;
    }
    if (in_quotes)
        throw Error::data("unterminated quoted CSV field");
    if (field_started || !record.empty())
        end_record();

    Table t;
    if (records.empty())
        return t;
    t.header = records.front();
    t.rows.assign(records.begin() + 1, records.end());
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size())
            throw Error::data("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                              std::to_string(t.header.size()));
    }
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error::config("cannot open CSV file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string escape_field(const std::string& field) {
    bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quote)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string render(const Table& table) {
    std::string out;
    auto row_text = [](const std::vector<std::string>& row) {
        std::string line;
        for (size_t i = 0; i < row.size(); ++i) {
            if (i)
                line.push_back(',');
            line += escape_field(row[i]);
        }
        return line;
    };
    out += row_text(table.header);
    out.push_back('\n');
    for (const auto& row : table.rows) {
        out += row_text(row);
        out.push_back('\n');
    }
    return out;
}

} // namespace castle::csv
