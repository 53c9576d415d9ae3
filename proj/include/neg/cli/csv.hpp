#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace neg::cli {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

struct CsvRow {
    std::size_t line = 0;  // 1-based line number in the file
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    // Column index by name, or -1.
    int column(std::string_view name) const;
};

// RFC 4180-style reader (quoted fields, doubled quotes). Throws InvalidInput
// with the line number for ragged rows or unterminated quotes.
CsvTable read_csv(std::istream& in, const std::string& source_name);
CsvTable read_csv_file(const std::filesystem::path& path);

// Parses a full-string double; throws InvalidInput naming source, line and column.
double parse_number(const std::string& text, const std::string& where);

// Checks that a file's header equals `expected` and that every row has the
// same number of fields. Returns an empty string when valid, else the problem.
std::string validate_csv_schema(const std::filesystem::path& path,
                                const std::vector<std::string>& expected);

}  // namespace neg::cli
