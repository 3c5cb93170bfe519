#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sensi {

/// One parsed CSV file: header plus data rows, all as raw strings.
/// `line` is the 1-based physical line a row came from, for error messages.
struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<long> line;
};

/// Reads a comma-separated file. Every row must have exactly as many fields as
/// the header; CR-LF endings and trailing blank lines are tolerated. Fields are
/// split on ',' with no quoting (none of the documented schemas needs it).
/// Throws MissingInputError if the file cannot be opened, ValidationError on
/// malformed content.
CsvFile read_csv(const std::filesystem::path& path);

/// Requires the header to match `expected` exactly, else ValidationError naming the file.
void require_header(const CsvFile& csv, const std::filesystem::path& path,
                    const std::vector<std::string>& expected);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Fixed-point with `digits` decimals (for report files).
std::string format_fixed(double v, int digits);

/// Parses a double field; throws ValidationError with file/line context on failure.
double parse_double_field(const std::string& text, const std::filesystem::path& path, long line);

/// Parses a non-negative integer field; throws ValidationError with context on failure.
long long parse_count_field(const std::string& text, const std::filesystem::path& path, long line);

/// Writes `content` atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sensi
