#include "sensi/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "sensi/errors.hpp"

namespace sensi {

namespace {

std::vector<std::string> split_fields(const std::string& row) {
    std::vector<std::string> out;
    std::string field;
    for (char c : row) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot open input file: " + path.string());

    CsvFile csv;
    std::string row;
    long line_no = 0;
    while (std::getline(in, row)) {
        ++line_no;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (row.empty()) continue;
        auto fields = split_fields(row);
        if (csv.header.empty()) {
            csv.header = std::move(fields);
            continue;
        }
        if (fields.size() != csv.header.size()) {
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": expected " << csv.header.size()
                << " fields, found " << fields.size();
            throw ValidationError(msg.str());
        }
        csv.rows.push_back(std::move(fields));
        csv.line.push_back(line_no);
    }
    if (csv.header.empty()) throw ValidationError("empty file: " + path.string());
    return csv;
}

void require_header(const CsvFile& csv, const std::filesystem::path& path,
                    const std::vector<std::string>& expected) {
    if (csv.header != expected) {
        std::ostringstream msg;
        msg << path.string() << ": bad header, expected '";
        for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? "," : "") << expected[i];
        msg << "' but found '";
        for (std::size_t i = 0; i < csv.header.size(); ++i) msg << (i ? "," : "") << csv.header[i];
        msg << "'";
        throw ValidationError(msg.str());
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, end);
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

double parse_double_field(const std::string& text, const std::filesystem::path& path, long line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [end, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || end != last) {
        std::ostringstream msg;
        msg << path.string() << ":" << line << ": not a number: '" << text << "'";
        throw ValidationError(msg.str());
    }
    return v;
}

long long parse_count_field(const std::string& text, const std::filesystem::path& path, long line) {
    long long v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [end, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || end != last || v < 0) {
        std::ostringstream msg;
        msg << path.string() << ":" << line << ": not a non-negative count: '" << text << "'";
        throw ValidationError(msg.str());
    }
    return v;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("rename failed: " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

}  // namespace sensi
