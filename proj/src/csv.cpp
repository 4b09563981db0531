#include "zib/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace zib {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < headers.size(); ++j) {
        if (headers[j] == name) return j;
    }
    throw CsvError("unknown column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open file '" + path + "'");

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw CsvError("file '" + path + "' is empty");
    for (const auto& h : split_line(line)) table.headers.push_back(strip(h));
    if (table.headers.empty()) throw CsvError("file '" + path + "' has no header columns");

    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (strip(line).empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != table.headers.size()) {
            throw CsvError("malformed CSV: row " + std::to_string(row_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(table.headers.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const std::string cell = strip(fields[j]);
            const char* begin = cell.data();
            const char* end = begin + cell.size();
            double v = 0.0;
            const auto res = std::from_chars(begin, end, v);
            if (res.ec != std::errc() || res.ptr != end) {
                throw CsvError("malformed CSV: non-numeric value '" + cell + "' at row " +
                               std::to_string(row_no) + ", column '" + table.headers[j] + "'");
            }
            row[j] = v;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace zib
