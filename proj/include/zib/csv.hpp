#ifndef ZIB_CSV_HPP
#define ZIB_CSV_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace zib {

class CsvError : public std::runtime_error {
public:
    explicit CsvError(const std::string& msg) : std::runtime_error(msg) {}
};

// Comma-separated, first row headers, '.' decimal, all cells numeric.
struct CsvTable {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> rows;

    // index of a named column; throws CsvError when absent
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Writes via a temp file in the same directory plus rename, so a partial
// output file is never observed.
void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);

} // namespace zib

#endif // ZIB_CSV_HPP
