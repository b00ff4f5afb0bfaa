#include "qthermo/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qthermo/errors.hpp"

namespace qthermo::cli {

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw Error(ErrorKind::InvalidArgument, "CSV table needs at least one column");
}

void CsvTable::add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size()) {
        throw Error(ErrorKind::InvalidArgument, "row has " + std::to_string(row.size()) + " values for " +
                                                    std::to_string(columns_.size()) + " columns");
    }
    data_.insert(data_.end(), row.begin(), row.end());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    // to_chars never consults the locale.
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

void CsvTable::write(std::ostream& out) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
    out << '\n';
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << format_number(at(r, c));
        out << '\n';
    }
}

std::string CsvTable::str() const {
    std::ostringstream s;
    write(s);
    return s.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Config, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace qthermo::cli
