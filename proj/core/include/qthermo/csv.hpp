#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace qthermo::cli {

/// Numeric table written with a header row, 12 significant digits and '.'
/// radix independent of the global locale.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return data_.size() / columns_.size(); }
    double at(std::size_t row, std::size_t col) const { return data_[row * columns_.size() + col]; }

    /// Throws Error(InvalidArgument) unless row has one value per column.
    void add_row(const std::vector<double>& row);

    void write(std::ostream& out) const;
    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<double> data_;
};

/// "%.12g" in the C locale; non-finite values print as inf, -inf or nan.
std::string format_number(double v);

/// 64-bit FNV-1a digest of a byte string, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace qthermo::cli
