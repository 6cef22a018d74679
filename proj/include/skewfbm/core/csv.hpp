#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewfbm {

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Rows of cells, written with '\n' line endings and ',' separators.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
  public:
    Row& operator<<(double v) {
      cells_.push_back(format_double(v));
      return *this;
    }
    Row& operator<<(std::int64_t v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& operator<<(std::size_t v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
    Row& operator<<(const std::string& s) {
      cells_.push_back(s);
      return *this;
    }
    Row& operator<<(const char* s) { return *this << std::string(s); }

  private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  Row& row() {
    rows_.emplace_back();
    return rows_.back();
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::string& cell(std::size_t r, std::size_t c) const { return rows_.at(r).cells_.at(c); }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) {
      if (r.cells_.size() != header_.size()) throw std::logic_error("csv row width does not match header");
      append_line(out, r.cells_);
    }
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << str();
  }

private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

}  // namespace skewfbm
