#pragma once

#include <string>
#include <vector>

namespace evrptw {

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
// Fixed number of decimals.
std::string format_fixed(double v, int decimals);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Splits CSV text into cells (no quoting support beyond plain fields).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace evrptw
