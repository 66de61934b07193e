#pragma once

#include <string>
#include <vector>

namespace dermabench::util {

/// Column-aligned plain-text table. The first column is left aligned, the
/// rest right aligned.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Number of code points in a UTF-8 string.
std::size_t display_width(const std::string& text);

std::string fixed(double value, int decimals);

}  // namespace dermabench::util
