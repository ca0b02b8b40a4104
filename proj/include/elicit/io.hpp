#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace elicit::io {

/// Whole-file read/write. Throws Error(ParseError) when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Tab-separated table with a header row. Fields may not contain tabs or
/// newlines; `escape` maps them to \t, \n and \\ on write.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  static Table parse(std::string_view text);

  [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
  [[nodiscard]] bool has_column(std::string_view name) const;

  /// Field of row r by column name; throws Error(MissingField).
  [[nodiscard]] const std::string& at(std::size_t r, std::string_view column) const;
  [[nodiscard]] const std::vector<std::string>& row(std::size_t r) const { return rows_.at(r); }
  /// 1-based line number of row r in the source text (0 when built in memory).
  [[nodiscard]] std::size_t line_of(std::size_t r) const;

  void add_row(std::vector<std::string> fields);
  [[nodiscard]] std::string format() const;

 private:
  [[nodiscard]] std::size_t column_index(std::string_view name) const;

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

std::string escape(std::string_view field);
std::string unescape(std::string_view field);

/// Splits on '\n', drops a trailing '\r' and skips blank lines.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace elicit::io
