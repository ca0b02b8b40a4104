#include "elicit/io.hpp"

#include <fstream>
#include <sstream>

#include "elicit/error.hpp"

namespace elicit::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string escape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == '\\' && i + 1 < field.size()) {
      switch (field[i + 1]) {
        case 't': out += '\t'; ++i; continue;
        case 'n': out += '\n'; ++i; continue;
        case 'r': out += '\r'; ++i; continue;
        case '\\': out += '\\'; ++i; continue;
        default: break;
      }
    }
    out += field[i];
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto end = line.find('\t', start);
    if (end == std::string_view::npos) {
      fields.push_back(unescape(line.substr(start)));
      break;
    }
    fields.push_back(unescape(line.substr(start, end - start)));
    start = end + 1;
  }
  return fields;
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

Table Table::parse(std::string_view text) {
  Table t;
  auto lines = split_lines(text);
  bool header = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (header) {
      t.columns_ = std::move(fields);
      header = false;
      continue;
    }
    if (fields.size() != t.columns_.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(n + 1) + ": expected " +
                                             std::to_string(t.columns_.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    t.rows_.push_back(std::move(fields));
    t.lines_.push_back(n + 1);
  }
  return t;
}

bool Table::has_column(std::string_view name) const {
  for (const auto& c : columns_)
    if (c == name) return true;
  return false;
}

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  throw Error(ErrorCode::MissingField, "missing column '" + std::string(name) + "'");
}

const std::string& Table::at(std::size_t r, std::string_view column) const {
  return rows_.at(r).at(column_index(column));
}

std::size_t Table::line_of(std::size_t r) const { return r < lines_.size() ? lines_[r] : 0; }

void Table::add_row(std::vector<std::string> fields) {
  if (fields.size() != columns_.size())
    throw Error(ErrorCode::ParseError, "row width does not match header");
  rows_.push_back(std::move(fields));
}

std::string Table::format() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += '\t';
      out += escape(fields[i]);
    }
    out += '\n';
  };
  emit(columns_);
  for (const auto& r : rows_) emit(r);
  return out;
}

}  // namespace elicit::io
